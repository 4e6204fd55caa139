// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_SEARCH_HPP
#define NETRED_SEARCH_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "netred/clustering.hpp"
#include "netred/mas.hpp"
#include "netred/mor.hpp"
#include "netred/nonlinear.hpp"
#include "netred/partition.hpp"
#include "netred/stabsep.hpp"

namespace netred
{

enum class Metric
{
  h2,
  hinf
};

Metric parse_metric(const std::string &name);
std::string to_string(Metric m);

struct RankedPartition
{
  std::size_t rank = 0;  ///< 1-based
  Metric metric = Metric::h2;
  double relative_error = 0.0;
  Partition partition;
  std::uint64_t index = 0;  ///< position in restricted-growth-string order
};

/// Evaluates relative errors of clustered models against a once-decomposed
/// original.  Immutable after construction and safe to share across threads.
class ErrorEvaluator
{
public:
  explicit ErrorEvaluator(const LinearMas &sys, std::size_t coarse_points = 200);

  const LinearMas &system() const { return sys_; }
  const StableDecomposition &decomposition() const { return full_; }
  double h2_norm() const { return h2_norm_; }
  double hinf_norm() const { return hinf_norm_; }

  /// Stable part of the clustered model; throws UnstablePartMismatch when its
  /// consensus part differs from the original.
  StableDecomposition reduced(const Partition &p) const;

  double h2_relative(const Partition &p) const;
  double hinf_relative(const Partition &p) const;  ///< grid search with refinement
  double hinf_relative_coarse(const Partition &p) const;  ///< cached grid only

private:
  LinearMas sys_;
  AgentSplit split_;
  NetworkData net_;
  StableDecomposition full_;
  double h2_norm_ = 0.0;
  double hinf_norm_ = 0.0;
  std::vector<double> omegas_;
  std::vector<ComplexMatrix> full_response_;
};

struct SearchProgress
{
  std::size_t chunks_done = 0;
  std::size_t chunks_total = 0;
  std::uint64_t evaluated = 0;
};

struct SearchOptions
{
  std::size_t top_k = 15;
  std::size_t workers = 1;
  std::uint64_t budget = 1'000'000;
  std::uint64_t chunk_size = 1000;
  std::size_t refine_top = 100;  ///< H∞ candidates refined after the coarse sweep
  std::string checkpoint;        ///< resume file; empty disables checkpointing
  std::function<void(const SearchProgress &)> progress;
};

/// Ranks all partitions into r clusters by relative error, ascending, ties broken
/// by restricted-growth-string order.  Throws BudgetExceeded when S(n, r) exceeds
/// the budget.
std::vector<RankedPartition> rank_all_partitions(const LinearMas &sys, std::size_t r, Metric metric,
                                                 const SearchOptions &opts = {});

/// Same, reusing an existing evaluator.
std::vector<RankedPartition> rank_all_partitions(const ErrorEvaluator &eval, std::size_t r,
                                                 Metric metric, const SearchOptions &opts = {});

/// 1-based position of p in a ranked table.
std::optional<std::size_t> rank_of(const std::vector<RankedPartition> &table, const Partition &p);

/// NETRED_WORKERS if set and positive, otherwise the hardware concurrency.
std::size_t default_worker_count();

enum class MorMethod
{
  irka,
  bt,
  pod
};

enum class BasisSource
{
  v,
  w,
  vw
};

enum class ClusterAlgo
{
  qr,
  kmeans
};

MorMethod parse_mor_method(const std::string &name);
BasisSource parse_basis_source(const std::string &name);
ClusterAlgo parse_cluster_algo(const std::string &name);
std::string to_string(MorMethod m);
std::string to_string(BasisSource s);
std::string to_string(ClusterAlgo a);

struct PipelineOptions
{
  MorMethod mor = MorMethod::irka;
  std::size_t order = 5;     ///< r_P
  std::size_t clusters = 5;  ///< r
  BasisSource source = BasisSource::v;
  ClusterAlgo algo = ClusterAlgo::kmeans;
  std::uint64_t seed = 0;
  IrkaOptions irka;  ///< seed is overwritten by the pipeline seed
  std::size_t n_init = 50;
  std::size_t workers = 1;
  const std::vector<RankedPartition> *h2_table = nullptr;
  const std::vector<RankedPartition> *hinf_table = nullptr;
};

struct PipelineResult
{
  Partition partition;
  ErrorValue h2;
  ErrorValue hinf;
  std::optional<std::size_t> h2_rank;
  std::optional<std::size_t> hinf_rank;
  ProjectionBasis basis;  ///< basis of the stable part
  Matrix features;
  double mor_h2_relative = 0.0;  ///< error of the unstructured projected model
};

/// Unstructured features of the full-space basis: the stable-part basis mapped
/// through 𝒯₋ (V) or 𝒮₋ (W) and orthonormalized; VW takes the leading r_P left
/// singular vectors of both.
Matrix pipeline_features(const StableDecomposition &decomp, const ProjectionBasis &basis,
                         BasisSource source, std::size_t agent_order);

/// decompose → MOR on the stable part → clustering → cluster_reduce → errors.
/// Throws InvalidCombination for QR with r ≠ r_P or POD on a linear network.
PipelineResult heuristic_pipeline(const LinearMas &sys, const PipelineOptions &opts);

/// POD + k-means experiment on a nonlinear network: training snapshots are the
/// accepted integrator steps, the test trajectory is sampled on a uniform grid.
struct PodStudyOptions
{
  std::size_t modes = 2;
  double t0 = 0.0;
  double t1 = 20.0;
  std::size_t samples = 1000;
  InputSignal train;  ///< defaults to e^{-t}
  InputSignal test;   ///< defaults to e^{-t/10} sin t
  OdeOptions ode;
  std::size_t n_init = 50;
  std::uint64_t seed = 0;
};

struct PodStudyResult
{
  std::size_t clusters = 0;
  Partition partition;
  double l2_relative = 0.0;
  double max_pointwise = 0.0;
  KMeansResult kmeans;
};

class PodStudy
{
public:
  PodStudy(NonlinearMas sys, PodStudyOptions opts = {});

  const NonlinearMas &system() const { return sys_; }
  const ProjectionBasis &basis() const { return basis_; }
  const Matrix &features() const { return features_; }
  const OdeSolution &training() const { return training_; }
  const OdeSolution &reference() const { return reference_; }

  /// k-means on the POD features, then the test-input comparison.
  PodStudyResult evaluate(std::size_t clusters) const;

  /// Test-input comparison for a given partition.
  PodStudyResult evaluate_partition(const Partition &p) const;

  /// Independent evaluations run concurrently; results follow the input order.
  std::vector<PodStudyResult> sweep(const std::vector<std::size_t> &clusters,
                                    std::size_t workers) const;

private:
  NonlinearMas sys_;
  PodStudyOptions opts_;
  OdeSolution training_;
  ProjectionBasis basis_;
  Matrix features_;
  std::vector<double> grid_;
  OdeSolution reference_;
};

}  // namespace netred

#endif  // NETRED_SEARCH_HPP
