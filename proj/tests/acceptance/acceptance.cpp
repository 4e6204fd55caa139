// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: prints one PASS/FAIL line per criterion followed by
// indented details, and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "netred/clustering.hpp"
#include "netred/error.hpp"
#include "netred/search.hpp"

using namespace netred;
using namespace netred::testing;

namespace
{

// Tolerances.
constexpr double kH2Tol = 1e-5;
constexpr double kHinfTol = 1e-3;
constexpr double kTieTol = 1e-10;
constexpr double kCensusSeconds = 120.0;
constexpr std::uint64_t kFiveClusterCount = 42525;
constexpr double kIrkaTarget = 3.30412e-2;
constexpr double kIrkaBand = 0.02;
constexpr double kIrkaFactor = 1.0 / 3.0;
constexpr double kVqrError = 0.150654;
constexpr double kVqrTol = 1e-5;
constexpr double kVkmError = 0.1459;
constexpr double kWkmError = 0.156788;
constexpr double kKmTol = 1e-4;
constexpr std::size_t kSeeds = 5;
constexpr std::size_t kSeedsRequired = 4;
constexpr double kIdentityTol = 1e-10;
constexpr double kGalerkinTol = 1e-12;
constexpr double kResidueTol = 1e-8;
constexpr double kVdpBound1 = 2.1;
constexpr double kVdpBound2 = 2.3;
constexpr double kVdpPointwise = 0.11;
constexpr double kVdpSpan = 100.0;
constexpr double kVdpSeconds = 300.0;
constexpr double kLyapTol = 1e-8;
constexpr double kFactorTol = 1e-10;
constexpr double kOdeTol = 1e-6;
constexpr double kHermiteTol = 1e-6;

struct Expected
{
  double error;
  const char *partition;
};

const std::vector<Expected> kTableH2 = {
    {0.128053, "{{1, 8}, {2, 3, 4, 9, 10}, {5}, {6}, {7}}"},
    {0.131311, "{{1, 2, 3, 4}, {5, 8}, {6}, {7}, {9, 10}}"},
    {0.137466, "{{1, 2, 3, 4, 9, 10}, {5}, {6}, {7}, {8}}"},
    {0.137473, "{{1, 3, 8}, {2, 4, 9, 10}, {5}, {6}, {7}}"},
    {0.143700, "{{1, 5, 8}, {2, 3, 4}, {6}, {7}, {9, 10}}"},
    {0.145900, "{{1, 2, 3}, {4, 9, 10}, {5, 8}, {6}, {7}}"},
    {0.146196, "{{1, 8}, {2, 3, 4, 9}, {5, 10}, {6}, {7}}"},
    {0.146196, "{{1, 8}, {2, 3, 4, 10}, {5, 9}, {6}, {7}}"},
    {0.147022, "{{1, 2, 3, 8}, {4, 9, 10}, {5}, {6}, {7}}"},
    {0.149240, "{{1, 8, 10}, {2, 3, 4, 9}, {5}, {6}, {7}}"},
    {0.149240, "{{1, 8, 9}, {2, 3, 4, 10}, {5}, {6}, {7}}"},
    {0.149654, "{{1, 8}, {2, 4, 9, 10}, {3, 5}, {6}, {7}}"},
    {0.150440, "{{1, 5}, {2, 3, 4, 9, 10}, {6}, {7}, {8}}"},
    {0.150654, "{{1, 3}, {2, 4, 9, 10}, {5, 8}, {6}, {7}}"},
    {0.151684, "{{1, 2, 8}, {3, 4, 9, 10}, {5}, {6}, {7}}"},
};

const std::vector<Expected> kTableHinf = {
    {0.253975, "{{1, 3, 5, 8}, {2, 4}, {6}, {7}, {9, 10}}"},
    {0.254376, "{{1, 2, 5, 8}, {3, 4}, {6}, {7}, {9, 10}}"},
    {0.254818, "{{1, 5, 8}, {2, 3, 4}, {6}, {7}, {9, 10}}"},
    {0.259483, "{{1, 2, 3, 5, 8}, {4}, {6}, {7}, {9, 10}}"},
    {0.260859, "{{1, 2, 4}, {3, 5, 8}, {6}, {7}, {9, 10}}"},
    {0.262244, "{{1, 2, 3, 4}, {5, 8}, {6}, {7}, {9, 10}}"},
    {0.266387, "{{1, 3, 4}, {2, 5, 8}, {6}, {7}, {9, 10}}"},
    {0.273663, "{{1, 4}, {2, 3, 5, 8}, {6}, {7}, {9, 10}}"},
    {0.276919, "{{1, 4, 5, 8}, {2, 3}, {6}, {7}, {9, 10}}"},
    {0.286961, "{{1, 3, 4, 5, 8}, {2}, {6}, {7}, {9, 10}}"},
    {0.288414, "{{1, 2, 3}, {4, 5, 8}, {6}, {7}, {9, 10}}"},
    {0.293773, "{{1, 5}, {2, 3, 4, 8}, {6}, {7}, {9, 10}}"},
    {0.294028, "{{1, 2, 3, 4, 8}, {5}, {6}, {7}, {9, 10}}"},
    {0.299845, "{{1, 2}, {3, 4, 5, 8}, {6}, {7}, {9, 10}}"},
    {0.305583, "{{1, 2, 4, 8}, {3, 5}, {6}, {7}, {9, 10}}"},
};

const char *const kVqrPartition = "{{1, 3}, {2, 4, 9, 10}, {5, 8}, {6}, {7}}";
const char *const kVkmPartition = "{{1, 2, 3}, {4, 9, 10}, {5, 8}, {6}, {7}}";

class Gate
{
public:
  void criterion(bool ok, const std::string &id, const std::string &title)
  {
    std::printf("%s %-3s %s\n", ok ? "PASS" : "FAIL", id.c_str(), title.c_str());
    for (const auto &d : details_)
    {
      std::printf("         %s\n", d.c_str());
    }
    std::fflush(stdout);
    details_.clear();
    failures_ += ok ? 0 : 1;
  }

  template <typename... Args>
  void detail(const char *fmt, Args... args)
  {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    details_.emplace_back(buf);
  }

  int failures() const { return failures_; }

private:
  std::vector<std::string> details_;
  int failures_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Compares a computed table with the expected rows; rows whose computed errors
/// agree within kTieTol form a tie group compared as a set.
bool table_matches(Gate &gate, const std::vector<RankedPartition> &table,
                   const std::vector<Expected> &expected, double tol)
{
  bool ok = table.size() >= expected.size();
  if (!ok)
  {
    gate.detail("table has %zu rows, expected %zu", table.size(), expected.size());
    return false;
  }
  std::size_t i = 0;
  while (i < expected.size())
  {
    std::size_t j = i + 1;
    while (j < expected.size() &&
           std::abs(table[j].relative_error - table[i].relative_error) <= kTieTol)
    {
      ++j;
    }
    std::set<Partition> got;
    std::set<Partition> want;
    for (std::size_t k = i; k < j; ++k)
    {
      got.insert(table[k].partition);
      want.insert(parse_partition(expected[k].partition, 10));
    }
    const bool same_set = got == want;
    for (std::size_t k = i; k < j; ++k)
    {
      const double diff = std::abs(table[k].relative_error - expected[k].error);
      const bool row_ok = same_set && diff <= tol;
      ok = ok && row_ok;
      gate.detail("%2zu %.6f (want %.6f, |d| %.1e) %s%s", k + 1, table[k].relative_error,
                  expected[k].error, diff, table[k].partition.to_string().c_str(),
                  row_ok ? (j - i > 1 ? "  [tie group]" : "") : "  MISMATCH");
    }
    i = j;
  }
  return ok;
}

// ---------------------------------------------------------------- criteria

struct Census
{
  ErrorEvaluator eval;
  std::vector<RankedPartition> h2;
  std::vector<RankedPartition> hinf;
  double h2_seconds = 0.0;
  double hinf_seconds = 0.0;
};

void criterion_tables(Gate &gate, Census &census, std::size_t workers)
{
  SearchOptions opts;
  opts.workers = workers;
  opts.top_k = 100;
  auto start = std::chrono::steady_clock::now();
  census.h2 = rank_all_partitions(census.eval, 5, Metric::h2, opts);
  census.h2_seconds = seconds_since(start);
  const bool h2_ok = table_matches(gate, census.h2, kTableH2, kH2Tol);
  gate.detail("runtime %.1f s on %zu worker(s), limit %.0f s", census.h2_seconds, workers,
              kCensusSeconds);
  gate.criterion(h2_ok && census.h2_seconds < kCensusSeconds, "1",
                 "exhaustive H2 ranking reproduces the top-15 table");

  opts.top_k = 15;
  start = std::chrono::steady_clock::now();
  census.hinf = rank_all_partitions(census.eval, 5, Metric::hinf, opts);
  census.hinf_seconds = seconds_since(start);
  const bool hinf_ok = table_matches(gate, census.hinf, kTableHinf, kHinfTol);
  gate.detail("runtime %.1f s on %zu worker(s)", census.hinf_seconds, workers);
  gate.criterion(hinf_ok && std::abs(census.hinf.front().relative_error - 0.253975) <= kHinfTol,
                 "2", "exhaustive H-infinity ranking reproduces the top-15 table");
}

void criterion_count(Gate &gate)
{
  const std::uint64_t counted = count_partitions(10, 5);
  std::set<std::vector<std::size_t>> distinct;
  std::uint64_t visited = 0;
  const PartitionEnumerator en(10, 5);
  en.for_each(0, en.size(), [&](std::uint64_t, const std::vector<std::size_t> &rgs) {
    distinct.insert(rgs);
    ++visited;
  });
  gate.detail("count %llu, enumerated %llu, distinct %zu",
              static_cast<unsigned long long>(counted), static_cast<unsigned long long>(visited),
              distinct.size());
  gate.criterion(counted == kFiveClusterCount && visited == kFiveClusterCount &&
                     distinct.size() == kFiveClusterCount,
                 "3", "ten agents admit 42525 five-cluster partitions");
}

void criterion_irka(Gate &gate, const Census &census)
{
  const double best = census.h2.front().relative_error;
  const StableDecomposition &d = census.eval.decomposition();
  bool bound_ok = true;
  bool band_ok = false;
  for (std::size_t seed = 0; seed < kSeeds; ++seed)
  {
    IrkaOptions opts;
    opts.seed = seed;
    const ProjectionBasis basis = irka(d.stable, 5, opts);
    const double rel = h2_error(d.stable, project(d.stable, basis.v, basis.w)).relative;
    const bool in_band = std::abs(rel - kIrkaTarget) <= kIrkaBand * kIrkaTarget;
    const bool bounded = rel <= kIrkaFactor * best;
    bound_ok = bound_ok && bounded;
    if (seed == 0)
    {
      band_ok = in_band;
    }
    gate.detail("seed %zu: relative H2 %.6e, %.2fx better than the best partition, %s, %zu iterations",
                seed, rel, best / rel, in_band ? "within 2%" : "outside 2%", basis.iterations);
  }
  gate.criterion(band_ok && bound_ok, "4", "IRKA order 5 error and ratio to the best partition");
}

struct PipelineRun
{
  Partition partition;
  double h2 = 0.0;
  std::optional<std::size_t> h2_rank;
  std::optional<std::size_t> hinf_rank;
  Matrix features;
};

PipelineRun run_pipeline(const LinearMas &sys, const Census &census, MorMethod mor, BasisSource src,
                         ClusterAlgo algo, std::uint64_t seed, std::size_t workers)
{
  PipelineOptions opts;
  opts.mor = mor;
  opts.source = src;
  opts.algo = algo;
  opts.seed = seed;
  opts.workers = workers;
  opts.h2_table = &census.h2;
  opts.hinf_table = &census.hinf;
  const PipelineResult res = heuristic_pipeline(sys, opts);
  return {res.partition, res.h2.relative, res.h2_rank, res.hinf_rank, res.features};
}

std::string rank_text(const std::optional<std::size_t> &r)
{
  return r ? std::to_string(*r) : std::string(">table");
}

void criterion_pipelines(Gate &gate, const LinearMas &sys, const Census &census,
                         std::size_t workers, std::vector<PipelineRun> &instances)
{
  using Check = std::function<bool(const PipelineRun &)>;
  struct Case
  {
    const char *name;
    BasisSource src;
    ClusterAlgo algo;
    Check check;
  };
  const Partition vqr = parse_partition(kVqrPartition, 10);
  const Partition vkm = parse_partition(kVkmPartition, 10);
  const std::vector<Case> cases = {
      {"(irka,v,qr) rank-14 partition, 0.150654", BasisSource::v, ClusterAlgo::qr,
       [&](const PipelineRun &r) {
         return r.partition == vqr && std::abs(r.h2 - kVqrError) <= kVqrTol;
       }},
      {"(irka,v,kmeans) rank-6 partition, 0.1459", BasisSource::v, ClusterAlgo::kmeans,
       [&](const PipelineRun &r) {
         return r.partition == vkm && std::abs(r.h2 - kVkmError) <= kKmTol;
       }},
      {"(irka,w,kmeans) error 0.156788", BasisSource::w, ClusterAlgo::kmeans,
       [&](const PipelineRun &r) { return std::abs(r.h2 - kWkmError) <= kKmTol; }},
      {"(irka,vw,kmeans) H2 rank 2 and H-infinity rank 6", BasisSource::vw, ClusterAlgo::kmeans,
       [&](const PipelineRun &r) { return r.h2_rank == 2u && r.hinf_rank == 6u; }},
  };

  // IRKA runs for every source, algorithm and seed.
  std::map<std::pair<int, int>, std::vector<PipelineRun>> irka_runs;
  for (auto src : {BasisSource::v, BasisSource::w, BasisSource::vw})
  {
    for (auto algo : {ClusterAlgo::qr, ClusterAlgo::kmeans})
    {
      auto &runs = irka_runs[{static_cast<int>(src), static_cast<int>(algo)}];
      for (std::size_t seed = 0; seed < kSeeds; ++seed)
      {
        runs.push_back(run_pipeline(sys, census, MorMethod::irka, src, algo, seed, workers));
        instances.push_back(runs.back());
      }
    }
  }

  bool all_ok = true;
  std::size_t passed = 0;
  std::size_t total = 0;
  for (const auto &c : cases)
  {
    const auto &runs = irka_runs[{static_cast<int>(c.src), static_cast<int>(c.algo)}];
    std::size_t hits = 0;
    std::string seeds;
    for (std::size_t s = 0; s < runs.size(); ++s)
    {
      if (c.check(runs[s]))
      {
        ++hits;
        seeds += std::to_string(s);
      }
    }
    const bool ok = hits >= kSeedsRequired;
    all_ok = all_ok && ok;
    passed += ok ? 1 : 0;
    ++total;
    const PipelineRun &r0 = runs.front();
    gate.detail("%s %s: %zu/%zu seeds; seed 0 gives %s, H2 %.6f, H2 rank %s, H-inf rank %s",
                ok ? "ok  " : "miss", c.name, hits, kSeeds, r0.partition.to_string().c_str(), r0.h2,
                rank_text(r0.h2_rank).c_str(), rank_text(r0.hinf_rank).c_str());
  }

  for (auto src : {BasisSource::v, BasisSource::w, BasisSource::vw})
  {
    for (auto algo : {ClusterAlgo::qr, ClusterAlgo::kmeans})
    {
      const auto &runs = irka_runs[{static_cast<int>(src), static_cast<int>(algo)}];
      const PipelineRun bt = run_pipeline(sys, census, MorMethod::bt, src, algo, 0, workers);
      instances.push_back(bt);
      std::size_t hits = 0;
      for (const auto &r : runs)
      {
        hits += r.partition == bt.partition ? 1 : 0;
      }
      const bool ok = hits >= kSeedsRequired;
      all_ok = all_ok && ok;
      passed += ok ? 1 : 0;
      ++total;
      gate.detail("%s (bt,%s,%s) matches IRKA on %zu/%zu seeds; bt gives %s, irka seed 0 gives %s",
                  ok ? "ok  " : "miss", to_string(src).c_str(), to_string(algo).c_str(), hits,
                  kSeeds, bt.partition.to_string().c_str(),
                  runs.front().partition.to_string().c_str());
    }
  }
  gate.detail("%zu of %zu sub-checks met", passed, total);
  gate.criterion(all_ok, "5", "heuristic pipelines recover the listed partitions");
}

void criterion_kmeans_identity(Gate &gate, const std::vector<PipelineRun> &instances)
{
  Rng rng(2024);
  double worst_identity = 0.0;
  double worst_angle = -std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  auto check = [&](const Matrix &v, const Partition &p) {
    const ProjectionBound pb = kmeans_cost_equals_projection_bound(v, p);
    const double cost = kmeans_cost(v, p);
    const Matrix chi = characteristic_matrix(p);
    const Matrix proj = chi * (chi.transpose() * chi).inverse() * chi.transpose();
    const double oracle = (v - proj * v).squaredNorm();
    const double scale = std::max(1.0, oracle);
    worst_identity = std::max({worst_identity, std::abs(cost - oracle) / scale,
                               std::abs(pb.frobenius_bound - oracle) / scale,
                               std::abs(pb.cost - oracle) / scale});
    const double s = principal_angle_sin(v, chi);
    worst_angle = std::max(worst_angle, s * s - cost);
    ++checked;
  };
  for (int trial = 0; trial < 200; ++trial)
  {
    const std::size_t n = 4 + static_cast<std::size_t>(trial % 12);
    std::uniform_int_distribution<std::size_t> pick_r(2, n);
    const std::size_t r = pick_r(rng);
    std::uniform_int_distribution<std::size_t> pick_k(1, r);
    const Eigen::Index k = static_cast<Eigen::Index>(pick_k(rng));
    const Matrix v = orthonormalize(random_matrix(rng, static_cast<Eigen::Index>(n), k));
    check(v, random_partition(rng, n, r));
  }
  for (const auto &inst : instances)
  {
    check(inst.features, inst.partition);
    for (const auto &row : kTableH2)
    {
      check(inst.features, parse_partition(row.partition, 10));
    }
  }
  gate.detail("%zu pairs; worst identity residual %.2e (limit %.0e); worst sin^2 - cost %.2e",
              checked, worst_identity, kIdentityTol, worst_angle);
  gate.criterion(worst_identity <= kIdentityTol && worst_angle <= 1e-12, "6",
                 "k-means cost equals the projection residual and bounds sin^2 of the angle");
}

AgentCallbacks skewed_agent()
{
  AgentCallbacks cb;
  cb.order = 2;
  cb.inputs = 2;
  cb.outputs = 1;
  cb.drift = [](ConstVectorRef x, VectorRef out) {
    out(0) = x(1);
    out(1) = std::sin(x(0)) - x(1) * x(1) * x(1);
  };
  cb.input_gain = [](ConstVectorRef x, MatrixRef out) {
    out(0, 0) = 1.0 + x(0) * x(0);
    out(0, 1) = 0.0;
    out(1, 0) = x(1);
    out(1, 1) = 1.0;
  };
  cb.output = [](ConstVectorRef x, VectorRef out) { out(0) = x(0) * x(1) + x(0); };
  cb.coupling = [](ConstVectorRef zi, ConstVectorRef zj, VectorRef out) {
    out(0) = std::tanh(zj(0) - zi(0));
    out(1) = 0.1 * zi(0) * zj(0) + zj(0) * zj(0);
  };
  return cb;
}

bool laplacian_ok(const Matrix &l)
{
  const double scale = std::max(1.0, l.norm());
  if ((l - l.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale ||
      l.rowwise().sum().cwiseAbs().maxCoeff() > 1e-12 * scale)
  {
    return false;
  }
  for (Eigen::Index i = 0; i < l.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < l.cols(); ++j)
    {
      if (i != j && l(i, j) > 0.0)
      {
        return false;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  return es.eigenvalues()(0) >= -1e-10 * scale;
}

/// Residual of a projected operator relative to the norm of the projection.
double scaled_residual(const Matrix &projected, const Matrix &reduced, double scale)
{
  const double diff = (projected - reduced).norm();
  return scale == 0.0 ? diff : diff / scale;
}

void criterion_structure(Gate &gate, const LinearMas &small)
{
  Rng rng(7);
  double worst_linear = 0.0;
  double worst_nonlinear = 0.0;
  std::size_t bad_laplacians = 0;
  std::size_t reduced = 0;
  for (int trial = 0; trial < 100; ++trial)
  {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 14);
    const std::size_t order = 1 + static_cast<std::size_t>(trial % 3);
    const LinearMas sys = random_linear_mas(rng, n, order, trial % 4 != 0);
    std::uniform_int_distribution<std::size_t> pick(1, n);
    const Partition p = random_partition(rng, n, pick(rng));
    const LinearMas red = cluster_reduce(sys, p);
    const LtiSystem full = realize(sys);
    const LtiSystem lti = realize(red);
    const auto no = static_cast<Eigen::Index>(order);
    const Matrix pi = kron(characteristic_matrix(p), Matrix::Identity(no, no));
    const double pn = pi.norm();
    worst_linear = std::max(
        {worst_linear, scaled_residual(pi.transpose() * full.e * pi, lti.e, pn * pn * full.e.norm()),
         scaled_residual(pi.transpose() * full.a * pi, lti.a, pn * pn * full.a.norm()),
         scaled_residual(pi.transpose() * full.b, lti.b, pn * full.b.norm()),
         scaled_residual(full.c * pi, lti.c, pn * full.c.norm())});
    bad_laplacians += laplacian_ok(laplacian_matrix(red.graph)) && is_connected(red.graph) ? 0 : 1;
    ++reduced;

    NonlinearMas nl;
    nl.graph = sys.graph;
    nl.inertias = sys.inertias;
    nl.input = sys.input;
    nl.output = sys.output;
    nl.agent = skewed_agent();
    nl.self_weights = random_positive(rng, static_cast<Eigen::Index>(n), 0.0, 0.5);
    const NonlinearMas nred = cluster_reduce_nonlinear(nl, p);
    const Matrix pi2 = kron(characteristic_matrix(p), Matrix::Identity(2, 2));
    const Vector xr = random_vector(rng, static_cast<Eigen::Index>(nred.state_dim()));
    const Vector u = random_vector(rng, static_cast<Eigen::Index>(nl.input_dim()));
    const Vector f = rhs(nl, pi2 * xr, u);
    worst_nonlinear = std::max(worst_nonlinear, scaled_residual(pi2.transpose() * f, rhs(nred, xr, u),
                                                                pi2.norm() * f.norm()));
  }

  const StableDecomposition full = decompose_mas(small);
  double worst_residue = 0.0;
  std::size_t clustered = 0;
  for (std::size_t r = 1; r <= 10; ++r)
  {
    const PartitionEnumerator en(10, r);
    // Every partition for r = 5, an evenly spaced sample of at most 2000 otherwise.
    const std::uint64_t stride = r == 5 ? 1 : std::max<std::uint64_t>(1, en.size() / 2000);
    for (std::uint64_t idx = 0; idx < en.size(); idx += stride)
    {
      const Partition p = partition_from_labels(en.unrank(idx));
      const LinearMas red = cluster_reduce(small, p);
      const StableDecomposition rd = decompose_mas(red);
      const double diff = (rd.consensus_residue - full.consensus_residue).norm() /
                          std::max(1.0, full.consensus_residue.norm());
      worst_residue = std::max(worst_residue, diff);
      bad_laplacians += laplacian_ok(laplacian_matrix(red.graph)) ? 0 : 1;
      ++clustered;
    }
  }
  gate.detail("linear Galerkin identity: worst relative residual %.2e over 100 systems",
              worst_linear);
  gate.detail("nonlinear Galerkin identity: worst relative residual %.2e over 100 systems",
              worst_nonlinear);
  gate.detail("reduced Laplacians failing invariants: %zu of %zu", bad_laplacians,
              reduced + clustered);
  gate.detail("consensus residue: worst mismatch %.2e over %zu clustered models", worst_residue,
              clustered);
  gate.criterion(worst_linear <= kGalerkinTol && worst_nonlinear <= kGalerkinTol &&
                     bad_laplacians == 0 && worst_residue <= kResidueTol,
                 "7", "clustering preserves structure and the consensus part");
}

void criterion_vanderpol(Gate &gate, std::size_t workers)
{
  const auto start = std::chrono::steady_clock::now();
  const NonlinearMas sys = to_nonlinear(read_system_file(data_path("vanderpol.sys")));
  const PodStudy study(sys);
  double max1 = 0.0;
  double max2 = 0.0;
  for (const auto &x : study.training().states)
  {
    for (Eigen::Index i = 0; i < x.size(); i += 2)
    {
      max1 = std::max(max1, std::abs(x(i)));
      max2 = std::max(max2, std::abs(x(i + 1)));
    }
  }
  const PodStudyResult ten = study.evaluate(10);
  const std::vector<std::size_t> counts = {2, 5, 10, 20, 30, 40, 50};
  const auto sweep = study.sweep(counts, workers);
  std::size_t inversions = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::string errors;
  for (std::size_t i = 0; i < sweep.size(); ++i)
  {
    if (i > 0 && sweep[i].l2_relative >= sweep[i - 1].l2_relative)
    {
      ++inversions;
    }
    lo = std::min(lo, sweep[i].l2_relative);
    hi = std::max(hi, sweep[i].l2_relative);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%zu:%.3g", i ? " " : "", counts[i], sweep[i].l2_relative);
    errors += buf;
  }
  const double elapsed = seconds_since(start);
  const bool bounded = max1 <= kVdpBound1 && max2 <= kVdpBound2;
  const bool pointwise = ten.max_pointwise <= kVdpPointwise;
  const bool decay = inversions <= 1 && hi / lo >= kVdpSpan;
  gate.detail("training: %zu snapshots, max |x1| %.4f (limit %.1f), max |x2| %.4f (limit %.1f)",
              study.training().times.size(), max1, kVdpBound1, max2, kVdpBound2);
  gate.detail("10 clusters: max pointwise error %.4f (limit %.2f), relative L2 %.4g",
              ten.max_pointwise, kVdpPointwise, ten.l2_relative);
  gate.detail("relative L2 by cluster count: %s", errors.c_str());
  gate.detail("inversions %zu (limit 1), span %.3g (needs %.0f), runtime %.1f s", inversions,
              hi / lo, kVdpSpan, elapsed);
  gate.criterion(bounded && pointwise && decay && elapsed < kVdpSeconds, "8",
                 "oscillator network POD clustering experiment");
}

void criterion_numerics(Gate &gate)
{
  Rng rng(99);
  double lyap = 0.0;
  for (int trial = 0; trial < 30; ++trial)
  {
    const LtiSystem sys = random_stable_lti(rng, 2 + trial % 20, 2, 2, trial % 2 == 1);
    const Matrix x = solve_gen_lyapunov(sys.a, sys.e, sys.b);
    const Matrix q = sys.b * sys.b.transpose();
    const Matrix res = sys.a * x * sys.e.transpose() + sys.e * x * sys.a.transpose() + q;
    lyap = std::max(lyap, res.norm() / std::max(1.0, q.norm()));
  }
  double factor = 0.0;
  for (int trial = 0; trial < 30; ++trial)
  {
    const Matrix a = random_matrix(rng, 3 + trial % 15, 2 + (trial * 7) % 13);
    const PivotedQr qr = qr_column_pivot(a);
    Matrix permuted(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
    {
      permuted.col(j) = a.col(static_cast<Eigen::Index>(qr.pivots[static_cast<std::size_t>(j)]));
    }
    const Svd s = svd(a);
    const double scale = std::max(1.0, a.norm());
    factor = std::max({factor, (qr.q * qr.r - permuted).norm() / scale,
                       (s.u * s.sigma.asDiagonal() * s.v.transpose() - a).norm() / scale});
  }
  double ode = 0.0;
  for (int trial = 0; trial < 10; ++trial)
  {
    const Eigen::Index n = 2 + trial % 8;
    Matrix a = random_hurwitz(rng, n, 0.1);
    a(0, 0) -= trial % 2 == 0 ? 300.0 : 0.0;
    const Vector x0 = random_vector(rng, n);
    OdeProblem prob;
    prob.rhs = [a](double, const Vector &x, Vector &dx) { dx = a * x; };
    prob.jacobian = [a](double, const Vector &, Matrix &jac) { jac = a; };
    prob.x0 = x0;
    prob.t1 = 4.0;
    OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-12;
    opts.sample_times = linspace(0.0, 4.0, 9);
    const OdeSolution sol = integrate_ode(prob, opts);
    for (std::size_t k = 0; k < sol.times.size(); ++k)
    {
      const Vector exact = (a * sol.times[k]).exp() * x0;
      ode = std::max(ode, (sol.states[k] - exact).cwiseAbs().maxCoeff());
    }
  }
  double hermite = 0.0;
  std::size_t converged = 0;
  for (int trial = 0; trial < 10; ++trial)
  {
    const LtiSystem sys = random_stable_lti(rng, 10, 1, 1, trial % 2 == 1);
    IrkaOptions opts;
    opts.seed = static_cast<std::uint64_t>(trial);
    opts.tol = 1e-10;
    opts.max_iter = 500;
    const ProjectionBasis basis = irka(sys, 2 + static_cast<std::size_t>(trial % 3), opts);
    if (!basis.converged)
    {
      continue;
    }
    ++converged;
    const LtiSystem red = project(sys, basis.v, basis.w);
    for (Eigen::Index i = 0; i < basis.shifts.size(); ++i)
    {
      const Complex s = basis.shifts(i);
      const ComplexMatrix h = transfer(sys, s);
      const ComplexMatrix dh = transfer_derivative(sys, s);
      hermite = std::max({hermite, (h - transfer(red, s)).norm() / h.norm(),
                          (dh - transfer_derivative(red, s)).norm() / dh.norm()});
    }
  }
  gate.detail("Lyapunov residual %.2e (limit %.0e)", lyap, kLyapTol);
  gate.detail("QR/SVD reconstruction %.2e (limit %.0e)", factor, kFactorTol);
  gate.detail("ODE vs matrix exponential %.2e (limit %.0e)", ode, kOdeTol);
  gate.detail("IRKA Hermite interpolation %.2e on %zu converged instances (limit %.0e)", hermite,
              converged, kHermiteTol);
  gate.criterion(lyap <= kLyapTol && factor <= kFactorTol && ode <= kOdeTol &&
                     hermite <= kHermiteTol && converged >= 5,
                 "9", "numerics oracle suite");
}

}  // namespace

int main()
{
  const std::size_t workers = default_worker_count();
  Gate gate;
  const LinearMas sys = small_network();
  Census census{ErrorEvaluator(sys), {}, {}, 0.0, 0.0};

  criterion_tables(gate, census, workers);
  criterion_count(gate);
  criterion_irka(gate, census);
  std::vector<PipelineRun> instances;
  criterion_pipelines(gate, sys, census, workers, instances);
  criterion_kmeans_identity(gate, instances);
  criterion_structure(gate, sys);
  criterion_vanderpol(gate, workers);
  criterion_numerics(gate);

  std::printf("%d of 9 criteria failed\n", gate.failures());
  return gate.failures() == 0 ? 0 : 1;
}
