// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>
#include <utility>

#include "netred/error.hpp"
#include "parallel.hpp"

namespace netred
{

Metric parse_metric(const std::string &name)
{
  if (name == "h2")
  {
    return Metric::h2;
  }
  if (name == "hinf")
  {
    return Metric::hinf;
  }
  throw InvalidArgument("unknown metric '" + name + "' (expected h2 or hinf)");
}

std::string to_string(Metric m) { return m == Metric::h2 ? "h2" : "hinf"; }

ErrorEvaluator::ErrorEvaluator(const LinearMas &sys, std::size_t coarse_points)
  : sys_(sys)
{
  sys_.validate();
  const SyncReport rep = is_synchronized(sys_);
  if (!rep.synchronized)
  {
    throw NotHurwitz("ErrorEvaluator: system is not synchronized", rep.max_real_part, 0.0);
  }
  split_ = split_agent(sys_.agent);
  net_ = network_data(sys_);
  full_ = decompose_network(net_, sys_.agent, split_);
  h2_norm_ = netred::h2_norm(full_.stable);
  hinf_norm_ = netred::hinf_norm(full_.stable).value;

  const HinfOptions defaults;
  omegas_.push_back(0.0);
  const double lo = std::log10(defaults.omega_min);
  const double hi = std::log10(defaults.omega_max);
  for (std::size_t k = 0; k < coarse_points; ++k)
  {
    const double t = coarse_points > 1 ? static_cast<double>(k) / static_cast<double>(coarse_points - 1) : 0.0;
    omegas_.push_back(std::pow(10.0, lo + t * (hi - lo)));
  }
  full_response_.reserve(omegas_.size());
  for (double w : omegas_)
  {
    full_response_.push_back(transfer(full_.stable, Complex(0.0, w)));
  }
}

StableDecomposition ErrorEvaluator::reduced(const Partition &p) const
{
  if (p.n_vertices() != sys_.n_agents())
  {
    throw InvalidArgument("ErrorEvaluator: partition size does not match the network");
  }
  const Matrix pm = characteristic_matrix(p);
  NetworkData red;
  red.inertias = pm.transpose() * net_.inertias;
  red.laplacian = pm.transpose() * net_.laplacian * pm;
  red.input = pm.transpose() * net_.input;
  red.output = net_.output * pm;
  StableDecomposition d = decompose_network(red, sys_.agent, split_);
  require_same_unstable_part(full_, d, sys_.agent, sys_.agent);
  return d;
}

double ErrorEvaluator::h2_relative(const Partition &p) const
{
  const LtiSystem red = reduced(p).stable;
  if (identical_realizations(full_.stable, red))
  {
    return 0.0;
  }
  const double err = netred::h2_norm(error_system(full_.stable, red));
  return h2_norm_ > 0.0 ? err / h2_norm_ : err;
}

double ErrorEvaluator::hinf_relative(const Partition &p) const
{
  const LtiSystem red = reduced(p).stable;
  if (identical_realizations(full_.stable, red))
  {
    return 0.0;
  }
  const LtiSystem err = error_system(full_.stable, red);
  if (err.a.rows() > 0 && spectral_abscissa(err.a, err.e) >= kHurwitzThreshold)
  {
    throw NotHurwitz("hinf_relative: error system is not asymptotically stable",
                     spectral_abscissa(err.a, err.e), 0.0);
  }
  const double value = netred::hinf_norm(err).value;
  return hinf_norm_ > 0.0 ? value / hinf_norm_ : value;
}

double ErrorEvaluator::hinf_relative_coarse(const Partition &p) const
{
  const LtiSystem red = reduced(p).stable;
  double best = 0.0;
  for (std::size_t k = 0; k < omegas_.size(); ++k)
  {
    const ComplexMatrix diff = full_response_[k] - transfer(red, Complex(0.0, omegas_[k]));
    best = std::max(best, sigma_max(diff));
  }
  return hinf_norm_ > 0.0 ? best / hinf_norm_ : best;
}

namespace
{

struct Scored
{
  double error;
  std::uint64_t index;
};

// Errors agreeing to 12 decimals count as ties and fall back to enumeration order.
bool scored_less(const Scored &a, const Scored &b)
{
  const long long ka = std::llround(a.error * 1e12);
  const long long kb = std::llround(b.error * 1e12);
  return std::tie(ka, a.index) < std::tie(kb, b.index);
}

void keep_best(std::vector<Scored> &v, std::size_t k)
{
  if (v.size() > k)
  {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), scored_less);
    v.resize(k);
  }
  std::sort(v.begin(), v.end(), scored_less);
}

std::string checkpoint_header(const ErrorEvaluator &eval, std::size_t r, Metric metric,
                              std::uint64_t chunk)
{
  std::ostringstream os;
  os << "netred-checkpoint n=" << eval.system().n_agents() << " r=" << r
     << " metric=" << to_string(metric) << " chunk=" << chunk;
  return os.str();
}

// Completed chunks from an existing checkpoint whose header matches.
std::map<std::size_t, std::vector<Scored>> load_checkpoint(const std::string &path,
                                                           const std::string &header)
{
  std::map<std::size_t, std::vector<Scored>> done;
  std::ifstream in(path);
  if (!in)
  {
    return done;
  }
  std::string line;
  if (!std::getline(in, line) || line != header)
  {
    throw InvalidArgument("checkpoint '" + path + "' belongs to a different search");
  }
  while (std::getline(in, line))
  {
    std::istringstream ls(line);
    std::string tag;
    std::size_t id = 0;
    std::size_t count = 0;
    if (!(ls >> tag >> id >> count) || tag != "chunk")
    {
      break;
    }
    std::vector<Scored> items;
    bool complete = true;
    for (std::size_t i = 0; i < count; ++i)
    {
      Scored s{};
      if (!std::getline(in, line) || !(std::istringstream(line) >> s.index >> s.error))
      {
        complete = false;
        break;
      }
      items.push_back(s);
    }
    if (!complete)
    {
      break;
    }
    done[id] = std::move(items);
  }
  return done;
}

}  // namespace

std::vector<RankedPartition> rank_all_partitions(const LinearMas &sys, std::size_t r, Metric metric,
                                                 const SearchOptions &opts)
{
  if (r == 0 || r > sys.n_agents())
  {
    throw InvalidArgument("rank_all_partitions: cluster count must satisfy 1 <= r <= n");
  }
  const std::uint64_t total = count_partitions(sys.n_agents(), r);
  if (total > opts.budget)
  {
    throw BudgetExceeded("rank_all_partitions: " + std::to_string(total) +
                         " partitions exceed the budget of " + std::to_string(opts.budget) +
                         "; use the heuristic pipeline (cluster) instead");
  }
  const ErrorEvaluator eval(sys);
  return rank_all_partitions(eval, r, metric, opts);
}

std::vector<RankedPartition> rank_all_partitions(const ErrorEvaluator &eval, std::size_t r,
                                                 Metric metric, const SearchOptions &opts)
{
  const std::size_t n = eval.system().n_agents();
  if (r == 0 || r > n)
  {
    throw InvalidArgument("rank_all_partitions: cluster count must satisfy 1 <= r <= n");
  }
  const PartitionEnumerator en(n, r);
  const std::uint64_t total = en.size();
  if (total > opts.budget)
  {
    throw BudgetExceeded("rank_all_partitions: " + std::to_string(total) +
                         " partitions exceed the budget of " + std::to_string(opts.budget) +
                         "; use the heuristic pipeline (cluster) instead");
  }
  if (opts.top_k == 0)
  {
    return {};
  }
  const std::uint64_t chunk = std::max<std::uint64_t>(1, opts.chunk_size);
  const auto n_chunks = static_cast<std::size_t>((total + chunk - 1) / chunk);
  const std::size_t keep =
      metric == Metric::hinf ? std::max(opts.top_k, opts.refine_top) : opts.top_k;

  std::vector<std::vector<Scored>> results(n_chunks);
  std::vector<bool> have(n_chunks, false);
  std::ofstream ckpt;
  if (!opts.checkpoint.empty())
  {
    const std::string header = checkpoint_header(eval, r, metric, chunk);
    auto done = load_checkpoint(opts.checkpoint, header);
    for (auto &[id, items] : done)
    {
      if (id < n_chunks)
      {
        results[id] = std::move(items);
        have[id] = true;
      }
    }
    // Rewrite the file with the valid prefix so partial records never survive.
    ckpt.open(opts.checkpoint, std::ios::trunc);
    if (!ckpt)
    {
      throw InvalidArgument("cannot write checkpoint '" + opts.checkpoint + "'");
    }
    ckpt << header << '\n';
    for (std::size_t id = 0; id < n_chunks; ++id)
    {
      if (have[id])
      {
        ckpt << "chunk " << id << ' ' << results[id].size() << '\n';
        char buf[64];
        for (const auto &s : results[id])
        {
          std::snprintf(buf, sizeof buf, "%.17g", s.error);
          ckpt << s.index << ' ' << buf << '\n';
        }
      }
    }
    ckpt.flush();
  }

  std::vector<std::size_t> todo;
  for (std::size_t id = 0; id < n_chunks; ++id)
  {
    if (!have[id])
    {
      todo.push_back(id);
    }
  }
  std::mutex mutex;
  SearchProgress prog;
  prog.chunks_total = n_chunks;
  prog.chunks_done = n_chunks - todo.size();
  prog.evaluated = 0;

  detail::parallel_for(todo.size(), opts.workers, [&](std::size_t t) {
    const std::size_t id = todo[t];
    const std::uint64_t begin = id * chunk;
    const std::uint64_t end = std::min(total, begin + chunk);
    std::vector<Scored> local;
    local.reserve(static_cast<std::size_t>(end - begin));
    en.for_each(begin, end, [&](std::uint64_t index, const std::vector<std::size_t> &rgs) {
      const Partition p = partition_from_labels(rgs);
      const double err = metric == Metric::h2 ? eval.h2_relative(p) : eval.hinf_relative_coarse(p);
      local.push_back({err, index});
    });
    keep_best(local, keep);
    std::lock_guard<std::mutex> lock(mutex);
    results[id] = std::move(local);
    if (ckpt.is_open())
    {
      ckpt << "chunk " << id << ' ' << results[id].size() << '\n';
      char buf[64];
      for (const auto &s : results[id])
      {
        std::snprintf(buf, sizeof buf, "%.17g", s.error);
        ckpt << s.index << ' ' << buf << '\n';
      }
      ckpt.flush();
    }
    ++prog.chunks_done;
    prog.evaluated += end - begin;
    if (opts.progress)
    {
      opts.progress(prog);
    }
  });

  std::vector<Scored> merged;
  for (auto &chunk_items : results)
  {
    merged.insert(merged.end(), chunk_items.begin(), chunk_items.end());
  }
  keep_best(merged, keep);

  if (metric == Metric::hinf)
  {
    detail::parallel_for(merged.size(), opts.workers, [&](std::size_t i) {
      merged[i].error = eval.hinf_relative(partition_from_labels(en.unrank(merged[i].index)));
    });
    keep_best(merged, opts.top_k);
  }
  else
  {
    keep_best(merged, opts.top_k);
  }

  std::vector<RankedPartition> out;
  out.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i)
  {
    RankedPartition rp;
    rp.rank = i + 1;
    rp.metric = metric;
    rp.relative_error = merged[i].error;
    rp.partition = partition_from_labels(en.unrank(merged[i].index));
    rp.index = merged[i].index;
    out.push_back(std::move(rp));
  }
  return out;
}

std::optional<std::size_t> rank_of(const std::vector<RankedPartition> &table, const Partition &p)
{
  for (const auto &row : table)
  {
    if (row.partition == p)
    {
      return row.rank;
    }
  }
  return std::nullopt;
}

std::size_t default_worker_count()
{
  if (const char *env = std::getenv("NETRED_WORKERS"))
  {
    char *end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0)
    {
      return static_cast<std::size_t>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MorMethod parse_mor_method(const std::string &name)
{
  if (name == "irka")
  {
    return MorMethod::irka;
  }
  if (name == "bt")
  {
    return MorMethod::bt;
  }
  if (name == "pod")
  {
    return MorMethod::pod;
  }
  throw InvalidArgument("unknown MOR method '" + name + "' (expected irka, bt or pod)");
}

BasisSource parse_basis_source(const std::string &name)
{
  if (name == "v")
  {
    return BasisSource::v;
  }
  if (name == "w")
  {
    return BasisSource::w;
  }
  if (name == "vw")
  {
    return BasisSource::vw;
  }
  throw InvalidArgument("unknown basis source '" + name + "' (expected v, w or vw)");
}

ClusterAlgo parse_cluster_algo(const std::string &name)
{
  if (name == "qr")
  {
    return ClusterAlgo::qr;
  }
  if (name == "kmeans")
  {
    return ClusterAlgo::kmeans;
  }
  throw InvalidArgument("unknown clustering algorithm '" + name + "' (expected qr or kmeans)");
}

std::string to_string(MorMethod m)
{
  switch (m)
  {
  case MorMethod::irka:
    return "irka";
  case MorMethod::bt:
    return "bt";
  case MorMethod::pod:
    return "pod";
  }
  return "";
}

std::string to_string(BasisSource s)
{
  switch (s)
  {
  case BasisSource::v:
    return "v";
  case BasisSource::w:
    return "w";
  case BasisSource::vw:
    return "vw";
  }
  return "";
}

std::string to_string(ClusterAlgo a) { return a == ClusterAlgo::qr ? "qr" : "kmeans"; }

Matrix pipeline_features(const StableDecomposition &decomp, const ProjectionBasis &basis,
                         BasisSource source, std::size_t agent_order)
{
  const auto rp = static_cast<std::size_t>(basis.v.cols());
  switch (source)
  {
  case BasisSource::v:
    return feature_rows(orthonormalize(decomp.t_minus * basis.v), agent_order);
  case BasisSource::w:
    return feature_rows(orthonormalize(decomp.s_minus * basis.w), agent_order);
  case BasisSource::vw:
    return feature_rows(combined_basis(orthonormalize(decomp.t_minus * basis.v),
                                       orthonormalize(decomp.s_minus * basis.w), rp),
                        agent_order);
  }
  throw InvalidArgument("pipeline_features: unknown basis source");
}

PipelineResult heuristic_pipeline(const LinearMas &sys, const PipelineOptions &opts)
{
  if (opts.mor == MorMethod::pod)
  {
    throw InvalidCombination("pod requires a nonlinear system with simulated snapshots");
  }
  if (opts.clusters == 0 || opts.clusters > sys.n_agents())
  {
    throw InvalidArgument("heuristic_pipeline: cluster count must satisfy 1 <= r <= n");
  }
  if (opts.algo == ClusterAlgo::qr && opts.clusters != opts.order)
  {
    throw InvalidCombination("qr clustering requires --clusters equal to --order (r = r_P)");
  }
  const StableDecomposition decomp = decompose_mas(sys);
  PipelineResult out;
  if (opts.mor == MorMethod::irka)
  {
    IrkaOptions io = opts.irka;
    io.seed = opts.seed;
    out.basis = irka(decomp.stable, opts.order, io);
  }
  else
  {
    out.basis = balanced_truncation(decomp.stable, opts.order);
  }
  out.mor_h2_relative =
      h2_error(decomp.stable, project(decomp.stable, out.basis.v, out.basis.w)).relative;
  out.features = pipeline_features(decomp, out.basis, opts.source, sys.agent.order());
  if (opts.algo == ClusterAlgo::qr)
  {
    out.partition = qr_cluster(out.features, opts.clusters);
  }
  else
  {
    KMeansOptions ko;
    ko.n_init = opts.n_init;
    ko.seed = opts.seed;
    ko.workers = opts.workers;
    out.partition = kmeans_cluster(out.features, opts.clusters, ko).first;
  }
  const LinearMas red = cluster_reduce(sys, out.partition);
  out.h2 = h2_error(sys, red);
  out.hinf = hinf_error(sys, red);
  if (opts.h2_table != nullptr)
  {
    out.h2_rank = rank_of(*opts.h2_table, out.partition);
  }
  if (opts.hinf_table != nullptr)
  {
    out.hinf_rank = rank_of(*opts.hinf_table, out.partition);
  }
  return out;
}

PodStudy::PodStudy(NonlinearMas sys, PodStudyOptions opts)
  : sys_(std::move(sys)), opts_(std::move(opts))
{
  sys_.validate();
  if (!opts_.train)
  {
    opts_.train = training_input(static_cast<std::size_t>(sys_.input_dim()));
  }
  if (!opts_.test)
  {
    opts_.test = test_input(static_cast<std::size_t>(sys_.input_dim()));
  }
  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(sys_.state_dim()));
  training_ = simulate(sys_, x0, opts_.train, opts_.t0, opts_.t1, {}, opts_.ode);
  basis_ = pod(training_.state_matrix(), opts_.modes, sys_.agent.order);
  features_ = feature_rows(basis_.v, sys_.agent.order);
  grid_ = linspace(opts_.t0, opts_.t1, opts_.samples);
  reference_ = simulate(sys_, x0, opts_.test, opts_.t0, opts_.t1, grid_, opts_.ode);
}

PodStudyResult PodStudy::evaluate(std::size_t clusters) const
{
  KMeansOptions ko;
  ko.n_init = opts_.n_init;
  ko.seed = opts_.seed;
  auto [p, km] = kmeans_cluster(features_, clusters, ko);
  PodStudyResult out = evaluate_partition(p);
  out.kmeans = std::move(km);
  return out;
}

PodStudyResult PodStudy::evaluate_partition(const Partition &p) const
{
  PodStudyResult out;
  out.clusters = p.n_clusters();
  out.partition = p;
  const NonlinearMas red = cluster_reduce_nonlinear(sys_, p);
  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(red.state_dim()));
  const OdeSolution sol = simulate(red, x0, opts_.test, opts_.t0, opts_.t1, grid_, opts_.ode);
  const TrajectoryError err = trajectory_error(reference_, sol, p, sys_.agent.order);
  out.l2_relative = err.l2_relative;
  out.max_pointwise = err.max_pointwise;
  return out;
}

std::vector<PodStudyResult> PodStudy::sweep(const std::vector<std::size_t> &clusters,
                                            std::size_t workers) const
{
  std::vector<PodStudyResult> out(clusters.size());
  detail::parallel_for(clusters.size(), workers,
                       [&](std::size_t i) { out[i] = evaluate(clusters[i]); });
  return out;
}

}  // namespace netred
