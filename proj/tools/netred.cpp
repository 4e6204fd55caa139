// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netred/error.hpp"
#include "netred/graph.hpp"
#include "netred/io.hpp"
#include "netred/linalg.hpp"
#include "netred/mas.hpp"
#include "netred/nonlinear.hpp"
#include "netred/ode.hpp"
#include "netred/partition.hpp"
#include "netred/search.hpp"

namespace
{

using namespace netred;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitParse = 2;
constexpr int kExitBudget = 3;
constexpr int kExitCombination = 4;
constexpr int kExitIntegration = 5;

std::string num(double x) { return format_number(x); }

// Writes to the named file, or stdout for "" and "-".
template <typename F>
void with_output(const std::string &path, F &&fn)
{
  if (path.empty() || path == "-")
  {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out)
  {
    throw Error("cannot write '" + path + "'");
  }
  fn(out);
}

std::size_t workers_or_default(std::size_t w) { return w > 0 ? w : default_worker_count(); }

// ---------------------------------------------------------------- graph-info

struct GraphInfoArgs
{
  std::string file;
};

int graph_info(const GraphInfoArgs &a)
{
  const SystemFile sf = read_system_file(a.file);
  const WeightedGraph g = sf.graph();
  std::cout << "vertices: " << g.n_vertices() << '\n';
  std::cout << "edges: " << g.n_edges() << '\n';
  std::cout << "directed: " << (g.directed() ? "true" : "false") << '\n';
  if (g.directed())
  {
    std::cout << "connected: n/a\n";
    return kExitOk;
  }
  std::cout << "connected: " << (is_connected(g) ? "true" : "false") << '\n';
  const Vector m = sf.uniform_inertia
                       ? Vector::Constant(static_cast<Eigen::Index>(sf.vertices), *sf.uniform_inertia)
                       : sf.inertias;
  const SymmetricEigen es = sym_gen_eig(laplacian_matrix(g), Matrix(m.asDiagonal()));
  const Eigen::Index n = es.values.size();
  std::cout << "lambda_2: " << num(n > 1 ? es.values(1) : 0.0) << '\n';
  std::cout << "lambda_n: " << num(n > 0 ? es.values(n - 1) : 0.0) << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- enumerate

struct EnumerateArgs
{
  std::string file;
  std::size_t clusters = 0;
  std::string metric = "h2";
  std::size_t top = 15;
  std::size_t workers = 0;
  std::string out;
  std::uint64_t budget = 1'000'000;
  std::string checkpoint;
  bool quiet = false;
};

int enumerate(const EnumerateArgs &a)
{
  const LinearMas sys = to_linear(read_system_file(a.file));
  SearchOptions opts;
  opts.top_k = a.top;
  opts.workers = workers_or_default(a.workers);
  opts.budget = a.budget;
  opts.checkpoint = a.checkpoint;
  if (!a.quiet)
  {
    opts.progress = [](const SearchProgress &p) {
      std::fprintf(stderr, "progress: chunk %zu/%zu\n", p.chunks_done, p.chunks_total);
    };
  }
  const auto rows = rank_all_partitions(sys, a.clusters, parse_metric(a.metric), opts);
  with_output(a.out, [&](std::ostream &os) { write_ranked_csv(os, rows); });
  return kExitOk;
}

// ------------------------------------------------------------------- cluster

struct ClusterArgs
{
  std::string file;
  std::string mor = "irka";
  std::size_t order = 5;
  std::size_t clusters = 5;
  std::string algo = "kmeans";
  std::string basis = "v";
  std::uint64_t seed = 0;
  std::size_t n_init = 50;
  std::size_t workers = 0;
  bool rank = false;
  std::string out;
};

void print_rank(std::ostream &os, const char *label, const std::optional<std::size_t> &rank,
                std::size_t table_size)
{
  os << label << ": ";
  if (rank)
  {
    os << *rank << '\n';
  }
  else
  {
    os << ">" << table_size << '\n';
  }
}

int cluster_linear(const ClusterArgs &a, const SystemFile &sf)
{
  const LinearMas sys = to_linear(sf);
  PipelineOptions po;
  po.mor = parse_mor_method(a.mor);
  po.order = a.order;
  po.clusters = a.clusters;
  po.source = parse_basis_source(a.basis);
  po.algo = parse_cluster_algo(a.algo);
  po.seed = a.seed;
  po.n_init = a.n_init;
  po.workers = workers_or_default(a.workers);
  std::vector<RankedPartition> h2_table;
  std::vector<RankedPartition> hinf_table;
  if (a.rank)
  {
    const ErrorEvaluator eval(sys);
    SearchOptions so;
    so.workers = po.workers;
    so.top_k = static_cast<std::size_t>(count_partitions(sys.n_agents(), a.clusters));
    h2_table = rank_all_partitions(eval, a.clusters, Metric::h2, so);
    so.top_k = std::min<std::size_t>(so.top_k, so.refine_top);
    hinf_table = rank_all_partitions(eval, a.clusters, Metric::hinf, so);
    po.h2_table = &h2_table;
    po.hinf_table = &hinf_table;
  }
  const PipelineResult r = heuristic_pipeline(sys, po);
  with_output(a.out, [&](std::ostream &os) {
    os << "partition: " << r.partition.to_string() << '\n';
    os << "h2_relative: " << num(r.h2.relative) << '\n';
    os << "hinf_relative: " << num(r.hinf.relative) << '\n';
    os << "mor_h2_relative: " << num(r.mor_h2_relative) << '\n';
    if (a.rank)
    {
      print_rank(os, "h2_rank", r.h2_rank, h2_table.size());
      print_rank(os, "hinf_rank", r.hinf_rank, hinf_table.size());
    }
    if (!r.basis.warning.empty())
    {
      os << "warning: " << r.basis.warning << '\n';
    }
  });
  return kExitOk;
}

int cluster_nonlinear(const ClusterArgs &a, const SystemFile &sf)
{
  if (parse_mor_method(a.mor) != MorMethod::pod)
  {
    throw InvalidCombination("nonlinear systems support only --mor pod");
  }
  const ClusterAlgo algo = parse_cluster_algo(a.algo);
  if (algo == ClusterAlgo::qr && a.clusters != a.order)
  {
    throw InvalidCombination("qr clustering requires --clusters equal to --order (r = r_P)");
  }
  PodStudyOptions po;
  po.modes = a.order;
  po.seed = a.seed;
  po.n_init = a.n_init;
  const PodStudy study(to_nonlinear(sf), po);
  const PodStudyResult r = algo == ClusterAlgo::qr
                               ? study.evaluate_partition(qr_cluster(study.features(), a.clusters))
                               : study.evaluate(a.clusters);
  with_output(a.out, [&](std::ostream &os) {
    os << "partition: " << r.partition.to_string() << '\n';
    os << "snapshots: " << study.training().times.size() << '\n';
    os << "l2_relative: " << num(r.l2_relative) << '\n';
    os << "max_pointwise: " << num(r.max_pointwise) << '\n';
    if (!study.basis().warning.empty())
    {
      os << "warning: " << study.basis().warning << '\n';
    }
  });
  return kExitOk;
}

int cluster(const ClusterArgs &a)
{
  const SystemFile sf = read_system_file(a.file);
  if (sf.agent_kind == AgentKind::vanderpol)
  {
    return cluster_nonlinear(a, sf);
  }
  return cluster_linear(a, sf);
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs
{
  std::string file;
  std::string input = "train";
  std::vector<double> tspan{0.0, 20.0};
  std::size_t samples = 1000;
  std::vector<double> x0;
  std::string out;
  std::string error_sweep;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  double rtol = 1e-6;
  double atol = 1e-9;
};

InputSignal make_input(const std::string &spec, std::size_t channels)
{
  if (spec == "train")
  {
    return training_input(channels);
  }
  if (spec == "test")
  {
    return test_input(channels);
  }
  if (spec == "zero")
  {
    return [channels](double) { return Vector::Zero(static_cast<Eigen::Index>(channels)); };
  }
  return parse_input_expression(spec, channels);
}

Vector initial_state(const std::vector<double> &x0, std::size_t dim)
{
  const auto n = static_cast<Eigen::Index>(dim);
  if (x0.empty())
  {
    return Vector::Zero(n);
  }
  if (x0.size() == 1)
  {
    return Vector::Constant(n, x0[0]);
  }
  if (x0.size() != dim)
  {
    throw InvalidArgument("--x0 needs 1 or " + std::to_string(dim) + " values");
  }
  return Eigen::Map<const Vector>(x0.data(), n);
}

std::vector<std::size_t> parse_count_list(const std::string &text)
{
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(item, &pos);
    if (pos != item.size() || v == 0)
    {
      throw InvalidArgument("--error-sweep expects positive integers separated by commas");
    }
    out.push_back(v);
  }
  return out;
}

int simulate_cmd(const SimulateArgs &a)
{
  const SystemFile sf = read_system_file(a.file);
  if (a.tspan.size() != 2 || !(a.tspan[1] > a.tspan[0]))
  {
    throw InvalidArgument("--tspan needs two increasing times");
  }
  OdeOptions ode;
  ode.rtol = a.rtol;
  ode.atol = a.atol;
  const std::vector<double> grid =
      a.samples > 0 ? linspace(a.tspan[0], a.tspan[1], a.samples) : std::vector<double>{};

  if (!a.error_sweep.empty())
  {
    PodStudyOptions po;
    po.t0 = a.tspan[0];
    po.t1 = a.tspan[1];
    po.samples = a.samples > 1 ? a.samples : 1000;
    po.seed = a.seed;
    po.ode = ode;
    NonlinearMas sys = to_nonlinear(sf);
    po.test = make_input(a.input, sys.input_dim());
    const PodStudy study(std::move(sys), po);
    const auto rows = study.sweep(parse_count_list(a.error_sweep), workers_or_default(a.workers));
    with_output(a.out, [&](std::ostream &os) {
      os << "clusters,l2_relative,max_pointwise\n";
      for (const auto &r : rows)
      {
        os << r.clusters << ',' << num(r.l2_relative) << ',' << num(r.max_pointwise) << '\n';
      }
    });
    return kExitOk;
  }

  if (sf.agent_kind == AgentKind::vanderpol)
  {
    const NonlinearMas sys = to_nonlinear(sf);
    const OdeSolution sol =
        simulate(sys, initial_state(a.x0, sys.state_dim()), make_input(a.input, sys.input_dim()),
                 a.tspan[0], a.tspan[1], grid, ode);
    with_output(a.out, [&](std::ostream &os) { write_trajectory_csv(os, sol, sys.agent.order); });
    return kExitOk;
  }

  const LinearMas sys = to_linear(sf);
  sys.validate();
  const LtiSystem lti = realize(sys);
  const InputSignal u = make_input(a.input, static_cast<std::size_t>(lti.b.cols()));
  OdeProblem prob;
  prob.rhs = [&](double t, const Vector &x, Vector &dx) { dx = lti.a * x + lti.b * u(t); };
  prob.jacobian = [&](double, const Vector &, Matrix &jac) { jac = lti.a; };
  prob.mass = lti.e;
  prob.x0 = initial_state(a.x0, lti.order());
  prob.t0 = a.tspan[0];
  prob.t1 = a.tspan[1];
  ode.sample_times = grid;
  const OdeSolution sol = integrate_ode(prob, ode);
  with_output(a.out, [&](std::ostream &os) { write_trajectory_csv(os, sol, sys.agent.order()); });
  return kExitOk;
}

// --------------------------------------------------------------------- repro

struct ReproArgs
{
  std::string data_dir = NETRED_DEFAULT_DATA_DIR;
  std::string out_dir = "repro";
  std::string part = "all";
  std::size_t workers = 0;
  std::uint64_t seed = 0;
};

std::string path_in(const std::string &dir, const std::string &name)
{
  return (std::filesystem::path(dir) / name).string();
}

void write_file(const std::string &path, const std::function<void(std::ostream &)> &fn)
{
  std::ofstream out(path);
  if (!out)
  {
    throw Error("cannot write '" + path + "'");
  }
  fn(out);
  std::cout << "wrote " << path << '\n';
}

void repro_small(const ReproArgs &a, std::size_t workers)
{
  const LinearMas sys = to_linear(read_system_file(path_in(a.data_dir, "small_network.sys")));
  const ErrorEvaluator eval(sys);
  SearchOptions so;
  so.workers = workers;
  so.top_k = static_cast<std::size_t>(count_partitions(sys.n_agents(), 5));
  const auto h2 = rank_all_partitions(eval, 5, Metric::h2, so);
  so.top_k = so.refine_top;
  const auto hinf = rank_all_partitions(eval, 5, Metric::hinf, so);
  const std::vector<RankedPartition> h2_top(h2.begin(), h2.begin() + 15);
  const std::vector<RankedPartition> hinf_top(hinf.begin(), hinf.begin() + 15);
  write_file(path_in(a.out_dir, "small_h2_top.csv"), [&](std::ostream &os) { write_ranked_csv(os, h2_top); });
  write_file(path_in(a.out_dir, "small_hinf_top.csv"),
             [&](std::ostream &os) { write_ranked_csv(os, hinf_top); });

  const auto decomp = decompose_mas(sys);
  IrkaOptions io;
  io.seed = a.seed;
  const auto basis = irka(decomp.stable, 5, io);
  const double irka_err =
      h2_error(decomp.stable, project(decomp.stable, basis.v, basis.w)).relative;

  write_file(path_in(a.out_dir, "pipelines.csv"), [&](std::ostream &os) {
    os << "mor,basis,algo,h2_relative,h2_rank,hinf_relative,hinf_rank,partition\n";
    os << "irka,unstructured,none," << num(irka_err) << ",,,,\"\"\n";
    for (MorMethod mor : {MorMethod::irka, MorMethod::bt})
    {
      for (BasisSource src : {BasisSource::v, BasisSource::w, BasisSource::vw})
      {
        for (ClusterAlgo algo : {ClusterAlgo::qr, ClusterAlgo::kmeans})
        {
          PipelineOptions po;
          po.mor = mor;
          po.source = src;
          po.algo = algo;
          po.seed = a.seed;
          po.workers = workers;
          po.h2_table = &h2;
          po.hinf_table = &hinf;
          const PipelineResult r = heuristic_pipeline(sys, po);
          os << to_string(mor) << ',' << to_string(src) << ',' << to_string(algo) << ','
             << num(r.h2.relative) << ',' << (r.h2_rank ? std::to_string(*r.h2_rank) : "") << ','
             << num(r.hinf.relative) << ','
             << (r.hinf_rank ? std::to_string(*r.hinf_rank) : "") << ",\""
             << r.partition.to_string() << "\"\n";
        }
      }
    }
  });
}

void repro_vanderpol(const ReproArgs &a, std::size_t workers)
{
  PodStudyOptions po;
  po.seed = a.seed;
  const PodStudy study(to_nonlinear(read_system_file(path_in(a.data_dir, "vanderpol.sys"))), po);
  write_file(path_in(a.out_dir, "vanderpol_train.csv"),
             [&](std::ostream &os) { write_trajectory_csv(os, study.training(), 2); });
  write_file(path_in(a.out_dir, "vanderpol_singular_values.csv"),
             [&](std::ostream &os) { write_singular_values_csv(os, study.basis().hankel_values); });
  write_file(path_in(a.out_dir, "vanderpol_test.csv"),
             [&](std::ostream &os) { write_trajectory_csv(os, study.reference(), 2); });
  const PodStudyResult ten = study.evaluate(10);
  write_file(path_in(a.out_dir, "vanderpol_kmeans10.txt"), [&](std::ostream &os) {
    os << "partition: " << ten.partition.to_string() << '\n';
    os << "l2_relative: " << num(ten.l2_relative) << '\n';
    os << "max_pointwise: " << num(ten.max_pointwise) << '\n';
  });
  std::vector<std::size_t> counts;
  for (std::size_t r = 2; r <= 50; ++r)
  {
    counts.push_back(r);
  }
  const auto rows = study.sweep(counts, workers);
  write_file(path_in(a.out_dir, "vanderpol_l2_sweep.csv"), [&](std::ostream &os) {
    os << "clusters,l2_relative,max_pointwise\n";
    for (const auto &r : rows)
    {
      os << r.clusters << ',' << num(r.l2_relative) << ',' << num(r.max_pointwise) << '\n';
    }
  });
}

int repro(const ReproArgs &a)
{
  std::filesystem::create_directories(a.out_dir);
  const std::size_t workers = workers_or_default(a.workers);
  if (a.part == "all" || a.part == "small")
  {
    repro_small(a, workers);
  }
  if (a.part == "all" || a.part == "vanderpol")
  {
    repro_vanderpol(a, workers);
  }
  return kExitOk;
}

template <typename F>
int guarded(F &&fn)
{
  try
  {
    return fn();
  }
  catch (const ParseError &e)
  {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  }
  catch (const BudgetExceeded &e)
  {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  }
  catch (const InvalidCombination &e)
  {
    std::cerr << "invalid combination: " << e.what() << '\n';
    return kExitCombination;
  }
  catch (const IntegrationError &e)
  {
    std::cerr << "integration failed at t = " << num(e.last_time()) << ": " << e.what() << '\n';
    return kExitIntegration;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Clustering-based model reduction of multi-agent network systems"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 error, 2 parse error, 3 budget exceeded, "
             "4 invalid combination, 5 integration failure.\n"
             "NETRED_WORKERS overrides the default worker count.");

  GraphInfoArgs gi;
  auto *gi_cmd = app.add_subcommand("graph-info", "Print graph size, connectivity and spectrum");
  gi_cmd->add_option("file", gi.file, "System file")->required();

  EnumerateArgs en;
  auto *en_cmd = app.add_subcommand("enumerate", "Rank all partitions by relative error");
  en_cmd->add_option("file", en.file, "System file")->required();
  en_cmd->add_option("--clusters,-r", en.clusters, "Cluster count")->required();
  en_cmd->add_option("--metric", en.metric, "h2 or hinf")->check(CLI::IsMember({"h2", "hinf"}));
  en_cmd->add_option("--top", en.top, "Rows to report");
  en_cmd->add_option("--workers", en.workers, "Worker threads (0: default)");
  en_cmd->add_option("--out", en.out, "CSV output path (default stdout)");
  en_cmd->add_option("--budget", en.budget, "Maximum number of partitions");
  en_cmd->add_option("--checkpoint", en.checkpoint, "Resume file");
  en_cmd->add_flag("--quiet", en.quiet, "Suppress progress lines");

  ClusterArgs cl;
  auto *cl_cmd = app.add_subcommand("cluster", "Recover a partition from a projection basis");
  cl_cmd->add_option("file", cl.file, "System file")->required();
  cl_cmd->add_option("--mor", cl.mor, "irka, bt or pod")->check(CLI::IsMember({"irka", "bt", "pod"}));
  cl_cmd->add_option("--order", cl.order, "Reduced order r_P");
  cl_cmd->add_option("--clusters,-r", cl.clusters, "Cluster count");
  cl_cmd->add_option("--algo", cl.algo, "qr or kmeans")->check(CLI::IsMember({"qr", "kmeans"}));
  cl_cmd->add_option("--basis", cl.basis, "v, w or vw")->check(CLI::IsMember({"v", "w", "vw"}));
  cl_cmd->add_option("--seed", cl.seed, "Random seed");
  cl_cmd->add_option("--n-init", cl.n_init, "k-means restarts");
  cl_cmd->add_option("--workers", cl.workers, "Worker threads (0: default)");
  cl_cmd->add_flag("--rank", cl.rank, "Also rank the partition against the exhaustive census");
  cl_cmd->add_option("--out", cl.out, "Report path (default stdout)");

  SimulateArgs si;
  auto *si_cmd = app.add_subcommand("simulate", "Simulate a network and export the trajectory");
  si_cmd->add_option("file", si.file, "System file")->required();
  si_cmd->add_option("--input", si.input, "train, test, zero or an expression in t");
  si_cmd->add_option("--tspan", si.tspan, "Start and end time")->expected(2);
  si_cmd->add_option("--samples", si.samples, "Uniform output samples (0: accepted steps)");
  si_cmd->add_option("--x0", si.x0, "Initial state (one value broadcasts)")->delimiter(',');
  si_cmd->add_option("--out", si.out, "CSV output path (default stdout)");
  si_cmd->add_option("--error-sweep", si.error_sweep,
                     "Comma-separated cluster counts; writes the reduced-vs-full error instead");
  si_cmd->add_option("--seed", si.seed, "Random seed for the sweep");
  si_cmd->add_option("--workers", si.workers, "Worker threads for the sweep (0: default)");
  si_cmd->add_option("--rtol", si.rtol, "Relative tolerance");
  si_cmd->add_option("--atol", si.atol, "Absolute tolerance");

  ReproArgs re;
  auto *re_cmd = app.add_subcommand("repro", "Run both bundled experiments end to end");
  re_cmd->add_option("--data-dir", re.data_dir, "Directory with the bundled system files");
  re_cmd->add_option("--out-dir", re.out_dir, "Output directory");
  re_cmd->add_option("--part", re.part, "all, small or vanderpol")
      ->check(CLI::IsMember({"all", "small", "vanderpol"}));
  re_cmd->add_option("--workers", re.workers, "Worker threads (0: default)");
  re_cmd->add_option("--seed", re.seed, "Random seed");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFailure;
  }

  if (gi_cmd->parsed())
  {
    return guarded([&] { return graph_info(gi); });
  }
  if (en_cmd->parsed())
  {
    return guarded([&] { return enumerate(en); });
  }
  if (cl_cmd->parsed())
  {
    return guarded([&] { return cluster(cl); });
  }
  if (si_cmd->parsed())
  {
    return guarded([&] { return simulate_cmd(si); });
  }
  return guarded([&] { return repro(re); });
}
