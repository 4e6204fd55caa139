// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/mas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "netred/error.hpp"

namespace netred
{

bool AgentDynamics::is_single_integrator() const
{
  return a.rows() == 1 && a.cols() == 1 && a(0, 0) == 0.0 && e.size() == 1 && e(0, 0) == 1.0 &&
         b.size() == 1 && b(0, 0) == 1.0 && c.size() == 1 && c(0, 0) == 1.0 && k.size() == 1 &&
         k(0, 0) == 1.0;
}

void AgentDynamics::validate() const
{
  const auto n = a.rows();
  if (n == 0 || a.cols() != n || e.rows() != n || e.cols() != n || b.rows() != n ||
      c.cols() != n || k.rows() != b.cols() || k.cols() != c.rows())
  {
    throw InvalidArgument("agent: inconsistent matrix shapes");
  }
  require_finite(e, "agent E");
  require_finite(a, "agent A");
  require_finite(b, "agent B");
  require_finite(c, "agent C");
  require_finite(k, "agent K");
  Eigen::FullPivLU<Matrix> lu(e);
  if (!lu.isInvertible() || 1.0 / lu.rcond() > 1e12)
  {
    throw InvalidArgument("agent: E is singular or badly conditioned");
  }
}

AgentDynamics AgentDynamics::single_integrator()
{
  const Matrix one = Matrix::Ones(1, 1);
  return {one, Matrix::Zero(1, 1), one, one, one};
}

void LinearMas::validate() const
{
  const auto n = static_cast<Eigen::Index>(graph.n_vertices());
  agent.validate();
  if (inertias.size() != n || input.rows() != n || output.cols() != n)
  {
    throw InvalidArgument("linear MAS: dimensions do not match the vertex count");
  }
  if ((inertias.array() <= 0.0).any() || !inertias.allFinite())
  {
    throw InvalidArgument("linear MAS: inertias must be positive");
  }
  require_finite(input, "input map");
  require_finite(output, "output map");
  if (graph.directed())
  {
    throw InvalidArgument("linear MAS: graph must be undirected");
  }
  if (!is_connected(graph))
  {
    throw InvalidArgument("linear MAS: graph must be connected");
  }
}

LtiSystem realize(const LinearMas &sys)
{
  const Matrix m = sys.inertias.asDiagonal();
  const Matrix l = laplacian_matrix(sys.graph);
  const auto &ag = sys.agent;
  LtiSystem out;
  out.e = kron(m, ag.e);
  out.a = kron(m, ag.a) - kron(l, ag.b * ag.k * ag.c);
  out.b = kron(sys.input, ag.b);
  out.c = kron(sys.output, ag.c);
  return out;
}

Matrix leader_follower_input(std::size_t n_vertices, const std::vector<std::size_t> &leaders)
{
  if (leaders.empty())
  {
    throw InvalidArgument("leader_follower_input: at least one leader required");
  }
  std::set<std::size_t> seen;
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(n_vertices),
                          static_cast<Eigen::Index>(leaders.size()));
  for (std::size_t k = 0; k < leaders.size(); ++k)
  {
    if (leaders[k] >= n_vertices)
    {
      throw InvalidArgument("leader_follower_input: leader out of range");
    }
    if (!seen.insert(leaders[k]).second)
    {
      throw InvalidArgument("leader_follower_input: duplicate leader " +
                            std::to_string(leaders[k] + 1));
    }
    b(static_cast<Eigen::Index>(leaders[k]), static_cast<Eigen::Index>(k)) = 1.0;
  }
  return b;
}

Matrix incidence_output(const WeightedGraph &g)
{
  if (g.directed())
  {
    throw InvalidArgument("incidence_output: graph must be undirected");
  }
  const GraphMatrices gm = build_matrices(g);
  return gm.weight.diagonal().cwiseSqrt().asDiagonal() * gm.incidence.transpose();
}

double coupled_abscissa(const AgentDynamics &agent, double lambda)
{
  return spectral_abscissa(agent.a - lambda * agent.b * agent.k * agent.c, agent.e);
}

namespace
{

SyncReport check_lambdas(const AgentDynamics &agent, const std::vector<double> &lambdas)
{
  SyncReport rep;
  rep.max_real_part = -std::numeric_limits<double>::infinity();
  for (double lambda : lambdas)
  {
    const double abscissa = coupled_abscissa(agent, lambda);
    if (abscissa > rep.max_real_part)
    {
      rep.max_real_part = abscissa;
      if (rep.synchronized)
      {
        rep.witness_lambda = lambda;
      }
    }
    if (!(abscissa < kHurwitzThreshold) && rep.synchronized)
    {
      rep.synchronized = false;
      rep.witness_lambda = lambda;
    }
  }
  return rep;
}

Vector laplacian_spectrum(const LinearMas &sys)
{
  return sym_gen_eig(laplacian_matrix(sys.graph), Matrix(sys.inertias.asDiagonal())).values;
}

}  // namespace

SyncReport is_synchronized(const LinearMas &sys)
{
  if (sys.graph.directed())
  {
    throw InvalidArgument("is_synchronized: graph must be undirected");
  }
  const Vector ev = laplacian_spectrum(sys);
  std::vector<double> lambdas(ev.data() + std::min<Eigen::Index>(1, ev.size()),
                              ev.data() + ev.size());
  return check_lambdas(sys.agent, lambdas);
}

SyncReport check_sync_preserved_for_all_partitions(const LinearMas &sys, std::size_t samples)
{
  if (sys.graph.directed())
  {
    throw InvalidArgument("check_sync_preserved_for_all_partitions: graph must be undirected");
  }
  const Vector ev = laplacian_spectrum(sys);
  if (ev.size() < 2)
  {
    return check_lambdas(sys.agent, {});
  }
  const double lo = ev(1);
  const double hi = ev(ev.size() - 1);
  std::vector<double> lambdas;
  if (samples <= 1)
  {
    lambdas = {lo};
  }
  else
  {
    for (std::size_t i = 0; i < samples; ++i)
    {
      lambdas.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1));
    }
    lambdas.back() = hi;
  }
  return check_lambdas(sys.agent, lambdas);
}

LinearMas cluster_reduce(const LinearMas &sys, const Partition &p)
{
  if (p.n_vertices() != sys.n_agents())
  {
    throw InvalidArgument("cluster_reduce: partition size does not match the network");
  }
  const Matrix pm = characteristic_matrix(p);
  LinearMas red;
  red.graph = graph_from_adjacency(pm.transpose() * adjacency_matrix(sys.graph) * pm);
  red.inertias = pm.transpose() * sys.inertias;
  red.input = pm.transpose() * sys.input;
  red.output = sys.output * pm;
  red.agent = sys.agent;
  return red;
}

}  // namespace netred
