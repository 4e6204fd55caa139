// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/nonlinear.hpp"

#include <cmath>
#include <utility>

#include "netred/error.hpp"

namespace netred
{

void NonlinearMas::validate() const
{
  const auto nv = static_cast<Eigen::Index>(graph.n_vertices());
  const auto n = static_cast<Eigen::Index>(agent.order);
  const auto m = static_cast<Eigen::Index>(agent.inputs);
  const auto p = static_cast<Eigen::Index>(agent.outputs);
  if (n == 0 || m == 0 || p == 0 || !agent.drift || !agent.input_gain || !agent.output ||
      !agent.coupling)
  {
    throw InvalidArgument("nonlinear MAS: incomplete agent description");
  }
  if (inertias.size() != nv || input.rows() != nv || output.cols() != nv ||
      (self_weights.size() != 0 && self_weights.size() != nv))
  {
    throw InvalidArgument("nonlinear MAS: dimensions do not match the vertex count");
  }
  if ((inertias.array() <= 0.0).any())
  {
    throw InvalidArgument("nonlinear MAS: inertias must be positive");
  }
  const Vector x = Vector::Zero(n);
  Vector fx = Vector::Constant(n, std::nan(""));
  Matrix gx = Matrix::Constant(n, m, std::nan(""));
  Vector zx = Vector::Constant(p, std::nan(""));
  Vector kx = Vector::Constant(m, std::nan(""));
  agent.drift(x, fx);
  agent.input_gain(x, gx);
  agent.output(x, zx);
  const Vector z = Vector::Zero(p);
  agent.coupling(z, z, kx);
  if (!fx.allFinite() || !gx.allFinite() || !zx.allFinite() || !kx.allFinite())
  {
    throw InvalidArgument("nonlinear MAS: agent callbacks do not fill their outputs");
  }
}

Vector NonlinearMas::mass_diagonal() const
{
  const auto n = static_cast<Eigen::Index>(agent.order);
  Vector d(inertias.size() * n);
  for (Eigen::Index i = 0; i < inertias.size(); ++i)
  {
    d.segment(i * n, n).setConstant(inertias(i));
  }
  return d;
}

void rhs_into(const NonlinearMas &sys, const Vector &x, const Vector &u, Vector &dx)
{
  const auto nv = static_cast<Eigen::Index>(sys.n_agents());
  const auto n = static_cast<Eigen::Index>(sys.agent.order);
  const auto m = static_cast<Eigen::Index>(sys.agent.inputs);
  const auto p = static_cast<Eigen::Index>(sys.agent.outputs);
  const auto ext = sys.input.cols();
  if (x.size() != nv * n || u.size() != ext * m)
  {
    throw InvalidArgument("rhs: state or input dimension mismatch");
  }
  dx.resize(nv * n);

  Matrix z(p, nv);
  for (Eigen::Index i = 0; i < nv; ++i)
  {
    Eigen::Ref<Vector> zi = z.col(i);
    sys.agent.output(x.segment(i * n, n), zi);
  }
  // v_i accumulates Σ_j a_ij K(z_i, z_j) + Σ_k b_ik u_k.
  Matrix v = Matrix::Zero(m, nv);
  Vector k(m);
  for (const auto &e : sys.graph.edges())
  {
    const auto s = static_cast<Eigen::Index>(e.source);
    const auto t = static_cast<Eigen::Index>(e.target);
    sys.agent.coupling(z.col(t), z.col(s), k);
    v.col(t) += e.weight * k;
    if (!sys.graph.directed())
    {
      sys.agent.coupling(z.col(s), z.col(t), k);
      v.col(s) += e.weight * k;
    }
  }
  if (sys.self_weights.size() == nv)
  {
    for (Eigen::Index i = 0; i < nv; ++i)
    {
      if (sys.self_weights(i) != 0.0)
      {
        sys.agent.coupling(z.col(i), z.col(i), k);
        v.col(i) += sys.self_weights(i) * k;
      }
    }
  }
  for (Eigen::Index i = 0; i < nv; ++i)
  {
    for (Eigen::Index c = 0; c < ext; ++c)
    {
      const double b = sys.input(i, c);
      if (b != 0.0)
      {
        v.col(i) += b * u.segment(c * m, m);
      }
    }
  }
  Vector drift(n);
  Matrix gain(n, m);
  for (Eigen::Index i = 0; i < nv; ++i)
  {
    const auto xi = x.segment(i * n, n);
    sys.agent.drift(xi, drift);
    sys.agent.input_gain(xi, gain);
    dx.segment(i * n, n) = sys.inertias(i) * drift + gain * v.col(i);
  }
}

Vector rhs(const NonlinearMas &sys, const Vector &x, const Vector &u)
{
  Vector dx;
  rhs_into(sys, x, u, dx);
  return dx;
}

Vector output(const NonlinearMas &sys, const Vector &x)
{
  const auto nv = static_cast<Eigen::Index>(sys.n_agents());
  const auto n = static_cast<Eigen::Index>(sys.agent.order);
  const auto p = static_cast<Eigen::Index>(sys.agent.outputs);
  Matrix z(p, nv);
  for (Eigen::Index i = 0; i < nv; ++i)
  {
    Eigen::Ref<Vector> zi = z.col(i);
    sys.agent.output(x.segment(i * n, n), zi);
  }
  // y = (𝖢 ⊗ I_p) stacked z
  Vector y(sys.output.rows() * p);
  const Matrix yz = z * sys.output.transpose();
  for (Eigen::Index l = 0; l < sys.output.rows(); ++l)
  {
    y.segment(l * p, p) = yz.col(l);
  }
  return y;
}

NonlinearMas cluster_reduce_nonlinear(const NonlinearMas &sys, const Partition &p)
{
  if (p.n_vertices() != sys.n_agents())
  {
    throw InvalidArgument("cluster_reduce_nonlinear: partition size does not match the network");
  }
  const Matrix pm = characteristic_matrix(p);
  Matrix a = adjacency_matrix(sys.graph);
  if (sys.self_weights.size() == a.rows())
  {
    a.diagonal() += sys.self_weights;
  }
  const Matrix ar = pm.transpose() * a * pm;
  NonlinearMas red;
  red.graph = sys.graph.directed() ? WeightedGraph(p.n_clusters(), {}, true)
                                   : graph_from_adjacency(ar);
  if (sys.graph.directed())
  {
    std::vector<Edge> edges;
    for (Eigen::Index i = 0; i < ar.rows(); ++i)
    {
      for (Eigen::Index j = 0; j < ar.cols(); ++j)
      {
        if (i != j && ar(i, j) > 1e-12)
        {
          edges.push_back({static_cast<std::size_t>(j), static_cast<std::size_t>(i), ar(i, j)});
        }
      }
    }
    red.graph = WeightedGraph(p.n_clusters(), std::move(edges), true);
  }
  red.inertias = pm.transpose() * sys.inertias;
  red.input = pm.transpose() * sys.input;
  red.output = sys.output * pm;
  red.agent = sys.agent;
  red.self_weights = ar.diagonal();
  return red;
}

AgentCallbacks linear_agent(const AgentDynamics &agent)
{
  if (!agent.e.isIdentity(0.0))
  {
    throw InvalidArgument("linear_agent: requires E = I");
  }
  AgentCallbacks cb;
  cb.order = agent.order();
  cb.inputs = agent.inputs();
  cb.outputs = agent.outputs();
  cb.drift = [a = agent.a](ConstVectorRef x, VectorRef out) { out.noalias() = a * x; };
  cb.input_gain = [b = agent.b](ConstVectorRef, MatrixRef out) { out = b; };
  cb.output = [c = agent.c](ConstVectorRef x, VectorRef out) { out.noalias() = c * x; };
  cb.coupling = [k = agent.k](ConstVectorRef zi, ConstVectorRef zj, VectorRef out) {
    out.noalias() = k * (zj - zi);
  };
  return cb;
}

NonlinearMas linear_instantiation(const LinearMas &sys)
{
  NonlinearMas out;
  out.graph = sys.graph;
  out.inertias = sys.inertias;
  out.input = sys.input;
  out.output = sys.output;
  out.agent = linear_agent(sys.agent);
  out.self_weights = Vector::Zero(sys.inertias.size());
  return out;
}

AgentCallbacks vanderpol_agent(const VanDerPolParams &params)
{
  AgentCallbacks cb;
  cb.order = 2;
  cb.inputs = 1;
  cb.outputs = 1;
  cb.drift = [mu = params.mu](ConstVectorRef x, VectorRef out) {
    out(0) = x(1);
    out(1) = mu * (1.0 - x(0) * x(0)) * x(1) - x(0);
  };
  cb.input_gain = [s = params.sigma, c = params.c](ConstVectorRef, MatrixRef out) {
    out(0, 0) = s;
    out(1, 0) = -c;
  };
  cb.output = [](ConstVectorRef x, VectorRef out) { out(0) = x(0) + x(1); };
  cb.coupling = [](ConstVectorRef zi, ConstVectorRef zj, VectorRef out) { out = zi - zj; };
  return cb;
}

NonlinearMas vanderpol_network(const VanDerPolParams &params, std::size_t rows, std::size_t cols)
{
  NonlinearMas sys;
  sys.graph = grid_graph(rows, cols, 1.0);
  const auto nv = static_cast<Eigen::Index>(rows * cols);
  sys.inertias = Vector::Ones(nv);
  sys.input = leader_follower_input(rows * cols, {0});
  sys.output = Matrix::Identity(nv, nv);
  sys.agent = vanderpol_agent(params);
  sys.self_weights = Vector::Zero(nv);
  return sys;
}

InputSignal training_input(std::size_t channels)
{
  return [channels](double t) {
    return Vector::Constant(static_cast<Eigen::Index>(channels), std::exp(-t));
  };
}

InputSignal test_input(std::size_t channels)
{
  return [channels](double t) {
    return Vector::Constant(static_cast<Eigen::Index>(channels), std::exp(-t / 10.0) * std::sin(t));
  };
}

OdeSolution simulate(const NonlinearMas &sys, const Vector &x0, const InputSignal &u, double t0,
                     double t1, const std::vector<double> &sample_times, const OdeOptions &opts)
{
  if (x0.size() != static_cast<Eigen::Index>(sys.state_dim()))
  {
    throw InvalidArgument("simulate: initial state has the wrong dimension");
  }
  OdeProblem prob;
  prob.rhs = [&sys, &u](double t, const Vector &x, Vector &dx) { rhs_into(sys, x, u(t), dx); };
  prob.mass_diagonal = sys.mass_diagonal();
  prob.x0 = x0;
  prob.t0 = t0;
  prob.t1 = t1;
  OdeOptions o = opts;
  o.sample_times = sample_times;
  return integrate_ode(prob, o);
}

TrajectoryError trajectory_error(const OdeSolution &full, const OdeSolution &reduced,
                                 const Partition &p, std::size_t block_size)
{
  if (full.times.size() != reduced.times.size() || full.times.size() < 2)
  {
    throw InvalidArgument("trajectory_error: solutions must share at least two sample times");
  }
  const Matrix lift = kron(characteristic_matrix(p),
                           Matrix::Identity(static_cast<Eigen::Index>(block_size),
                                            static_cast<Eigen::Index>(block_size)));
  const std::size_t k = full.times.size();
  std::vector<double> err2(k);
  std::vector<double> ref2(k);
  TrajectoryError out;
  for (std::size_t i = 0; i < k; ++i)
  {
    const Vector diff = full.states[i] - lift * reduced.states[i];
    err2[i] = diff.squaredNorm();
    ref2[i] = full.states[i].squaredNorm();
    out.max_pointwise = std::max(out.max_pointwise, diff.cwiseAbs().maxCoeff());
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 1; i < k; ++i)
  {
    const double dt = full.times[i] - full.times[i - 1];
    num += 0.5 * dt * (err2[i] + err2[i - 1]);
    den += 0.5 * dt * (ref2[i] + ref2[i - 1]);
  }
  if (!(den > 0.0))
  {
    throw InvalidArgument("trajectory_error: reference trajectory is identically zero");
  }
  out.l2_relative = std::sqrt(num / den);
  return out;
}

double l2_relative_error(const NonlinearMas &sys, const NonlinearMas &red, const Partition &p,
                         const Vector &x0, const InputSignal &u, double t0, double t1,
                         std::size_t samples, const OdeOptions &opts)
{
  const auto grid = linspace(t0, t1, samples);
  const OdeSolution full = simulate(sys, x0, u, t0, t1, grid, opts);
  const Matrix restrict = kron(characteristic_matrix(p),
                               Matrix::Identity(static_cast<Eigen::Index>(sys.agent.order),
                                                static_cast<Eigen::Index>(sys.agent.order)));
  // Reduced initial state: mass-weighted cluster average.
  const Vector md = sys.mass_diagonal();
  const Vector x0r = (restrict.transpose() * md.asDiagonal() * x0)
                         .cwiseQuotient(restrict.transpose() * md);
  const OdeSolution reduced = simulate(red, x0r, u, t0, t1, grid, opts);
  return trajectory_error(full, reduced, p, sys.agent.order).l2_relative;
}

}  // namespace netred
