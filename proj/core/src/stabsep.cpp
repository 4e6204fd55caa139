// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/stabsep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "netred/error.hpp"

namespace netred
{

MasStableBasis mas_stable_basis(const Vector &inertias)
{
  const Eigen::Index n = inertias.size();
  if (n == 0 || (inertias.array() <= 0.0).any())
  {
    throw InvalidArgument("mas_stable_basis: inertias must be positive");
  }
  MasStableBasis out;
  out.t_minus = Matrix::Zero(n, n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i)
  {
    const double s = std::hypot(inertias(i), inertias(i + 1));
    out.t_minus(i, i) = inertias(i + 1) / s;
    out.t_minus(i + 1, i) = -inertias(i) / s;
  }
  out.m_plus = inertias.sum();
  return out;
}

AgentSplit split_agent(const AgentDynamics &agent)
{
  const SpectralSplit sp = split_pencil(agent.a, agent.e, kHurwitzThreshold);
  const auto ns = static_cast<Eigen::Index>(sp.n_stable);
  const auto n = agent.a.rows();
  return {sp.right.leftCols(ns), sp.right.rightCols(n - ns), sp.left.leftCols(ns),
          sp.left.rightCols(n - ns)};
}

NetworkData network_data(const LinearMas &sys)
{
  return {sys.inertias, laplacian_matrix(sys.graph), sys.input, sys.output};
}

StableDecomposition decompose_network(const NetworkData &net, const AgentDynamics &agent,
                                      const AgentSplit &split)
{
  const Eigen::Index nv = net.inertias.size();
  const auto n = static_cast<Eigen::Index>(agent.order());
  const MasStableBasis basis = mas_stable_basis(net.inertias);
  const Matrix &tm = basis.t_minus;
  const double mp = basis.m_plus;
  const Matrix mass = net.inertias.asDiagonal();
  const Matrix ones = Matrix::Ones(nv, 1);
  const Matrix id = Matrix::Identity(n, n);
  const Matrix bkc = agent.b * agent.k * agent.c;

  StableDecomposition d;
  d.m_plus = mp;
  d.t_minus.resize(nv * n, (nv - 1) * n + split.t_stable.cols());
  d.t_minus << kron(tm, id), kron(ones, split.t_stable);
  d.s_minus.resize(nv * n, (nv - 1) * n + split.s_stable.cols());
  d.s_minus << kron(tm, id), kron(ones, split.s_stable);
  d.t_plus = kron(ones, split.t_unstable);
  d.s_plus = kron(ones, split.s_unstable);

  // Block formulas for 𝒮₋ᵀ(ℰ, 𝒜, ℬ) 𝒯₋ and 𝒞 𝒯₋.
  const Matrix mm = tm.transpose() * mass * tm;
  const Matrix lm = tm.transpose() * net.laplacian * tm;
  const Matrix ones_b = ones.transpose() * net.input;
  const Matrix c_ones = net.output * ones;
  const auto nss = split.t_stable.cols();
  const auto nus = split.t_unstable.cols();

  d.stable.e = block_diag(kron(mm, agent.e), mp * Matrix::Identity(nss, nss));
  d.stable.a = block_diag(kron(mm, agent.a) - kron(lm, bkc),
                          mp * split.s_stable.transpose() * agent.a * split.t_stable);
  d.stable.b.resize(d.stable.a.rows(), net.input.cols() * agent.b.cols());
  d.stable.b << kron(tm.transpose() * net.input, agent.b),
      kron(ones_b, split.s_stable.transpose() * agent.b);
  d.stable.c.resize(net.output.rows() * agent.c.rows(), d.stable.a.cols());
  d.stable.c << kron(net.output * tm, agent.c), kron(c_ones, agent.c * split.t_stable);

  d.unstable.e = mp * Matrix::Identity(nus, nus);
  d.unstable.a = mp * split.s_unstable.transpose() * agent.a * split.t_unstable;
  d.unstable.b = kron(ones_b, split.s_unstable.transpose() * agent.b);
  d.unstable.c = kron(c_ones, agent.c * split.t_unstable);

  d.consensus_residue = c_ones * ones_b / mp;
  return d;
}

StableDecomposition decompose_mas(const LinearMas &sys)
{
  sys.validate();
  const SyncReport rep = is_synchronized(sys);
  if (!rep.synchronized)
  {
    throw NotHurwitz("decompose_mas: system is not synchronized (lambda = " +
                         std::to_string(rep.witness_lambda) + ")",
                     rep.max_real_part, 0.0);
  }
  return decompose_network(network_data(sys), sys.agent, split_agent(sys.agent));
}

ComplexMatrix transfer(const LtiSystem &sys, Complex s)
{
  if (sys.a.rows() == 0)
  {
    return ComplexMatrix::Zero(sys.c.rows(), sys.b.cols());
  }
  const ComplexMatrix pencil = s * sys.e.cast<Complex>() - sys.a.cast<Complex>();
  return sys.c.cast<Complex>() * pencil.partialPivLu().solve(sys.b.cast<Complex>());
}

double sigma_max(const ComplexMatrix &g)
{
  if (g.size() == 0)
  {
    return 0.0;
  }
  const ComplexMatrix gram = g.rows() >= g.cols() ? ComplexMatrix(g.adjoint() * g)
                                                  : ComplexMatrix(g * g.adjoint());
  if (gram.rows() == 1)
  {
    return std::sqrt(std::max(0.0, gram(0, 0).real()));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

LtiSystem error_system(const LtiSystem &full, const LtiSystem &reduced)
{
  if (full.b.cols() != reduced.b.cols() || full.c.rows() != reduced.c.rows())
  {
    throw InvalidArgument("error_system: input/output dimensions differ");
  }
  LtiSystem err;
  err.e = block_diag(full.e, reduced.e);
  err.a = block_diag(full.a, reduced.a);
  err.b.resize(full.b.rows() + reduced.b.rows(), full.b.cols());
  err.b << full.b, reduced.b;
  err.c.resize(full.c.rows(), full.c.cols() + reduced.c.cols());
  err.c << full.c, -reduced.c;
  return err;
}

double h2_norm(const LtiSystem &sys)
{
  if (sys.a.rows() == 0)
  {
    return 0.0;
  }
  const Matrix x = solve_gen_lyapunov(sys.a, sys.e, sys.b);
  return std::sqrt(std::max(0.0, (sys.c * x * sys.c.transpose()).trace()));
}

namespace
{

double golden_max(const LtiSystem &sys, double a, double b, double tol, double &arg)
{
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  auto g = [&](double w) { return sigma_max(transfer(sys, Complex(0.0, w))); };
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = g(x1);
  double f2 = g(x2);
  for (int it = 0; it < 200; ++it)
  {
    const double mid = 0.5 * (a + b);
    if (b - a <= tol * std::max(mid, 1e-12))
    {
      break;
    }
    if (f1 >= f2)
    {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = g(x1);
    }
    else
    {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = g(x2);
    }
  }
  if (f1 >= f2)
  {
    arg = x1;
    return f1;
  }
  arg = x2;
  return f2;
}

}  // namespace

HinfResult hinf_norm(const LtiSystem &sys, const HinfOptions &opts)
{
  HinfResult res;
  if (sys.a.rows() == 0)
  {
    return res;
  }
  std::vector<double> grid;
  grid.reserve(opts.grid_points + 1 + static_cast<std::size_t>(sys.a.rows()));
  grid.push_back(0.0);
  const double l0 = std::log10(opts.omega_min);
  const double l1 = std::log10(opts.omega_max);
  for (std::size_t i = 0; i < opts.grid_points; ++i)
  {
    const double frac =
        opts.grid_points > 1 ? static_cast<double>(i) / static_cast<double>(opts.grid_points - 1)
                             : 0.0;
    grid.push_back(std::pow(10.0, l0 + (l1 - l0) * frac));
  }
  if (opts.pole_frequencies)
  {
    const ComplexVector ev = pencil_eigenvalues(sys.a, sys.e);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
    {
      const double w = std::abs(ev(i).imag());
      if (w > 0.0 && std::isfinite(w))
      {
        grid.push_back(w);
      }
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    vals[i] = sigma_max(transfer(sys, Complex(0.0, grid[i])));
  }
  const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) -
                                             vals.begin());
  res.value = vals[best];
  res.omega = grid[best];
  if (!opts.refine)
  {
    return res;
  }
  // Refine the largest local maxima of the grid.
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    const bool left = i == 0 || vals[i] >= vals[i - 1];
    const bool right = i + 1 == grid.size() || vals[i] >= vals[i + 1];
    if (left && right)
    {
      peaks.push_back(i);
    }
  }
  std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
  if (peaks.size() > 5)
  {
    peaks.resize(5);
  }
  for (auto i : peaks)
  {
    const double a = grid[i == 0 ? 0 : i - 1];
    const double b = grid[i + 1 == grid.size() ? i : i + 1];
    if (b <= a)
    {
      continue;
    }
    double arg = 0.0;
    const double v = golden_max(sys, a, b, opts.tol, arg);
    if (v > res.value)
    {
      res.value = v;
      res.omega = arg;
    }
  }
  return res;
}

bool identical_realizations(const LtiSystem &a, const LtiSystem &b)
{
  auto same = [](const Matrix &x, const Matrix &y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  return same(a.e, b.e) && same(a.a, b.a) && same(a.b, b.b) && same(a.c, b.c);
}

ErrorValue h2_error(const LtiSystem &full, const LtiSystem &reduced)
{
  ErrorValue out;
  if (identical_realizations(full, reduced))
  {
    return out;
  }
  out.absolute = h2_norm(error_system(full, reduced));
  const double base = h2_norm(full);
  out.relative = base > 0.0 ? out.absolute / base : out.absolute;
  return out;
}

ErrorValue hinf_error(const LtiSystem &full, const LtiSystem &reduced, const HinfOptions &opts)
{
  if (identical_realizations(full, reduced))
  {
    return {};
  }
  const LtiSystem err = error_system(full, reduced);
  if (err.a.rows() > 0 && spectral_abscissa(err.a, err.e) >= kHurwitzThreshold)
  {
    throw NotHurwitz("hinf_error: error system is not asymptotically stable",
                     spectral_abscissa(err.a, err.e), 0.0);
  }
  ErrorValue out;
  out.absolute = hinf_norm(err, opts).value;
  const double base = hinf_norm(full, opts).value;
  out.relative = base > 0.0 ? out.absolute / base : out.absolute;
  return out;
}

void require_same_unstable_part(const StableDecomposition &a, const StableDecomposition &b,
                                const AgentDynamics &agent_a, const AgentDynamics &agent_b)
{
  auto same = [](const Matrix &x, const Matrix &y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           (x - y).norm() <= 1e-8 * std::max(1.0, x.norm());
  };
  if (!same(agent_a.e, agent_b.e) || !same(agent_a.a, agent_b.a) || !same(agent_a.b, agent_b.b) ||
      !same(agent_a.c, agent_b.c) || !same(agent_a.k, agent_b.k))
  {
    throw UnstablePartMismatch("systems use different agent dynamics");
  }
  if (!same(a.consensus_residue, b.consensus_residue))
  {
    throw UnstablePartMismatch(
        "non-asymptotically stable parts differ; the error system is unbounded");
  }
}

ErrorValue h2_error(const LinearMas &sys, const LinearMas &red)
{
  const StableDecomposition a = decompose_mas(sys);
  const StableDecomposition b = decompose_mas(red);
  require_same_unstable_part(a, b, sys.agent, red.agent);
  return h2_error(a.stable, b.stable);
}

ErrorValue hinf_error(const LinearMas &sys, const LinearMas &red, const HinfOptions &opts)
{
  const StableDecomposition a = decompose_mas(sys);
  const StableDecomposition b = decompose_mas(red);
  require_same_unstable_part(a, b, sys.agent, red.agent);
  return hinf_error(a.stable, b.stable, opts);
}

double principal_angle_sin(const Matrix &v1, const Matrix &v2)
{
  if (v1.rows() != v2.rows())
  {
    throw InvalidArgument("principal_angle_sin: row counts differ");
  }
  auto basis = [](const Matrix &v) {
    const Svd s = svd(v);
    const double tol = 1e-10 * std::max(1.0, s.sigma.size() > 0 ? s.sigma(0) : 0.0);
    if (s.sigma.size() < v.cols() || (v.cols() > 0 && s.sigma(v.cols() - 1) <= tol))
    {
      throw InvalidArgument("principal_angle_sin: basis is rank deficient");
    }
    return s.u;
  };
  const Matrix q1 = basis(v1);
  const Matrix q2 = basis(v2);
  const Matrix residual = q1 - q2 * (q2.transpose() * q1);
  if (residual.size() == 0)
  {
    return 0.0;
  }
  Eigen::JacobiSVD<Matrix> dec(residual);
  return std::min(1.0, dec.singularValues()(0));
}

}  // namespace netred
