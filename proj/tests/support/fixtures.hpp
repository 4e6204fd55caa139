// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_TESTS_FIXTURES_HPP
#define NETRED_TESTS_FIXTURES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "netred/graph.hpp"
#include "netred/io.hpp"
#include "netred/linalg.hpp"
#include "netred/mas.hpp"
#include "netred/nonlinear.hpp"
#include "netred/partition.hpp"

namespace netred::testing
{

using Rng = std::mt19937_64;

inline std::string data_path(const std::string &name)
{
  return std::string(NETRED_TEST_DATA_DIR) + "/" + name;
}

inline LinearMas small_network()
{
  return to_linear(read_system_file(data_path("small_network.sys")));
}

inline Matrix random_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols)
{
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
  {
    for (Eigen::Index i = 0; i < rows; ++i)
    {
      m(i, j) = dist(rng);
    }
  }
  return m;
}

inline Vector random_vector(Rng &rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

inline Vector random_positive(Rng &rng, Eigen::Index n, double lo = 0.5, double hi = 2.0)
{
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    v(i) = dist(rng);
  }
  return v;
}

/// Random matrix with spectrum shifted to Re λ ≤ -margin.
inline Matrix random_hurwitz(Rng &rng, Eigen::Index n, double margin = 0.5)
{
  Matrix a = random_matrix(rng, n, n);
  const double shift = spectral_abscissa(a, Matrix::Identity(n, n));
  a -= (shift + margin) * Matrix::Identity(n, n);
  return a;
}

inline LtiSystem random_stable_lti(Rng &rng, Eigen::Index n, Eigen::Index m, Eigen::Index p,
                                   bool general_mass = false)
{
  LtiSystem sys;
  sys.e = Matrix::Identity(n, n);
  if (general_mass)
  {
    const Matrix g = random_matrix(rng, n, n);
    sys.e = g * g.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
  }
  sys.a = sys.e * random_hurwitz(rng, n);
  sys.b = random_matrix(rng, n, m);
  sys.c = random_matrix(rng, p, n);
  return sys;
}

/// Spanning tree plus extra edges with probability density.
inline WeightedGraph random_connected_graph(Rng &rng, std::size_t n, double density = 0.3,
                                            bool directed = false)
{
  std::uniform_real_distribution<double> weight(0.2, 3.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  for (std::size_t v = 1; v < n; ++v)
  {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    const std::size_t u = parent(rng);
    edges.push_back({u, v, weight(rng)});
    used[u][v] = used[v][u] = true;
    if (directed)
    {
      edges.push_back({v, u, weight(rng)});
    }
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = directed ? 0 : i + 1; j < n; ++j)
    {
      if (i != j && !used[i][j] && coin(rng) < density)
      {
        edges.push_back({i, j, weight(rng)});
        used[i][j] = true;
        if (!directed)
        {
          used[j][i] = true;
        }
      }
    }
  }
  return WeightedGraph(n, std::move(edges), directed);
}

/// Uniform labels conditioned on every cluster being non-empty.
inline Partition random_partition(Rng &rng, std::size_t n, std::size_t r)
{
  std::vector<std::size_t> labels(n);
  std::iota(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(r), std::size_t{0});
  std::uniform_int_distribution<std::size_t> pick(0, r - 1);
  for (std::size_t i = r; i < n; ++i)
  {
    labels[i] = pick(rng);
  }
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<std::size_t> relabel(r, r);
  std::size_t next = 0;
  for (auto &l : labels)
  {
    if (relabel[l] == r)
    {
      relabel[l] = next++;
    }
    l = relabel[l];
  }
  return partition_from_labels(labels);
}

inline AgentDynamics random_agent(Rng &rng, std::size_t order, std::size_t inputs,
                                  std::size_t outputs, bool identity_mass = true)
{
  const auto n = static_cast<Eigen::Index>(order);
  AgentDynamics agent;
  agent.e = Matrix::Identity(n, n);
  if (!identity_mass)
  {
    agent.e += 0.2 * random_matrix(rng, n, n);
  }
  agent.a = random_matrix(rng, n, n);
  agent.b = random_matrix(rng, n, static_cast<Eigen::Index>(inputs));
  agent.c = random_matrix(rng, static_cast<Eigen::Index>(outputs), n);
  agent.k = random_matrix(rng, static_cast<Eigen::Index>(inputs),
                          static_cast<Eigen::Index>(outputs));
  return agent;
}

inline LinearMas random_linear_mas(Rng &rng, std::size_t vertices, std::size_t order,
                                   bool identity_mass = true)
{
  LinearMas sys;
  sys.graph = random_connected_graph(rng, vertices);
  sys.inertias = random_positive(rng, static_cast<Eigen::Index>(vertices));
  sys.input = random_matrix(rng, static_cast<Eigen::Index>(vertices), 2);
  sys.output = random_matrix(rng, 3, static_cast<Eigen::Index>(vertices));
  sys.agent = order == 1 && identity_mass ? AgentDynamics::single_integrator()
                                          : random_agent(rng, order, 2, 2, identity_mass);
  return sys;
}

inline double relative_difference(const Matrix &a, const Matrix &b)
{
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

/// Transfer function derivative -C (sE - A)⁻¹ E (sE - A)⁻¹ B.
inline ComplexMatrix transfer_derivative(const LtiSystem &sys, Complex s)
{
  const ComplexMatrix pencil = s * sys.e.cast<Complex>() - sys.a.cast<Complex>();
  const auto lu = pencil.partialPivLu();
  const ComplexMatrix x = lu.solve(sys.b.cast<Complex>());
  const ComplexMatrix y = lu.solve(sys.e.cast<Complex>() * x);
  return -sys.c.cast<Complex>() * y;
}

/// H2 norm by quadrature of ‖H(iω)‖_F² over ω = tan θ, composite Simpson on [0, π/2).
inline double h2_norm_by_quadrature(const LtiSystem &sys, std::size_t intervals = 20000)
{
  const double pi = std::acos(-1.0);
  const double h = 0.5 * pi / static_cast<double>(intervals);
  auto integrand = [&](double theta) {
    if (theta >= 0.5 * pi)
    {
      return (sys.c * sys.e.partialPivLu().solve(sys.b)).squaredNorm();
    }
    const double omega = std::tan(theta);
    const double jac = 1.0 + omega * omega;
    return transfer(sys, Complex(0.0, omega)).squaredNorm() * jac;
  };
  double sum = integrand(0.0) + integrand(0.5 * pi);
  for (std::size_t k = 1; k < intervals; ++k)
  {
    sum += (k % 2 == 1 ? 4.0 : 2.0) * integrand(h * static_cast<double>(k));
  }
  return std::sqrt(sum * h / 3.0 / pi);
}

}  // namespace netred::testing

#endif  // NETRED_TESTS_FIXTURES_HPP
