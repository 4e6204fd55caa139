// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_MAS_HPP
#define NETRED_MAS_HPP

#include <cstddef>
#include <vector>

#include "netred/graph.hpp"
#include "netred/linalg.hpp"
#include "netred/partition.hpp"

namespace netred
{

/// Strict Hurwitz threshold on the largest real part of a pencil spectrum.
inline constexpr double kHurwitzThreshold = -1e-9;

/// Linear agent  E ẋ = A x + B v,  z = C x,  coupling through K.
struct AgentDynamics
{
  Matrix e;
  Matrix a;
  Matrix b;
  Matrix c;
  Matrix k;

  std::size_t order() const { return static_cast<std::size_t>(a.rows()); }
  std::size_t inputs() const { return static_cast<std::size_t>(b.cols()); }
  std::size_t outputs() const { return static_cast<std::size_t>(c.rows()); }
  bool is_single_integrator() const;

  /// Checks shapes and invertibility of E.
  void validate() const;

  static AgentDynamics single_integrator();
};

/// Descriptor realization  E ẋ = A x + B u,  y = C x.
struct LtiSystem
{
  Matrix e;
  Matrix a;
  Matrix b;
  Matrix c;

  std::size_t order() const { return static_cast<std::size_t>(a.rows()); }
};

/// Network of identical linear agents with inertias, input map and output map.
struct LinearMas
{
  WeightedGraph graph;
  Vector inertias;  ///< one positive entry per vertex
  Matrix input;     ///< vertices x external inputs
  Matrix output;    ///< external outputs x vertices
  AgentDynamics agent = AgentDynamics::single_integrator();

  std::size_t n_agents() const { return graph.n_vertices(); }

  /// Checks dimensions, positivity of inertias and connectivity.
  void validate() const;
};

/// Kronecker realization (M⊗E, M⊗A − L⊗BKC, 𝖡⊗B, 𝖢⊗C).
LtiSystem realize(const LinearMas &sys);

/// Input map with a unit entry at each (0-based) leader vertex, one column per leader.
Matrix leader_follower_input(std::size_t n_vertices, const std::vector<std::size_t> &leaders);

/// Output map W^{1/2} Rᵀ of an undirected graph.
Matrix incidence_output(const WeightedGraph &g);

struct SyncReport
{
  bool synchronized = true;
  double witness_lambda = 0.0;  ///< first failing λ, or the λ attaining max_real_part
  double max_real_part = 0.0;   ///< largest real part over all checked pencils
};

/// Evaluates the spectral abscissa of (A − λBKC, E).
double coupled_abscissa(const AgentDynamics &agent, double lambda);

/// Checks (A − λ_i BKC, E) at the nonzero eigenvalues λ_2..λ_n of (L, M).
SyncReport is_synchronized(const LinearMas &sys);

/// Samples λ uniformly over [λ_2, λ_n] (endpoints included).  A sampled check,
/// not a certificate.
SyncReport check_sync_preserved_for_all_partitions(const LinearMas &sys,
                                                   std::size_t samples = 101);

/// Reduced network with inertias PᵀMP, Laplacian PᵀLP, input Pᵀ𝖡 and output 𝖢P.
/// Reduced edges are the off-diagonal entries of PᵀAP above 1e-12.
LinearMas cluster_reduce(const LinearMas &sys, const Partition &p);

}  // namespace netred

#endif  // NETRED_MAS_HPP
