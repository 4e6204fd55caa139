// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_STABSEP_HPP
#define NETRED_STABSEP_HPP

#include <cstddef>

#include "netred/linalg.hpp"
#include "netred/mas.hpp"

namespace netred
{

/// Lower bidiagonal basis of the M-orthogonal complement of the ones vector.
struct MasStableBasis
{
  Matrix t_minus;  ///< n x (n-1), unit columns, t_minusᵀ M 1 = 0
  double m_plus;   ///< 1ᵀ M 1
};

MasStableBasis mas_stable_basis(const Vector &inertias);

/// Agent-level split of (A, E) into stable and remaining invariant subspaces with
/// Sᵀ E T = I.
struct AgentSplit
{
  Matrix t_stable;
  Matrix t_unstable;
  Matrix s_stable;
  Matrix s_unstable;
};

AgentSplit split_agent(const AgentDynamics &agent);

/// Network data in the form consumed by the decomposition; the Laplacian is
/// passed explicitly so reduced models can skip rebuilding a graph.
struct NetworkData
{
  Vector inertias;
  Matrix laplacian;
  Matrix input;
  Matrix output;
};

NetworkData network_data(const LinearMas &sys);

/// Block decomposition of a synchronized network into an asymptotically stable
/// part and the consensus part.  The full-space bases are
/// 𝒯₋ = [T₋⊗I, 1⊗T₋ᴬ], 𝒮₋ = [T₋⊗I, 1⊗S₋ᴬ], 𝒯₊ = 1⊗T₊ᴬ and 𝒮₊ = 1⊗S₊ᴬ.
struct StableDecomposition
{
  Matrix t_minus;
  Matrix s_minus;
  Matrix t_plus;
  Matrix s_plus;
  LtiSystem stable;
  LtiSystem unstable;
  double m_plus = 0.0;
  Matrix consensus_residue;  ///< 𝖢 1 1ᵀ 𝖡 / m₊
};

/// Decomposition without the synchronization check.
StableDecomposition decompose_network(const NetworkData &net, const AgentDynamics &agent,
                                      const AgentSplit &split);

/// Checks synchronization, then decomposes.  Throws NotHurwitz for
/// non-synchronized systems.
StableDecomposition decompose_mas(const LinearMas &sys);

/// Transfer matrix C (sE − A)⁻¹ B.
ComplexMatrix transfer(const LtiSystem &sys, Complex s);

/// Largest singular value of a complex matrix.
double sigma_max(const ComplexMatrix &g);

/// Stable error realization (diag(E, Ê), diag(A, Â), [B; B̂], [C, −Ĉ]).
LtiSystem error_system(const LtiSystem &full, const LtiSystem &reduced);

/// H2 norm from the controllability Gramian.  Throws NotHurwitz for unstable
/// realizations.
double h2_norm(const LtiSystem &sys);

struct HinfOptions
{
  std::size_t grid_points = 400;
  double omega_min = 1e-3;
  double omega_max = 1e3;
  double tol = 1e-6;  ///< relative tolerance on ω for the golden-section refinement
  bool refine = true;
  bool pole_frequencies = true;  ///< add |Im λ| of the realization to the grid
};

struct HinfResult
{
  double value = 0.0;
  double omega = 0.0;
};

/// Supremum over ω of σ_max(H(iω)) by grid search and golden-section refinement.
HinfResult hinf_norm(const LtiSystem &sys, const HinfOptions &opts = {});

struct ErrorValue
{
  double absolute = 0.0;
  double relative = 0.0;
};

/// True when all four matrices agree exactly.
bool identical_realizations(const LtiSystem &a, const LtiSystem &b);

/// Errors between stable realizations; relative errors divide by the norm of
/// full.  Identical realizations give exact zeros.
ErrorValue h2_error(const LtiSystem &full, const LtiSystem &reduced);
ErrorValue hinf_error(const LtiSystem &full, const LtiSystem &reduced,
                      const HinfOptions &opts = {});

/// Errors between two networks evaluated on their stable parts.  Throws
/// UnstablePartMismatch when the consensus parts differ by more than 1e-8.
ErrorValue h2_error(const LinearMas &sys, const LinearMas &red);
ErrorValue hinf_error(const LinearMas &sys, const LinearMas &red, const HinfOptions &opts = {});

/// Throws UnstablePartMismatch unless both decompositions share the consensus part.
void require_same_unstable_part(const StableDecomposition &a, const StableDecomposition &b,
                                const AgentDynamics &agent_a, const AgentDynamics &agent_b);

/// sin of the largest principal angle between span(v1) and span(v2).
double principal_angle_sin(const Matrix &v1, const Matrix &v2);

}  // namespace netred

#endif  // NETRED_STABSEP_HPP
