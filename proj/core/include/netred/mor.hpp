// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_MOR_HPP
#define NETRED_MOR_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netred/linalg.hpp"
#include "netred/mas.hpp"
#include "netred/stabsep.hpp"

namespace netred
{

/// Tall projection bases with agent block structure.
struct ProjectionBasis
{
  Matrix v;
  Matrix w;  ///< equals v for Galerkin projections
  std::size_t block_size = 1;
  std::string method;
  bool orthonormal = false;  ///< vᵀv = I

  // Diagnostics.
  std::size_t iterations = 0;
  bool converged = true;
  double final_shift_change = 0.0;
  std::vector<double> shift_changes;
  ComplexVector shifts;
  Vector hankel_values;
  double error_bound = 0.0;
  std::string warning;
};

struct IrkaOptions
{
  std::size_t max_iter = 200;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::optional<ComplexVector> initial_shifts;
};

/// Tangential IRKA.  Returned bases satisfy Wᵀ E V = I.
ProjectionBasis irka(const LtiSystem &sys, std::size_t order, const IrkaOptions &opts = {});

/// Square-root balanced truncation.  Hankel values below 1e-12 σ₁ are discarded,
/// which may lower the returned order.
ProjectionBasis balanced_truncation(const LtiSystem &sys, std::size_t order);

/// Leading left singular vectors of the snapshot matrix (W = V).
ProjectionBasis pod(const Matrix &snapshots, std::size_t order, std::size_t block_size = 1);

/// Petrov–Galerkin projection (Wᵀ E V, Wᵀ A V, Wᵀ B, C V).
LtiSystem project(const LtiSystem &sys, const Matrix &v, const Matrix &w);

struct FullBasis
{
  Matrix v;
  Matrix w;
};

/// [𝒯₋ V₋, 𝒯₊] and [𝒮₋ W₋, 𝒮₊] for a basis computed on the stable part.
FullBasis assemble_unstable_aware_basis(const StableDecomposition &decomp,
                                        const ProjectionBasis &inner);

}  // namespace netred

#endif  // NETRED_MOR_HPP
