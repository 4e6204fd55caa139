// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_ODE_HPP
#define NETRED_ODE_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "netred/linalg.hpp"

namespace netred
{

/// Right-hand side f(t, x) written into dx (already sized).
using OdeRhs = std::function<void(double t, const Vector &x, Vector &dx)>;

/// Jacobian ∂f/∂x written into jac (already sized).
using OdeJacobian = std::function<void(double t, const Vector &x, Matrix &jac)>;

/// Mass-form initial value problem  M ẋ = f(t, x),  x(t0) = x0.
struct OdeProblem
{
  OdeRhs rhs;
  OdeJacobian jacobian;  ///< optional; forward differences when empty
  Vector mass_diagonal;  ///< used when non-empty (takes precedence over mass)
  Matrix mass;           ///< dense mass; identity when both are empty
  Vector x0;
  double t0 = 0.0;
  double t1 = 1.0;
};

struct OdeOptions
{
  double rtol = 1e-6;
  double atol = 1e-9;
  double first_step = 0.0;  ///< 0 selects automatically
  double max_step = 0.0;    ///< 0 means unbounded
  /// Output times.  When empty the solution holds the initial state and every
  /// accepted step.
  std::vector<double> sample_times;
};

struct OdeSolution
{
  std::vector<double> times;
  std::vector<Vector> states;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t jacobian_evaluations = 0;
  std::size_t factorizations = 0;

  /// States as columns.
  Matrix state_matrix() const;
};

/// Variable-order (1-5) variable-step BDF integrator in the NDF formulation with
/// simplified Newton iterations and Nordsieck-free backward-difference storage.
/// Samples are produced by the interpolating polynomial of each step.
///
/// Throws IntegrationError carrying the last reached time on step-size underflow
/// or non-finite right-hand side values.
OdeSolution integrate_ode(const OdeProblem &problem, const OdeOptions &options = {});

/// Uniform grid of count points spanning [t0, t1] (both included).
std::vector<double> linspace(double t0, double t1, std::size_t count);

}  // namespace netred

#endif  // NETRED_ODE_HPP
