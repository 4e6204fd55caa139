// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_NONLINEAR_HPP
#define NETRED_NONLINEAR_HPP

#include <cstddef>
#include <functional>

#include "netred/graph.hpp"
#include "netred/linalg.hpp"
#include "netred/mas.hpp"
#include "netred/ode.hpp"
#include "netred/partition.hpp"

namespace netred
{

using ConstVectorRef = Eigen::Ref<const Vector>;
using VectorRef = Eigen::Ref<Vector>;
using MatrixRef = Eigen::Ref<Matrix>;

/// Control-affine agent  ẋ = A(x) + B(x) v,  z = C(x),  coupled through K(z_i, z_j).
/// Callbacks write into pre-sized outputs and must be pure.
struct AgentCallbacks
{
  std::size_t order = 0;    ///< n
  std::size_t inputs = 0;   ///< m
  std::size_t outputs = 0;  ///< p
  std::function<void(ConstVectorRef x, VectorRef out)> drift;
  std::function<void(ConstVectorRef x, MatrixRef out)> input_gain;  ///< n x m
  std::function<void(ConstVectorRef x, VectorRef out)> output;
  std::function<void(ConstVectorRef zi, ConstVectorRef zj, VectorRef out)> coupling;
};

/// Network of identical nonlinear agents.  self_weights carries the diagonal of
/// PᵀAP produced by clustering (zero for networks without self-loops).
struct NonlinearMas
{
  WeightedGraph graph;
  Vector inertias;
  Matrix input;   ///< vertices x external inputs
  Matrix output;  ///< external outputs x vertices
  AgentCallbacks agent;
  Vector self_weights;

  std::size_t n_agents() const { return graph.n_vertices(); }
  std::size_t state_dim() const { return graph.n_vertices() * agent.order; }
  std::size_t input_dim() const { return static_cast<std::size_t>(input.cols()) * agent.inputs; }

  /// Checks dimensions and probes every callback at zero.
  void validate() const;

  /// Diagonal of the mass matrix M ⊗ I.
  Vector mass_diagonal() const;
};

/// Mass-form right-hand side f with (M ⊗ I) ẋ = f(x, u).
Vector rhs(const NonlinearMas &sys, const Vector &x, const Vector &u);

/// In-place variant; dx must have state_dim entries.
void rhs_into(const NonlinearMas &sys, const Vector &x, const Vector &u, Vector &dx);

/// Stacked outputs y_l = Σ_j c_lj C(x_j).
Vector output(const NonlinearMas &sys, const Vector &x);

/// Reduced network with inertias PᵀM1, adjacency PᵀAP (diagonal moved into
/// self_weights), input Pᵀ𝖡, output 𝖢P and the same callbacks.
NonlinearMas cluster_reduce_nonlinear(const NonlinearMas &sys, const Partition &p);

/// Callbacks realizing a linear agent with E = I:  A(x) = Ax, B(x) = B, C(x) = Cx,
/// K(z_i, z_j) = K (z_j − z_i).
AgentCallbacks linear_agent(const AgentDynamics &agent);

/// Nonlinear form of a linear network (requires E = I).
NonlinearMas linear_instantiation(const LinearMas &sys);

struct VanDerPolParams
{
  double mu = 0.5;
  double sigma = 0.1;
  double c = 100.0;
};

/// ẋ₁ = x₂ + σ v,  ẋ₂ = μ(1 − x₁²)x₂ − x₁ − c v,  z = x₁ + x₂,  K(z_i, z_j) = z_i − z_j.
AgentCallbacks vanderpol_agent(const VanDerPolParams &params);

/// Van der Pol agents on a rows x cols grid with unit weights, unit inertias,
/// the first agent driven by the single input, and identity output map.
NonlinearMas vanderpol_network(const VanDerPolParams &params = {}, std::size_t rows = 10,
                               std::size_t cols = 10);

using InputSignal = std::function<Vector(double t)>;

/// e^{-t} on every input channel.
InputSignal training_input(std::size_t channels);

/// e^{-t/10} sin t on every input channel.
InputSignal test_input(std::size_t channels);

/// Integrates (M ⊗ I) ẋ = f(x, u(t)).  With empty sample_times the solution holds
/// every accepted step.
OdeSolution simulate(const NonlinearMas &sys, const Vector &x0, const InputSignal &u, double t0,
                     double t1, const std::vector<double> &sample_times = {},
                     const OdeOptions &opts = {});

struct TrajectoryError
{
  double l2_relative = 0.0;  ///< ‖x − (P⊗I)x̂‖_L2 / ‖x‖_L2 (trapezoidal)
  double max_pointwise = 0.0;
};

/// Compares sampled trajectories of a full and a clustered model on shared times.
TrajectoryError trajectory_error(const OdeSolution &full, const OdeSolution &reduced,
                                 const Partition &p, std::size_t block_size);

/// Simulates both models on a uniform grid of `samples` points and returns the
/// relative L2 state error.
double l2_relative_error(const NonlinearMas &sys, const NonlinearMas &red, const Partition &p,
                         const Vector &x0, const InputSignal &u, double t0, double t1,
                         std::size_t samples = 1000, const OdeOptions &opts = {});

}  // namespace netred

#endif  // NETRED_NONLINEAR_HPP
