// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_IO_HPP
#define NETRED_IO_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "netred/graph.hpp"
#include "netred/mas.hpp"
#include "netred/nonlinear.hpp"
#include "netred/ode.hpp"
#include "netred/search.hpp"

namespace netred
{

enum class AgentKind
{
  single_integrator,
  linear,
  vanderpol
};

enum class OutputKind
{
  incidence,  ///< 𝖶^{1/2} 𝖱ᵀ
  identity,
  matrix
};

struct GridSpec
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  double weight = 1.0;
};

/// Parsed system description.  Vertex indices are 0-based in memory and
/// 1-based in the text form.
struct SystemFile
{
  std::size_t vertices = 0;
  bool directed = false;
  std::optional<GridSpec> grid;  ///< replaces the edge list when set
  std::vector<Edge> edges;

  std::optional<double> uniform_inertia;
  Vector inertias;  ///< used when uniform_inertia is empty

  std::optional<std::vector<std::size_t>> leaders;
  Matrix input;  ///< used when leaders is empty

  OutputKind output_kind = OutputKind::identity;
  Matrix output;  ///< used for OutputKind::matrix

  AgentKind agent_kind = AgentKind::single_integrator;
  AgentDynamics agent;  ///< used for AgentKind::linear
  VanDerPolParams vanderpol;

  WeightedGraph graph() const;
};

/// Parses the sectioned text format; throws ParseError with 1-based positions.
SystemFile parse_system(const std::string &text);

/// Reads and parses a file; I/O failures are reported as ParseError at line 0.
SystemFile read_system_file(const std::string &path);

/// Canonical serialization with 17 significant digits.
std::string write_system(const SystemFile &sf);

/// File form of a linear network with explicit matrices.
SystemFile system_file_from(const LinearMas &sys);

/// Linear network; throws InvalidArgument for Van der Pol agents.
LinearMas to_linear(const SystemFile &sf);

/// Nonlinear network; linear agents require E = I.
NonlinearMas to_nonlinear(const SystemFile &sf);

/// Shortest round-trip decimal form of a double ("%.17g").
std::string format_number(double x);

/// `rank,rel_error,partition`
void write_ranked_csv(std::ostream &os, const std::vector<RankedPartition> &rows);

/// `t,x_1_1,x_1_2,...` with agent-major state ordering.
void write_trajectory_csv(std::ostream &os, const OdeSolution &sol, std::size_t agent_order);

/// `index,sigma` with 1-based indices.
void write_singular_values_csv(std::ostream &os, const Vector &sigma);

/// Input signal from an expression in t.  Channels are separated by ';'; a
/// single expression is broadcast to all channels.  Supports + - * / ^, unary
/// minus, parentheses, pi, e and exp, sin, cos, tan, tanh, sqrt, log, abs.
InputSignal parse_input_expression(const std::string &text, std::size_t channels);

}  // namespace netred

#endif  // NETRED_IO_HPP
