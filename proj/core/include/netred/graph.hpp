// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_GRAPH_HPP
#define NETRED_GRAPH_HPP

#include <cstddef>
#include <vector>

#include "netred/linalg.hpp"

namespace netred
{

/// Weighted edge between 0-based vertices.  Undirected edges are stored with
/// source < target; directed edges point from source to target.
struct Edge
{
  std::size_t source;
  std::size_t target;
  double weight;

  friend bool operator==(const Edge &, const Edge &) = default;
};

/// Weighted graph on vertices {0, ..., n-1}.  Validated at construction and
/// immutable afterwards.
class WeightedGraph
{
public:
  WeightedGraph() = default;
  WeightedGraph(std::size_t n_vertices, std::vector<Edge> edges, bool directed = false);

  std::size_t n_vertices() const noexcept { return n_; }
  std::size_t n_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge> &edges() const noexcept { return edges_; }
  bool directed() const noexcept { return directed_; }

  friend bool operator==(const WeightedGraph &, const WeightedGraph &) = default;

private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  bool directed_ = false;
};

struct GraphMatrices
{
  Matrix adjacency;  ///< a_ij = weight of the edge j -> i
  Matrix in_degree;  ///< diag(adjacency * 1)
  Matrix laplacian;  ///< in_degree - adjacency
  Matrix incidence;  ///< -1 at the source, +1 at the target of each edge
  Matrix weight;     ///< diagonal edge weights in edge order
};

GraphMatrices build_matrices(const WeightedGraph &g);

/// Adjacency matrix only.
Matrix adjacency_matrix(const WeightedGraph &g);

/// Laplacian matrix only.
Matrix laplacian_matrix(const WeightedGraph &g);

/// True iff every pair of vertices is joined by a path (union-find).
/// Throws InvalidArgument for directed graphs.
bool is_connected(const WeightedGraph &g);

/// 4-neighbour lattice with rows*cols vertices numbered row-major.
WeightedGraph grid_graph(std::size_t rows, std::size_t cols, double weight);

/// Undirected graph whose edges are the off-diagonal upper-triangular entries of a
/// symmetric adjacency matrix exceeding tol.  Diagonal entries are ignored.
WeightedGraph graph_from_adjacency(const Matrix &adjacency, double tol = 1e-12);

}  // namespace netred

#endif  // NETRED_GRAPH_HPP
