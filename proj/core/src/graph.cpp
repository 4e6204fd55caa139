// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "netred/error.hpp"

namespace netred
{

WeightedGraph::WeightedGraph(std::size_t n_vertices, std::vector<Edge> edges, bool directed)
  : n_(n_vertices), edges_(std::move(edges)), directed_(directed)
{
  if (n_ == 0)
  {
    throw InvalidArgument("graph: vertex count must be positive");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto &e : edges_)
  {
    if (e.source >= n_ || e.target >= n_)
    {
      throw InvalidArgument("graph: vertex id out of range");
    }
    if (e.source == e.target)
    {
      throw InvalidArgument("graph: self-loop at vertex " + std::to_string(e.source + 1));
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
    {
      throw InvalidArgument("graph: edge weights must be positive and finite");
    }
    if (!directed_ && e.source > e.target)
    {
      std::swap(e.source, e.target);
    }
    if (!seen.emplace(e.source, e.target).second)
    {
      throw InvalidArgument("graph: duplicate edge " + std::to_string(e.source + 1) + "-" +
                            std::to_string(e.target + 1));
    }
  }
}

Matrix adjacency_matrix(const WeightedGraph &g)
{
  const auto n = static_cast<Eigen::Index>(g.n_vertices());
  Matrix a = Matrix::Zero(n, n);
  for (const auto &e : g.edges())
  {
    const auto s = static_cast<Eigen::Index>(e.source);
    const auto t = static_cast<Eigen::Index>(e.target);
    a(t, s) = e.weight;
    if (!g.directed())
    {
      a(s, t) = e.weight;
    }
  }
  return a;
}

Matrix laplacian_matrix(const WeightedGraph &g)
{
  const Matrix a = adjacency_matrix(g);
  Matrix l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

GraphMatrices build_matrices(const WeightedGraph &g)
{
  GraphMatrices m;
  const auto n = static_cast<Eigen::Index>(g.n_vertices());
  const auto ne = static_cast<Eigen::Index>(g.n_edges());
  m.adjacency = adjacency_matrix(g);
  m.in_degree = Matrix::Zero(n, n);
  m.in_degree.diagonal() = m.adjacency.rowwise().sum();
  m.laplacian = m.in_degree - m.adjacency;
  m.incidence = Matrix::Zero(n, ne);
  m.weight = Matrix::Zero(ne, ne);
  for (Eigen::Index k = 0; k < ne; ++k)
  {
    const auto &e = g.edges()[static_cast<std::size_t>(k)];
    m.incidence(static_cast<Eigen::Index>(e.source), k) = -1.0;
    m.incidence(static_cast<Eigen::Index>(e.target), k) = 1.0;
    m.weight(k, k) = e.weight;
  }
  return m;
}

bool is_connected(const WeightedGraph &g)
{
  if (g.directed())
  {
    throw InvalidArgument("is_connected: directed graphs are not supported");
  }
  std::vector<std::size_t> parent(g.n_vertices());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v)
    {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::size_t components = g.n_vertices();
  for (const auto &e : g.edges())
  {
    const auto a = find(e.source);
    const auto b = find(e.target);
    if (a != b)
    {
      parent[std::max(a, b)] = std::min(a, b);
      --components;
    }
  }
  return components == 1;
}

WeightedGraph grid_graph(std::size_t rows, std::size_t cols, double weight)
{
  if (rows == 0 || cols == 0)
  {
    throw InvalidArgument("grid_graph: dimensions must be positive");
  }
  std::vector<Edge> edges;
  edges.reserve(rows * (cols - 1) + cols * (rows - 1));
  for (std::size_t r = 0; r < rows; ++r)
  {
    for (std::size_t c = 0; c < cols; ++c)
    {
      const std::size_t i = r * cols + c;
      if (c + 1 < cols)
      {
        edges.push_back({i, i + 1, weight});
      }
      if (r + 1 < rows)
      {
        edges.push_back({i, i + cols, weight});
      }
    }
  }
  return WeightedGraph(rows * cols, std::move(edges));
}

WeightedGraph graph_from_adjacency(const Matrix &adjacency, double tol)
{
  const auto n = adjacency.rows();
  if (adjacency.cols() != n)
  {
    throw InvalidArgument("graph_from_adjacency: matrix must be square");
  }
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < n; ++i)
  {
    for (Eigen::Index j = i + 1; j < n; ++j)
    {
      if (adjacency(i, j) > tol)
      {
        edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), adjacency(i, j)});
      }
    }
  }
  return WeightedGraph(static_cast<std::size_t>(n), std::move(edges));
}

}  // namespace netred
