// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_CLUSTERING_HPP
#define NETRED_CLUSTERING_HPP

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "netred/linalg.hpp"
#include "netred/partition.hpp"

namespace netred
{

/// One feature per agent: row i of the basis when block_size is 1, otherwise
/// agent i's block_size x cols block flattened row-major.
Matrix feature_rows(const Matrix &basis, std::size_t block_size = 1);

/// First r left singular vectors of [V W].
Matrix combined_basis(const Matrix &v, const Matrix &w, std::size_t r);

/// QR-pivot clustering of the feature rows.  A column-pivoted QR of Fᵀ selects
/// r representatives; every agent joins the representative with the largest
/// |coefficient| in R₁₁⁻¹R (lowest index on ties).  Throws InvalidArgument when
/// rank(F) < r.
Partition qr_cluster(const Matrix &features, std::size_t r);

struct KMeansOptions
{
  std::size_t n_init = 50;
  std::size_t max_iter = 300;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct KMeansResult
{
  std::vector<std::size_t> labels;
  Matrix centers;
  double cost = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t restart = 0;
  std::vector<double> cost_history;  ///< cost after each Lloyd sweep of the winning restart
};

/// Lloyd iterations from k-means++ seeds with n_init restarts; the lowest-cost
/// restart wins, ties going to the lowest restart index.  Empty clusters are
/// refilled with the farthest point of the highest-cost cluster.
std::pair<Partition, KMeansResult> kmeans_cluster(const Matrix &features, std::size_t r,
                                                  const KMeansOptions &opts = {});

/// Sum of squared distances of the rows of features to their cluster means.
double kmeans_cost(const Matrix &features, const Partition &p);

struct ProjectionBound
{
  double cost = 0.0;             ///< k-means cost of the rows of V
  double frobenius_bound = 0.0;  ///< ‖(I − P(PᵀP)⁻¹Pᵀ)V‖_F²
};

/// Both sides of the k-means / projection identity.  Rejects V with VᵀV ≠ I.
ProjectionBound kmeans_cost_equals_projection_bound(const Matrix &v, const Partition &p);

}  // namespace netred

#endif  // NETRED_CLUSTERING_HPP
