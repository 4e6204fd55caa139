// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "netred/clustering.hpp"
#include "netred/error.hpp"
#include "netred/stabsep.hpp"

using namespace netred;
using namespace netred::testing;

namespace
{

/// Rows drawn around well separated centers; returns the features and the generating partition.
std::pair<Matrix, Partition> planted(Rng &rng, std::size_t n, std::size_t r, Eigen::Index dim,
                                     double noise)
{
  const Partition p = random_partition(rng, n, r);
  const Matrix centers = 10.0 * random_matrix(rng, static_cast<Eigen::Index>(r), dim);
  Matrix f(static_cast<Eigen::Index>(n), dim);
  const auto labels = p.labels();
  for (std::size_t i = 0; i < n; ++i)
  {
    f.row(static_cast<Eigen::Index>(i)) =
        centers.row(static_cast<Eigen::Index>(labels[i])) + noise * random_matrix(rng, 1, dim);
  }
  return {f, p};
}

}  // namespace

TEST_CASE("clustering: feature rows")
{
  Matrix v(4, 2);
  v << 1, 2, 3, 4, 5, 6, 7, 8;
  CHECK(feature_rows(v, 1) == v);
  const Matrix f = feature_rows(v, 2);
  REQUIRE(f.rows() == 2);
  REQUIRE(f.cols() == 4);
  CHECK(f(0, 0) == 1.0);
  CHECK(f(0, 1) == 2.0);
  CHECK(f(0, 2) == 3.0);
  CHECK(f(1, 3) == 8.0);
  CHECK_THROWS_AS(feature_rows(v, 3), InvalidArgument);
}

TEST_CASE("clustering: combined basis")
{
  Rng rng(71);
  const Matrix v = orthonormalize(random_matrix(rng, 8, 3));
  const Matrix c = combined_basis(v, v, 3);
  CHECK(c.cols() == 3);
  CHECK(principal_angle_sin(c, v) <= 1e-10);
}

TEST_CASE("clustering: k-means cost equals the projection residual")
{
  Rng rng(73);
  for (int trial = 0; trial < 200; ++trial)
  {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 10);
    const std::size_t r = 1 + static_cast<std::size_t>(trial % static_cast<int>(n));
    const Eigen::Index k = 1 + trial % 4;
    const Matrix v = orthonormalize(random_matrix(rng, static_cast<Eigen::Index>(n), k));
    const Partition p = random_partition(rng, n, r);
    const ProjectionBound pb = kmeans_cost_equals_projection_bound(v, p);
    const Matrix chi = characteristic_matrix(p);
    const Matrix proj = chi * (chi.transpose() * chi).inverse() * chi.transpose();
    const double oracle = (v - proj * v).squaredNorm();
    CHECK(std::abs(pb.cost - oracle) <= 1e-10 * std::max(1.0, oracle));
    CHECK(std::abs(pb.frobenius_bound - oracle) <= 1e-10 * std::max(1.0, oracle));
    CHECK(std::abs(kmeans_cost(v, p) - oracle) <= 1e-10 * std::max(1.0, oracle));

    if (static_cast<std::size_t>(v.cols()) <= r)
    {
      const double s = principal_angle_sin(v, chi);
      CHECK(s * s <= pb.cost + 1e-12);
    }
  }
  CHECK_THROWS_AS(kmeans_cost_equals_projection_bound(2.0 * Matrix::Identity(4, 2),
                                                      Partition::singletons(4)),
                  InvalidArgument);
}

TEST_CASE("clustering: k-means recovers planted clusters")
{
  Rng rng(79);
  for (int trial = 0; trial < 20; ++trial)
  {
    const std::size_t n = 12 + static_cast<std::size_t>(trial % 20);
    const std::size_t r = 2 + static_cast<std::size_t>(trial % 5);
    const auto [f, truth] = planted(rng, n, r, 3, 0.01);
    KMeansOptions opts;
    opts.seed = static_cast<std::uint64_t>(trial);
    const auto [p, km] = kmeans_cluster(f, r, opts);
    CHECK(p == truth);
    CHECK(km.cost == doctest::Approx(kmeans_cost(f, p)));
    CHECK(partition_from_labels(km.labels) == p);
    for (std::size_t i = 1; i < km.cost_history.size(); ++i)
    {
      CHECK(km.cost_history[i] <= km.cost_history[i - 1] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("clustering: k-means is deterministic and independent of the worker count")
{
  Rng rng(83);
  const Matrix f = random_matrix(rng, 40, 3);
  KMeansOptions one;
  one.seed = 5;
  one.workers = 1;
  KMeansOptions many = one;
  many.workers = 4;
  const auto a = kmeans_cluster(f, 6, one);
  const auto b = kmeans_cluster(f, 6, many);
  const auto c = kmeans_cluster(f, 6, one);
  CHECK(a.first == b.first);
  CHECK(a.first == c.first);
  CHECK(a.second.cost == b.second.cost);
  CHECK(a.second.restart == b.second.restart);
}

TEST_CASE("clustering: k-means is no worse than any planted partition on random data")
{
  Rng rng(89);
  for (int trial = 0; trial < 20; ++trial)
  {
    const Matrix f = random_matrix(rng, 7, 2);
    const auto [p, km] = kmeans_cluster(f, 3);
    double best = std::numeric_limits<double>::infinity();
    for (const auto &q : enumerate_partitions(7, 3))
    {
      best = std::min(best, kmeans_cost(f, q));
    }
    CHECK(km.cost <= best * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("clustering: QR pivoting")
{
  Rng rng(97);
  for (int trial = 0; trial < 20; ++trial)
  {
    const std::size_t r = 2 + static_cast<std::size_t>(trial % 4);
    const std::size_t n = r + 3 + static_cast<std::size_t>(trial % 7);
    const auto [f, truth] = planted(rng, n, r, static_cast<Eigen::Index>(r), 0.0);
    CHECK(qr_cluster(f, r) == truth);
  }
  CHECK_THROWS_AS(qr_cluster(Matrix::Ones(5, 2), 2), InvalidArgument);
  CHECK_THROWS_AS(qr_cluster(Matrix::Identity(4, 2), 3), InvalidArgument);
}
