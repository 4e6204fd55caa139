// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "netred/error.hpp"
#include "netred/partition.hpp"

using namespace netred;
using namespace netred::testing;

namespace
{

/// Canonical label vectors of every surjection {0..n-1} -> {0..r-1}.
std::set<std::vector<std::size_t>> brute_force_partitions(std::size_t n, std::size_t r)
{
  std::set<std::vector<std::size_t>> out;
  std::vector<std::size_t> labels(n, 0);
  while (true)
  {
    std::vector<std::size_t> relabel(r, r);
    std::vector<std::size_t> canon(n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
      if (relabel[labels[i]] == r)
      {
        relabel[labels[i]] = next++;
      }
      canon[i] = relabel[labels[i]];
    }
    if (next == r)
    {
      out.insert(canon);
    }
    std::size_t k = 0;
    while (k < n && ++labels[k] == r)
    {
      labels[k++] = 0;
    }
    if (k == n)
    {
      break;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("partition: construction and rendering")
{
  const Partition p(4, {{3, 0}, {2}, {1}});
  CHECK(p.to_string() == "{{1, 4}, {2}, {3}}");
  CHECK(p.labels() == std::vector<std::size_t>{0, 1, 2, 0});
  CHECK(parse_partition("{{1,4},{3},{2}}", 4) == p);
  CHECK(partition_from_labels({5, 2, 7, 5}) == p);
  CHECK_THROWS_AS(Partition(3, {{0}, {1}}), InvalidArgument);
  CHECK_THROWS_AS(Partition(3, {{0, 1}, {1, 2}}), InvalidArgument);
  CHECK_THROWS_AS(Partition(3, {{0, 1, 2}, {}}), InvalidArgument);
  CHECK_THROWS_AS(parse_partition("{{1,2}", 2), InvalidArgument);
}

TEST_CASE("partition: characteristic matrix")
{
  const Partition p(5, {{0, 2}, {1, 3, 4}});
  const Matrix chi = characteristic_matrix(p);
  CHECK(chi.rows() == 5);
  CHECK(chi.cols() == 2);
  CHECK(chi.rowwise().sum().isOnes());
  const Matrix gram = chi.transpose() * chi;
  CHECK(gram(0, 0) == 2.0);
  CHECK(gram(1, 1) == 3.0);
  CHECK(gram(0, 1) == 0.0);
}

TEST_CASE("partition: Stirling numbers of the second kind")
{
  CHECK(count_partitions(1, 1) == 1);
  CHECK(count_partitions(5, 2) == 15);
  CHECK(count_partitions(6, 3) == 90);
  CHECK(count_partitions(10, 5) == 42525);
  CHECK(count_partitions(10, 1) == 1);
  CHECK(count_partitions(10, 10) == 1);
  CHECK(count_partitions(20, 10) == 5917584964655ULL);
  for (std::size_t n = 2; n <= 20; ++n)
  {
    for (std::size_t k = 2; k < n; ++k)
    {
      CHECK(count_partitions(n, k) ==
            k * count_partitions(n - 1, k) + count_partitions(n - 1, k - 1));
    }
  }
}

TEST_CASE("partition: enumeration matches brute force in lexicographic order")
{
  for (std::size_t n = 1; n <= 7; ++n)
  {
    for (std::size_t r = 1; r <= n; ++r)
    {
      const auto oracle = brute_force_partitions(n, r);
      const auto parts = enumerate_partitions(n, r);
      REQUIRE(parts.size() == oracle.size());
      std::size_t i = 0;
      for (const auto &labels : oracle)
      {
        CHECK(parts[i].labels() == labels);
        ++i;
      }
    }
  }
}

TEST_CASE("partition: unrank, next and chunked iteration agree")
{
  const PartitionEnumerator en(10, 5);
  CHECK(en.size() == 42525);
  auto rgs = en.unrank(0);
  std::uint64_t count = 1;
  std::uint64_t probe = 0;
  while (en.next(rgs))
  {
    if (count % 997 == 0)
    {
      CHECK(en.unrank(count) == rgs);
      ++probe;
    }
    ++count;
  }
  CHECK(count == 42525);
  CHECK(probe > 0);
  CHECK_THROWS_AS(en.unrank(42525), InvalidArgument);

  std::uint64_t visited = 0;
  std::uint64_t expected_index = 0;
  for (std::uint64_t begin = 0; begin < en.size(); begin += 4000)
  {
    en.for_each(begin, std::min(begin + 4000, en.size()),
                [&](std::uint64_t index, const std::vector<std::size_t> &labels) {
                  CHECK(index == expected_index);
                  CHECK(partition_from_labels(labels).n_clusters() == 5);
                  ++expected_index;
                  ++visited;
                });
  }
  CHECK(visited == 42525);
}
