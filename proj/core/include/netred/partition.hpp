// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_PARTITION_HPP
#define NETRED_PARTITION_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "netred/linalg.hpp"

namespace netred
{

/// Set partition of {0, ..., n-1} in canonical form: members ascending and
/// clusters ordered by their smallest member.
class Partition
{
public:
  Partition() = default;
  Partition(std::size_t n_vertices, std::vector<std::vector<std::size_t>> clusters);

  std::size_t n_vertices() const noexcept { return n_; }
  std::size_t n_clusters() const noexcept { return clusters_.size(); }
  const std::vector<std::vector<std::size_t>> &clusters() const noexcept { return clusters_; }

  /// Cluster index of every vertex (a restricted growth string).
  std::vector<std::size_t> labels() const;

  /// 1-based rendering, e.g. {{1, 8}, {2, 3}, {4}}.
  std::string to_string() const;

  static Partition singletons(std::size_t n);

  friend bool operator==(const Partition &, const Partition &) = default;
  friend auto operator<=>(const Partition &a, const Partition &b)
  {
    return a.clusters_ <=> b.clusters_;
  }

private:
  std::size_t n_ = 0;
  std::vector<std::vector<std::size_t>> clusters_;
};

/// Characteristic matrix: column k is the indicator vector of cluster k.
Matrix characteristic_matrix(const Partition &p);

/// Canonical partition grouping vertices that share a label.
Partition partition_from_labels(const std::vector<std::size_t> &labels);

/// Parses the 1-based rendering produced by Partition::to_string.
Partition parse_partition(std::string_view text, std::size_t n_vertices);

/// Stirling number of the second kind S(n, r) for n <= 30.  Throws
/// InvalidArgument when the value does not fit in 64 bits.
std::uint64_t count_partitions(std::size_t n, std::size_t r);

/// Restricted-growth-string enumeration of the partitions of {0..n-1} into
/// exactly r blocks, in lexicographic order.  Positions in the sequence can be
/// addressed directly, so disjoint index ranges may be walked independently.
class PartitionEnumerator
{
public:
  PartitionEnumerator(std::size_t n, std::size_t r);

  std::uint64_t size() const noexcept { return total_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t r() const noexcept { return r_; }

  /// Restricted growth string at position index.
  std::vector<std::size_t> unrank(std::uint64_t index) const;

  /// Advances rgs to its lexicographic successor; false after the last one.
  bool next(std::vector<std::size_t> &rgs) const;

  /// Calls fn(index, rgs) for every index in [begin, end).
  template <typename F>
  void for_each(std::uint64_t begin, std::uint64_t end, F &&fn) const
  {
    if (begin >= end || begin >= total_)
    {
      return;
    }
    auto rgs = unrank(begin);
    for (std::uint64_t i = begin; i < end; ++i)
    {
      fn(i, static_cast<const std::vector<std::size_t> &>(rgs));
      if (i + 1 < end && !next(rgs))
      {
        break;
      }
    }
  }

private:
  std::uint64_t tails(std::size_t remaining, std::size_t used) const;

  std::size_t n_;
  std::size_t r_;
  std::uint64_t total_;
  std::vector<std::uint64_t> table_;  ///< (remaining, used) completion counts
};

/// All partitions of {0..n-1} into exactly r blocks, in enumeration order.
std::vector<Partition> enumerate_partitions(std::size_t n, std::size_t r);

}  // namespace netred

#endif  // NETRED_PARTITION_HPP
