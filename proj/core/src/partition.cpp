// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/partition.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <utility>

#include "netred/error.hpp"

namespace netred
{

namespace
{

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b)
{
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out))
  {
    throw InvalidArgument("partition count exceeds 64 bits");
  }
  return out;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b)
{
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out))
  {
    throw InvalidArgument("partition count exceeds 64 bits");
  }
  return out;
}

}  // namespace

Partition::Partition(std::size_t n_vertices, std::vector<std::vector<std::size_t>> clusters)
  : n_(n_vertices), clusters_(std::move(clusters))
{
  if (n_ == 0)
  {
    throw InvalidArgument("partition: vertex count must be positive");
  }
  std::vector<bool> seen(n_, false);
  std::size_t covered = 0;
  for (auto &c : clusters_)
  {
    if (c.empty())
    {
      throw InvalidArgument("partition: empty cluster");
    }
    std::sort(c.begin(), c.end());
    for (auto v : c)
    {
      if (v >= n_)
      {
        throw InvalidArgument("partition: vertex id out of range");
      }
      if (seen[v])
      {
        throw InvalidArgument("partition: vertex " + std::to_string(v + 1) +
                              " appears in more than one cluster");
      }
      seen[v] = true;
      ++covered;
    }
  }
  if (covered != n_)
  {
    throw InvalidArgument("partition: clusters do not cover every vertex");
  }
  std::sort(clusters_.begin(), clusters_.end(),
            [](const auto &a, const auto &b) { return a.front() < b.front(); });
}

std::vector<std::size_t> Partition::labels() const
{
  std::vector<std::size_t> out(n_);
  for (std::size_t k = 0; k < clusters_.size(); ++k)
  {
    for (auto v : clusters_[k])
    {
      out[v] = k;
    }
  }
  return out;
}

std::string Partition::to_string() const
{
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < clusters_.size(); ++k)
  {
    if (k > 0)
    {
      os << ", ";
    }
    os << '{';
    for (std::size_t i = 0; i < clusters_[k].size(); ++i)
    {
      if (i > 0)
      {
        os << ", ";
      }
      os << clusters_[k][i] + 1;
    }
    os << '}';
  }
  os << '}';
  return os.str();
}

Partition Partition::singletons(std::size_t n)
{
  std::vector<std::vector<std::size_t>> c(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    c[i] = {i};
  }
  return Partition(n, std::move(c));
}

Matrix characteristic_matrix(const Partition &p)
{
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(p.n_vertices()),
                          static_cast<Eigen::Index>(p.n_clusters()));
  for (std::size_t k = 0; k < p.n_clusters(); ++k)
  {
    for (auto v : p.clusters()[k])
    {
      m(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(k)) = 1.0;
    }
  }
  return m;
}

Partition partition_from_labels(const std::vector<std::size_t> &labels)
{
  if (labels.empty())
  {
    throw InvalidArgument("partition_from_labels: empty label list");
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    groups[labels[i]].push_back(i);
  }
  std::vector<std::vector<std::size_t>> clusters;
  clusters.reserve(groups.size());
  for (auto &[label, members] : groups)
  {
    clusters.push_back(std::move(members));
  }
  return Partition(labels.size(), std::move(clusters));
}

Partition parse_partition(std::string_view text, std::size_t n_vertices)
{
  std::vector<std::vector<std::size_t>> clusters;
  int depth = 0;
  std::size_t i = 0;
  auto fail = [&](const std::string &msg) {
    throw InvalidArgument("parse_partition: " + msg + " at offset " + std::to_string(i));
  };
  while (i < text.size())
  {
    const char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',')
    {
      ++i;
    }
    else if (ch == '{')
    {
      ++depth;
      if (depth > 2)
      {
        fail("nesting too deep");
      }
      if (depth == 2)
      {
        clusters.emplace_back();
      }
      ++i;
    }
    else if (ch == '}')
    {
      --depth;
      if (depth < 0)
      {
        fail("unbalanced braces");
      }
      ++i;
    }
    else if (std::isdigit(static_cast<unsigned char>(ch)))
    {
      if (depth != 2)
      {
        fail("vertex outside a cluster");
      }
      std::size_t v = 0;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
      {
        v = v * 10 + static_cast<std::size_t>(text[i] - '0');
        ++i;
      }
      if (v == 0)
      {
        fail("vertex ids are 1-based");
      }
      clusters.back().push_back(v - 1);
    }
    else
    {
      fail("unexpected character");
    }
  }
  if (depth != 0)
  {
    fail("unbalanced braces");
  }
  return Partition(n_vertices, std::move(clusters));
}

std::uint64_t count_partitions(std::size_t n, std::size_t r)
{
  if (n > 30 || r > n)
  {
    throw InvalidArgument("count_partitions: requires r <= n <= 30");
  }
  std::vector<std::uint64_t> row(r + 1, 0);
  row[0] = 1;
  for (std::size_t i = 1; i <= n; ++i)
  {
    for (std::size_t k = std::min(i, r); k >= 1; --k)
    {
      row[k] = checked_add(checked_mul(k, row[k]), row[k - 1]);
    }
    row[0] = 0;
  }
  return row[r];
}

PartitionEnumerator::PartitionEnumerator(std::size_t n, std::size_t r) : n_(n), r_(r)
{
  if (n == 0 || r == 0 || r > n)
  {
    throw InvalidArgument("enumerate_partitions: requires 1 <= r <= n");
  }
  // table_[rem * (r + 1) + used]
  table_.assign(n * (r + 1), 0);
  for (std::size_t used = 0; used <= r; ++used)
  {
    table_[used] = used == r ? 1 : 0;
  }
  for (std::size_t rem = 1; rem < n; ++rem)
  {
    for (std::size_t used = 0; used <= r; ++used)
    {
      std::uint64_t v = checked_mul(used, table_[(rem - 1) * (r + 1) + used]);
      if (used < r)
      {
        v = checked_add(v, table_[(rem - 1) * (r + 1) + used + 1]);
      }
      table_[rem * (r + 1) + used] = v;
    }
  }
  total_ = tails(n - 1, 1);
}

std::uint64_t PartitionEnumerator::tails(std::size_t remaining, std::size_t used) const
{
  return table_[remaining * (r_ + 1) + used];
}

std::vector<std::size_t> PartitionEnumerator::unrank(std::uint64_t index) const
{
  if (index >= total_)
  {
    throw InvalidArgument("PartitionEnumerator::unrank: index out of range");
  }
  std::vector<std::size_t> rgs(n_, 0);
  std::size_t used = 1;
  for (std::size_t pos = 1; pos < n_; ++pos)
  {
    const std::size_t remaining = n_ - 1 - pos;
    const std::size_t top = std::min(used, r_ - 1);
    for (std::size_t v = 0; v <= top; ++v)
    {
      const std::size_t next_used = v == used ? used + 1 : used;
      const std::uint64_t count = tails(remaining, next_used);
      if (index < count)
      {
        rgs[pos] = v;
        used = next_used;
        break;
      }
      index -= count;
    }
  }
  return rgs;
}

bool PartitionEnumerator::next(std::vector<std::size_t> &rgs) const
{
  // prefix_used[i] = number of blocks among rgs[0..i-1]
  std::vector<std::size_t> prefix_used(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i)
  {
    prefix_used[i + 1] = std::max(prefix_used[i], rgs[i] + 1);
  }
  for (std::size_t i = n_; i-- > 1;)
  {
    const std::size_t used_before = prefix_used[i];
    const std::size_t candidate = rgs[i] + 1;
    if (candidate > used_before || candidate >= r_)
    {
      continue;
    }
    const std::size_t used_after = std::max(used_before, candidate + 1);
    const std::size_t remaining = n_ - 1 - i;
    if (used_after + remaining < r_)
    {
      continue;
    }
    rgs[i] = candidate;
    std::size_t used = used_after;
    for (std::size_t j = i + 1; j < n_; ++j)
    {
      const std::size_t left = n_ - j;
      if (left == r_ - used)
      {
        rgs[j] = used++;
      }
      else
      {
        rgs[j] = 0;
      }
    }
    return true;
  }
  return false;
}

std::vector<Partition> enumerate_partitions(std::size_t n, std::size_t r)
{
  PartitionEnumerator e(n, r);
  std::vector<Partition> out;
  out.reserve(e.size());
  e.for_each(0, e.size(), [&](std::uint64_t, const std::vector<std::size_t> &rgs) {
    out.push_back(partition_from_labels(rgs));
  });
  return out;
}

}  // namespace netred
