// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "netred/error.hpp"
#include "parallel.hpp"

namespace netred
{

Matrix feature_rows(const Matrix &basis, std::size_t block_size)
{
  const auto n = static_cast<Eigen::Index>(block_size);
  if (n == 0 || basis.rows() % n != 0)
  {
    throw InvalidArgument("feature_rows: row count is not a multiple of the block size");
  }
  const Eigen::Index agents = basis.rows() / n;
  const Eigen::Index cols = basis.cols();
  Matrix f(agents, n * cols);
  for (Eigen::Index i = 0; i < agents; ++i)
  {
    for (Eigen::Index a = 0; a < n; ++a)
    {
      f.row(i).segment(a * cols, cols) = basis.row(i * n + a);
    }
  }
  return f;
}

Matrix combined_basis(const Matrix &v, const Matrix &w, std::size_t r)
{
  if (v.rows() != w.rows())
  {
    throw InvalidArgument("combined_basis: row counts differ");
  }
  Matrix vw(v.rows(), v.cols() + w.cols());
  vw << v, w;
  const Svd s = svd(vw);
  if (static_cast<Eigen::Index>(r) > s.u.cols())
  {
    throw InvalidArgument("combined_basis: requested more vectors than available");
  }
  return s.u.leftCols(static_cast<Eigen::Index>(r));
}

Partition qr_cluster(const Matrix &features, std::size_t r)
{
  const auto rr = static_cast<Eigen::Index>(r);
  if (r == 0 || rr > features.rows())
  {
    throw InvalidArgument("qr_cluster: cluster count must satisfy 1 <= r <= agents");
  }
  const Matrix ft = features.transpose();
  const PivotedQr qr = qr_column_pivot(ft);
  const Eigen::Index k = qr.r.rows();
  const double r00 = k > 0 ? std::abs(qr.r(0, 0)) : 0.0;
  const double tol = r00 * 1e-12 * static_cast<double>(std::max(ft.rows(), ft.cols()));
  if (rr > k || r00 == 0.0 || std::abs(qr.r(rr - 1, rr - 1)) <= tol)
  {
    throw InvalidArgument("qr_cluster: feature rank is smaller than the cluster count");
  }
  const Matrix x =
      qr.r.topLeftCorner(rr, rr).triangularView<Eigen::Upper>().solve(qr.r.topRows(rr));
  std::vector<std::size_t> labels(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
  {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < rr; ++i)
    {
      if (std::abs(x(i, j)) > std::abs(x(best, j)))
      {
        best = i;
      }
    }
    labels[qr.pivots[static_cast<std::size_t>(j)]] = static_cast<std::size_t>(best);
  }
  return partition_from_labels(labels);
}

namespace
{

struct Run
{
  std::vector<std::size_t> labels;
  Matrix centers;
  double cost = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::vector<double> history;
};

double sq_dist(const Matrix &f, Eigen::Index i, const Matrix &c, Eigen::Index k)
{
  return (f.row(i) - c.row(k)).squaredNorm();
}

Matrix seed_centers(const Matrix &f, Eigen::Index r, std::mt19937_64 &rng)
{
  const Eigen::Index n = f.rows();
  Matrix c(r, f.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Index first = pick(rng);
  chosen[static_cast<std::size_t>(first)] = true;
  c.row(0) = f.row(first);
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    d2(i) = sq_dist(f, i, c, 0);
  }
  for (Eigen::Index k = 1; k < r; ++k)
  {
    const double total = d2.sum();
    Eigen::Index idx = -1;
    if (total > 0.0)
    {
      const double u = unit(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
      {
        if (d2(i) <= 0.0)
        {
          continue;
        }
        acc += d2(i) / total;
        idx = i;
        if (acc > u)
        {
          break;
        }
      }
    }
    else
    {
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
      {
        if (!chosen[static_cast<std::size_t>(i)])
        {
          free.push_back(i);
        }
      }
      std::uniform_int_distribution<std::size_t> pf(0, free.size() - 1);
      idx = free[pf(rng)];
    }
    chosen[static_cast<std::size_t>(idx)] = true;
    c.row(k) = f.row(idx);
    for (Eigen::Index i = 0; i < n; ++i)
    {
      d2(i) = std::min(d2(i), sq_dist(f, i, c, k));
    }
  }
  return c;
}

void repair_empty(const Matrix &f, const Matrix &c, std::vector<std::size_t> &labels,
                  Eigen::Index r)
{
  for (;;)
  {
    std::vector<std::size_t> count(static_cast<std::size_t>(r), 0);
    std::vector<double> cost(static_cast<std::size_t>(r), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
      ++count[labels[i]];
      cost[labels[i]] += sq_dist(f, static_cast<Eigen::Index>(i), c,
                                 static_cast<Eigen::Index>(labels[i]));
    }
    const auto empty = std::find(count.begin(), count.end(), std::size_t{0});
    if (empty == count.end())
    {
      return;
    }
    std::size_t donor = labels.size();
    for (std::size_t k = 0; k < count.size(); ++k)
    {
      if (count[k] >= 2 && (donor == labels.size() || cost[k] > cost[donor]))
      {
        donor = k;
      }
    }
    std::size_t far = labels.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
      if (labels[i] != donor)
      {
        continue;
      }
      const double d = sq_dist(f, static_cast<Eigen::Index>(i), c, static_cast<Eigen::Index>(donor));
      if (d > far_d)
      {
        far_d = d;
        far = i;
      }
    }
    labels[far] = static_cast<std::size_t>(empty - count.begin());
  }
}

Matrix means(const Matrix &f, const std::vector<std::size_t> &labels, Eigen::Index r)
{
  Matrix c = Matrix::Zero(r, f.cols());
  Vector count = Vector::Zero(r);
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    c.row(static_cast<Eigen::Index>(labels[i])) += f.row(static_cast<Eigen::Index>(i));
    count(static_cast<Eigen::Index>(labels[i])) += 1.0;
  }
  for (Eigen::Index k = 0; k < r; ++k)
  {
    c.row(k) /= count(k);
  }
  return c;
}

Run lloyd(const Matrix &f, Eigen::Index r, std::size_t max_iter, std::mt19937_64 &rng)
{
  const Eigen::Index n = f.rows();
  Run run;
  run.centers = seed_centers(f, r, rng);
  run.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::size_t> prev;
  for (std::size_t it = 0; it < std::max<std::size_t>(1, max_iter); ++it)
  {
    for (Eigen::Index i = 0; i < n; ++i)
    {
      Eigen::Index best = 0;
      double best_d = sq_dist(f, i, run.centers, 0);
      for (Eigen::Index k = 1; k < r; ++k)
      {
        const double d = sq_dist(f, i, run.centers, k);
        if (d < best_d)
        {
          best_d = d;
          best = k;
        }
      }
      run.labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    repair_empty(f, run.centers, run.labels, r);
    run.centers = means(f, run.labels, r);
    double cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
      cost += sq_dist(f, i, run.centers, static_cast<Eigen::Index>(run.labels[static_cast<std::size_t>(i)]));
    }
    run.history.push_back(cost);
    run.cost = cost;
    run.iterations = it + 1;
    if (run.labels == prev)
    {
      break;
    }
    prev = run.labels;
  }
  return run;
}

}  // namespace

std::pair<Partition, KMeansResult> kmeans_cluster(const Matrix &features, std::size_t r,
                                                  const KMeansOptions &opts)
{
  const auto rr = static_cast<Eigen::Index>(r);
  if (r == 0 || rr > features.rows())
  {
    throw InvalidArgument("kmeans_cluster: cluster count must satisfy 1 <= r <= agents");
  }
  require_finite(features, "kmeans_cluster: features");
  const std::size_t restarts = std::max<std::size_t>(1, opts.n_init);
  std::vector<Run> runs(restarts);
  detail::parallel_for(restarts, opts.workers, [&](std::size_t s) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(opts.seed >> 32), static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    runs[s] = lloyd(features, rr, opts.max_iter, rng);
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < restarts; ++s)
  {
    if (runs[s].cost < runs[best].cost)
    {
      best = s;
    }
  }
  Run &win = runs[best];
  KMeansResult res;
  res.labels = win.labels;
  res.centers = win.centers;
  res.cost = win.cost;
  res.iterations = win.iterations;
  res.seed = opts.seed;
  res.restart = best;
  res.cost_history = std::move(win.history);
  return {partition_from_labels(res.labels), std::move(res)};
}

double kmeans_cost(const Matrix &features, const Partition &p)
{
  if (static_cast<Eigen::Index>(p.n_vertices()) != features.rows())
  {
    throw InvalidArgument("kmeans_cost: partition size does not match the feature count");
  }
  double cost = 0.0;
  for (const auto &cluster : p.clusters())
  {
    Vector mean = Vector::Zero(features.cols());
    for (auto v : cluster)
    {
      mean += features.row(static_cast<Eigen::Index>(v)).transpose();
    }
    mean /= static_cast<double>(cluster.size());
    for (auto v : cluster)
    {
      cost += (features.row(static_cast<Eigen::Index>(v)).transpose() - mean).squaredNorm();
    }
  }
  return cost;
}

ProjectionBound kmeans_cost_equals_projection_bound(const Matrix &v, const Partition &p)
{
  const Matrix gram = v.transpose() * v;
  if ((gram - Matrix::Identity(v.cols(), v.cols())).norm() > 1e-10)
  {
    throw InvalidArgument("kmeans_cost_equals_projection_bound: V is not orthonormal");
  }
  const Matrix pm = characteristic_matrix(p);
  const Matrix ptp = pm.transpose() * pm;
  const Matrix proj = pm * ptp.ldlt().solve(pm.transpose() * v);
  return {kmeans_cost(v, p), (v - proj).squaredNorm()};
}

}  // namespace netred
