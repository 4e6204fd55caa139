// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <benchmark/benchmark.h>

#include "netred/clustering.hpp"

namespace
{

netred::Matrix blobs(Eigen::Index rows, Eigen::Index dim, std::size_t centers)
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  netred::Matrix c(static_cast<Eigen::Index>(centers), dim);
  for (Eigen::Index i = 0; i < c.size(); ++i)
  {
    c.data()[i] = 10.0 * dist(rng);
  }
  netred::Matrix f(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i)
  {
    for (Eigen::Index j = 0; j < dim; ++j)
    {
      f(i, j) = c(i % c.rows(), j) + dist(rng);
    }
  }
  return f;
}

void BM_KMeans(benchmark::State &state)
{
  const netred::Matrix f = blobs(state.range(0), 4, 10);
  netred::KMeansOptions opts;
  opts.n_init = 10;
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(netred::kmeans_cluster(f, 10, opts));
  }
}
BENCHMARK(BM_KMeans)->Arg(100)->Arg(1000);

void BM_QrCluster(benchmark::State &state)
{
  const netred::Matrix f = blobs(state.range(0), 10, 10);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(netred::qr_cluster(f, 10));
  }
}
BENCHMARK(BM_QrCluster)->Arg(100)->Arg(1000);

}  // namespace
