// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <benchmark/benchmark.h>

#include "netred/linalg.hpp"

namespace
{

netred::Matrix gaussian(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols)
{
  std::normal_distribution<double> dist;
  netred::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
  {
    for (Eigen::Index i = 0; i < rows; ++i)
    {
      m(i, j) = dist(rng);
    }
  }
  return m;
}

void BM_GenLyapunov(benchmark::State &state)
{
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  netred::Matrix a = gaussian(rng, n, n);
  a -= (a.norm() + 1.0) * netred::Matrix::Identity(n, n);
  const netred::Matrix e = (1.0 + gaussian(rng, n, 1).array().abs()).matrix().asDiagonal();
  const netred::Matrix b = gaussian(rng, n, 2);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(netred::solve_gen_lyapunov(a, e, b));
  }
}
BENCHMARK(BM_GenLyapunov)->Arg(10)->Arg(40)->Arg(160);

void BM_PivotedQr(benchmark::State &state)
{
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(2);
  const netred::Matrix a = gaussian(rng, 5, n);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(netred::qr_column_pivot(a));
  }
}
BENCHMARK(BM_PivotedQr)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace
