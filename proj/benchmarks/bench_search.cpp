// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "netred/io.hpp"
#include "netred/search.hpp"

namespace
{

const netred::ErrorEvaluator &small_evaluator()
{
  static const netred::ErrorEvaluator eval(
      netred::to_linear(netred::read_system_file(NETRED_BENCH_DATA_DIR "/small_network.sys")));
  return eval;
}

const netred::Partition kFive = netred::parse_partition("{{1,8},{2,3,4,9,10},{5},{6},{7}}", 10);

void BM_H2Relative(benchmark::State &state)
{
  const auto &eval = small_evaluator();
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(eval.h2_relative(kFive));
  }
}
BENCHMARK(BM_H2Relative);

void BM_HinfRelativeCoarse(benchmark::State &state)
{
  const auto &eval = small_evaluator();
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(eval.hinf_relative_coarse(kFive));
  }
}
BENCHMARK(BM_HinfRelativeCoarse);

void BM_HinfRelative(benchmark::State &state)
{
  const auto &eval = small_evaluator();
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(eval.hinf_relative(kFive));
  }
}
BENCHMARK(BM_HinfRelative);

void BM_EnumeratePartitions(benchmark::State &state)
{
  const auto r = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
  {
    const netred::PartitionEnumerator en(10, r);
    std::uint64_t count = 0;
    en.for_each(0, en.size(), [&](std::uint64_t, const auto &) { ++count; });
    benchmark::DoNotOptimize(count);
  }
}
BENCHMARK(BM_EnumeratePartitions)->Arg(3)->Arg(5)->Arg(7);

}  // namespace
