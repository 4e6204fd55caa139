// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "netred/nonlinear.hpp"

namespace
{

void BM_OscillatorRhs(benchmark::State &state)
{
  const auto side = static_cast<std::size_t>(state.range(0));
  const netred::NonlinearMas sys = netred::vanderpol_network({}, side, side);
  const netred::Vector x = netred::Vector::LinSpaced(static_cast<Eigen::Index>(sys.state_dim()), -1.0, 1.0);
  const netred::Vector u = netred::Vector::Ones(1);
  netred::Vector dx(x.size());
  for (auto _ : state)
  {
    netred::rhs_into(sys, x, u, dx);
    benchmark::DoNotOptimize(dx.data());
  }
}
BENCHMARK(BM_OscillatorRhs)->Arg(10)->Arg(30);

void BM_OscillatorSimulation(benchmark::State &state)
{
  const netred::NonlinearMas sys = netred::vanderpol_network({}, 5, 5);
  const netred::Vector x0 = netred::Vector::Zero(static_cast<Eigen::Index>(sys.state_dim()));
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(
        netred::simulate(sys, x0, netred::training_input(1), 0.0, 5.0, netred::linspace(0.0, 5.0, 51)));
  }
}
BENCHMARK(BM_OscillatorSimulation)->Unit(benchmark::kMillisecond);

}  // namespace
