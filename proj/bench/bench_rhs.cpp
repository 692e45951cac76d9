// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Serial reference RHS against the OpenMP kernel over a range of n_max.

#include <benchmark/benchmark.h>

#include <cmath>

#include "sqwp/hierarchy.hpp"

namespace {

sqwp::HierarchyModel make_model(int n_max) {
  const auto& b = sqwp::two_level_basis();
  sqwp::SLHTriple slh{b.id, b.sm, 4.0 * b.sx};
  return {slh, sqwp::WavePacket::square(4.0), sqwp::SqueezeParams(std::log(2.0), 0.0), n_max};
}

sqwp::StateTensor make_state(int n_max) {
  sqwp::StateTensor st = sqwp::init_tensor(sqwp::two_level_basis().pe, n_max);
  for (Eigen::Index i = 0; i < st.data().size(); ++i) st.data()(i) += sqwp::cd(1e-3 * std::sin(i), 1e-3 * std::cos(i));
  return st;
}

void BM_reference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto model = make_model(n);
  const auto st = make_state(n);
  sqwp::StateTensor out(n, 2);
  for (auto _ : state) {
    sqwp::squeezed_rhs_reference(1.0, st, model, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * (n + 1) * (n + 1));
}

void BM_parallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto model = make_model(n);
  const auto st = make_state(n);
  sqwp::StateTensor out(n, 2);
  for (auto _ : state) {
    sqwp::squeezed_rhs(1.0, st, model, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * (n + 1) * (n + 1));
}

}  // namespace

BENCHMARK(BM_reference)->Arg(3)->Arg(9)->Arg(20)->Arg(40);
BENCHMARK(BM_parallel)->Arg(3)->Arg(9)->Arg(20)->Arg(40);
BENCHMARK_MAIN();
