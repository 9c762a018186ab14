#include <benchmark/benchmark.h>

#include "morava/cli.hpp"

using namespace morava;

namespace {

// Law-table construction from scratch (the constructor bypasses the cache).
void BM_LawTable_p2_n1(benchmark::State& state) {
  const std::int64_t T = state.range(0);
  for (auto _ : state) {
    const FglTable t(PrimeContext(2, 1), T);
    benchmark::DoNotOptimize(t.nonzero().size());
  }
}
BENCHMARK(BM_LawTable_p2_n1)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LawTable_p3_n1(benchmark::State& state) {
  const std::int64_t T = state.range(0);
  for (auto _ : state) {
    const FglTable t(PrimeContext(3, 1), T);
    benchmark::DoNotOptimize(t.nonzero().size());
  }
}
BENCHMARK(BM_LawTable_p3_n1)->Arg(27)->Arg(81)->Unit(benchmark::kMillisecond);

void BM_LawTable_p2_n2(benchmark::State& state) {
  const std::int64_t T = state.range(0);
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    const FglTable t(PrimeContext(2, 2), T, threads);
    benchmark::DoNotOptimize(t.nonzero().size());
  }
}
BENCHMARK(BM_LawTable_p2_n2)->Args({64, 1})->Args({64, 4})->Unit(benchmark::kMillisecond);

// Diagonal transfer unit for a rank-16 doubled ring.
void BM_TransferUnit(benchmark::State& state) {
  const PrimeContext ctx(2, 1);
  const AbelianPGroup g(2, {2});
  for (auto _ : state) {
    const CohomologyClass tr = diagonalTransferUnit(ctx, g);
    benchmark::DoNotOptimize(tr.termCount());
  }
}
BENCHMARK(BM_TransferUnit)->Unit(benchmark::kMicrosecond);

// Single cap products against a fixed duality structure.
void BM_CapProduct(benchmark::State& state) {
  const PrimeContext ctx(2, 1);
  const DualityPtr dual = dualityDataFor(ctx, AbelianPGroup(2, {2, 1}));
  const std::int64_t R = dual->ring->rank();
  std::int64_t i = 0;
  for (auto _ : state) {
    const HomologyClass c = capProduct(*dual, HomologyClass::basis(dual->ring, i % R),
                                       HomologyClass::basis(dual->ring, (i * 5 + 3) % R));
    benchmark::DoNotOptimize(c.isZero());
    ++i;
  }
}
BENCHMARK(BM_CapProduct)->Unit(benchmark::kMicrosecond);

// m-series evaluation by binary double-and-add.
void BM_MSeries(benchmark::State& state) {
  const PrimeContext ctx(3, 1);
  const RingPtr ring = ringOf(ctx, AbelianPGroup(3, {3}));
  const FglPtr table = fglTableFor(ctx, ring->evalTrunc());
  const CohomologyClass x = CohomologyClass::generator(ring, 0);
  for (auto _ : state) {
    const CohomologyClass c = mSeries(*table, 7, x);
    benchmark::DoNotOptimize(c.termCount());
  }
}
BENCHMARK(BM_MSeries)->Unit(benchmark::kMicrosecond);

// Whole-lattice intersection-formula sweep for a rank-8 ambient ring.
void BM_Sweep(benchmark::State& state) {
  const PrimeContext ctx(2, 1);
  const AbelianPGroup g(2, {2, 1});
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const SweepOutcome out = sweepGroup(ctx, g, threads);
    benchmark::DoNotOptimize(out.matches);
  }
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
