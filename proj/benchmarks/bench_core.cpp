#include "dssl/datagen.hpp"
#include "dssl/gram_store.hpp"
#include "dssl/lasso.hpp"
#include "dssl/pelt.hpp"

#include <benchmark/benchmark.h>

using namespace dssl;

namespace {

SegmentGram case1_segment(TimeIndex start, TimeIndex end) {
  const auto s = gen_case1(0.05, 1);
  const Matrix part = s.samples.middleRows(static_cast<Eigen::Index>(start),
                                           static_cast<Eigen::Index>(end - start));
  SegmentGram g;
  g.start = start;
  g.end = end;
  g.gram = part.transpose() * part;
  return g;
}

void BM_GramPush(benchmark::State& state) {
  const auto p = state.range(0);
  const Vector y = Vector::LinSpaced(p, -1.0, 1.0);
  for (auto _ : state) {
    GramStore store(p);
    for (int k = 0; k < 64; ++k) store.push(y);
    benchmark::DoNotOptimize(store.size());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_GramPush)->Arg(40)->Arg(100)->Arg(400);

void BM_LassoFitCold(benchmark::State& state) {
  const SegmentGram seg = case1_segment(64, 128);
  const SolverConfig cfg;
  const double lambda = lambda1_of_length(0.0028, seg.length());
  Eigen::Index i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lasso_fit(seg, i, lambda, cfg));
    i = (i + 1) % seg.dim();
  }
}
BENCHMARK(BM_LassoFitCold);

void BM_LassoFitWarm(benchmark::State& state) {
  const SegmentGram seg = case1_segment(64, 128);
  const SolverConfig cfg;
  const double lambda = lambda1_of_length(0.0028, seg.length());
  SolverConfig tight = cfg;
  tight.max_iter = 100000;
  const Vector warm = lasso_fit(seg, 0, lambda, tight).coefs;
  for (auto _ : state) benchmark::DoNotOptimize(lasso_fit(seg, 0, lambda, cfg, &warm));
}
BENCHMARK(BM_LassoFitWarm);

void BM_SegmentCost(benchmark::State& state) {
  const SegmentGram seg = case1_segment(64, 64 + static_cast<TimeIndex>(state.range(0)));
  const SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(segment_cost(seg, 0.0028, cfg).cost);
}
BENCHMARK(BM_SegmentCost)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DetectorCaseOne(benchmark::State& state) {
  const auto s = gen_case1(0.05, 2);
  const Eigen::Index n = state.range(0);
  for (auto _ : state) {
    OnlineDetector det(s.samples.cols(), PenaltyConfig{}, SolverConfig{});
    for (Eigen::Index t = 0; t < n; ++t) benchmark::DoNotOptimize(det.push(Vector(s.samples.row(t))));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_DetectorCaseOne)->Arg(48)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
