#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "champagne/capacity.h"
#include "champagne/criteria.h"
#include "champagne/generators.h"
#include "champagne/walker.h"

namespace champagne {
namespace {

GeneratorParams corollary(int n_max) {
  GeneratorParams p;
  p.n_max = n_max;
  return p;
}

void BM_GenerateCorollary(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(generate_corollary(corollary(static_cast<int>(state.range(0)))));
}
BENCHMARK(BM_GenerateCorollary)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_LogWeightedSeriesRing(benchmark::State& state) {
  const RingConfiguration c = generate_corollary(corollary(static_cast<int>(state.range(0))));
  const BoundaryPoint y = BoundaryPoint::at(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(theorem1_series(c, y).total());
  state.counters["discs"] = static_cast<double>(c.size());
}
BENCHMARK(BM_LogWeightedSeriesRing)->Arg(8)->Arg(12)->Arg(20);

void BM_LogWeightedSeriesExplicit(benchmark::State& state) {
  const Configuration c = generate_corollary(corollary(static_cast<int>(state.range(0)))).materialize();
  const BoundaryPoint y = BoundaryPoint::at(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(theorem1_series(c, y).total());
  state.counters["discs"] = static_cast<double>(c.size());
}
BENCHMARK(BM_LogWeightedSeriesExplicit)->Arg(4)->Arg(6)->Unit(benchmark::kMicrosecond);

void BM_Sep3Ring(benchmark::State& state) {
  const GeneratorParams p = corollary(static_cast<int>(state.range(0)));
  const RingConfiguration c = generate_corollary(p);
  for (auto _ : state) benchmark::DoNotOptimize(separation(c, SeparationKind::kSep3, p.phi()).value);
}
BENCHMARK(BM_Sep3Ring)->Arg(8)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_SegmentCapacity(benchmark::State& state) {
  CapacityOptions o;
  o.boundary_points = static_cast<int>(state.range(0));
  const Shape s = Shape::segment({0.0, 0.0}, {1.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(log_capacity(s, o).value);
}
BENCHMARK(BM_SegmentCapacity)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_ChargeModelCell(benchmark::State& state) {
  GeneratorParams p = corollary(static_cast<int>(state.range(0)));
  p.c0 = 1e-7;
  const RingConfiguration c = generate_corollary(p);
  const WhitneyIndex idx{p.n_max, 3};
  const Shape shape = cell_shape(discs_meeting_cell(c, idx), idx);
  for (auto _ : state) benchmark::DoNotOptimize(log_capacity(shape).value);
  state.counters["discs"] = static_cast<double>(discs_meeting_cell(c, idx).size());
}
BENCHMARK(BM_ChargeModelCell)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_NearestRingField(benchmark::State& state) {
  const RingField field(generate_corollary(corollary(static_cast<int>(state.range(0)))));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> queries;
  for (int i = 0; i < 4096; ++i) queries.push_back(from_polar(std::sqrt(u(rng)) * 0.999, kTwoPi * u(rng)));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(field.nearest(queries[i++ & 4095]).gap);
}
BENCHMARK(BM_NearestRingField)->Arg(8)->Arg(12);

void BM_EscapeWalks(benchmark::State& state) {
  GeneratorParams p = corollary(static_cast<int>(state.range(0)));
  p.alpha = 4.0;
  p.beta = 0.5;
  const RingField field(generate_corollary(p));
  WalkParams params;
  params.n_walks = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_escape(params, field).p_escape);
  state.SetItemsProcessed(state.iterations() * params.n_walks);
}
BENCHMARK(BM_EscapeWalks)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Philox(benchmark::State& state) {
  Philox rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform());
}
BENCHMARK(BM_Philox);

}  // namespace
}  // namespace champagne

BENCHMARK_MAIN();
