#include <benchmark/benchmark.h>

#include "cubicdyn/pipeline.hpp"
#include "cubicdyn/residual.hpp"

using namespace cubicdyn;

namespace {

const AnalysisReport& fixture(const std::string& name) {
  static std::map<std::string, AnalysisReport> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    const ProblemInput in = read_input_file(std::string(CUBICDYN_FIXTURE_DIR) + "/" + name + ".json");
    it = cache.emplace(name, run_pipeline(in, {Stage::periodic})).first;
  }
  return it->second;
}

void BM_DivisionSet(benchmark::State& state) {
  const AnalysisReport& r = fixture("period3_rank1");
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_division_set(*r.model, *r.pencil, n));
}
BENCHMARK(BM_DivisionSet)->Arg(6)->Arg(9)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_BruteForceOrbits(benchmark::State& state) {
  const GlobalSystem G = fixture("period2_rank0").global();
  const auto p = static_cast<std::uint32_t>(state.range(0));
  ScopedPrime sp(p);
  const ReducedSystem R = reduce_mod_p(G, p);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_orbits(R));
}
BENCHMARK(BM_BruteForceOrbits)->Arg(31)->Arg(61)->Arg(97)->Unit(benchmark::kMillisecond);

void BM_RationalRoots(benchmark::State& state) {
  const AnalysisReport& r = fixture("period3_rank1");
  const UniPoly& f = r.dps->phi(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rational_roots(f));
}
BENCHMARK(BM_RationalRoots)->Arg(3)->Arg(8)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_FactorDegreesModP(benchmark::State& state) {
  const UniPoly& f = fixture("period2_rank0").dps->psi(1);
  for (auto _ : state)
    for (std::uint32_t p : {101u, 103u, 107u, 109u, 113u}) benchmark::DoNotOptimize(factor_degrees_mod_p(f, p));
}
BENCHMARK(BM_FactorDegreesModP)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
