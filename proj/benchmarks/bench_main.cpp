#include <benchmark/benchmark.h>

#include "fasa/estimators.hpp"
#include "fasa/simulator.hpp"
#include "fasa/traffic.hpp"

namespace {

void BM_Binomial(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  fasa::RngStream rng(1, 0);
  const double p = 1.0 / static_cast<double>(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fasa::traffic::sample_binomial(n, p * 3.0, rng));
  }
}
BENCHMARK(BM_Binomial)->Arg(10)->Arg(1000)->Arg(100000);

void BM_Poisson(benchmark::State& state) {
  const double mean = static_cast<double>(state.range(0));
  fasa::RngStream rng(1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fasa::traffic::sample_poisson(mean, rng));
  }
}
BENCHMARK(BM_Poisson)->Arg(1)->Arg(30)->Arg(3500);

void BM_FasaObserve(benchmark::State& state) {
  auto est = fasa::estimators::initial_state(fasa::estimators::parse_scheme("fasa:eta=1,nu=2"));
  const fasa::SlotOutcome cycle[] = {fasa::SlotOutcome::Collision, fasa::SlotOutcome::Collision,
                                     fasa::SlotOutcome::Idle, fasa::SlotOutcome::Success};
  std::size_t i = 0;
  for (auto _ : state) {
    est = fasa::estimators::observe(std::move(est), cycle[i++ & 3]);
    benchmark::DoNotOptimize(est.n_hat);
  }
}
BENCHMARK(BM_FasaObserve);

void BM_SingleEvent(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const auto scheme = fasa::estimators::parse_scheme("fasa:eta=1,nu=2");
  std::uint64_t trial = 0;
  for (auto _ : state) {
    auto r = fasa::sim::run_single_event(n, scheme, 7, trial++);
    benchmark::DoNotOptimize(r.slots);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SingleEvent)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
