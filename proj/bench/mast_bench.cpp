// Serial reference kernels against the OpenMP kernels on the same inputs.
// Thread count follows MAST_THREADS (0 or unset = all processors).

#include <benchmark/benchmark.h>

#include <map>

#include "mast/calibration.hpp"
#include "mast/ddi.hpp"
#include "mast/lama.hpp"
#include "mast/parallel.hpp"
#include "mast/reference.hpp"
#include "mast/rng.hpp"
#include "mast/sts.hpp"

namespace {

struct LamaFixture {
  mast::LogitGroups groups;
  mast::MassTargets targets;
  mast::Tensor biased;
  mast::Tensor values;
};

LamaFixture make_lama(std::size_t tokens) {
  const mast::CounterRng rng(7, 0xBE7C);
  LamaFixture f;
  f.groups.key_dim = 64;
  for (std::size_t i = 0; i < 2; ++i) f.groups.style.push_back(mast::random_normal(rng.substream(i), {tokens, tokens}, 2.0f));
  f.groups.content = mast::random_normal(rng.substream(9), {tokens, tokens}, 3.0f);
  const std::vector<double> mass{0.45, 0.3};
  f.targets = mast::uniform_mass_targets(mass, tokens);
  f.biased = mast::apply_lama(f.groups, f.targets);
  f.values = mast::random_normal(rng.substream(10), {f.biased.cols(), 64});
  return f;
}

const LamaFixture& lama_fixture(std::size_t tokens) {
  static std::map<std::size_t, LamaFixture> cache;
  auto it = cache.find(tokens);
  if (it == cache.end()) it = cache.emplace(tokens, make_lama(tokens)).first;
  return it->second;
}

void BM_ApplyLama_Reference(benchmark::State& state) {
  const auto& f = lama_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mast::reference::apply_lama(f.groups, f.targets));
}

void BM_ApplyLama_Parallel(benchmark::State& state) {
  const auto& f = lama_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mast::apply_lama(f.groups, f.targets));
}

void BM_Attention_Reference(benchmark::State& state) {
  const auto& f = lama_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mast::reference::attention_output(f.biased, f.values, 1.3));
}

void BM_Attention_Parallel(benchmark::State& state) {
  const auto& f = lama_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mast::attention_output(f.biased, f.values, 1.3));
}

void BM_SolveTemperature_Reference(benchmark::State& state) {
  const auto& f = lama_fixture(static_cast<std::size_t>(state.range(0)));
  const double target = mast::mean_log_p_max(f.groups.content);
  for (auto _ : state) benchmark::DoNotOptimize(mast::reference::solve_temperature(f.biased, target));
}

void BM_SolveTemperature_Parallel(benchmark::State& state) {
  const auto& f = lama_fixture(static_cast<std::size_t>(state.range(0)));
  const double target = mast::mean_log_p_max(f.groups.content);
  for (auto _ : state) benchmark::DoNotOptimize(mast::solve_temperature(f.biased, target));
}

mast::Tensor features(std::size_t n) { return mast::random_normal(mast::CounterRng(3, 0xFEA7), {8, n, n}); }

void BM_HighPass_Reference(benchmark::State& state) {
  const auto x = features(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mast::reference::extract_high_freq(x, {}));
}

void BM_HighPass_Parallel(benchmark::State& state) {
  const auto x = features(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mast::extract_high_freq(x, {}));
}

mast::CalibrationConfig calibration(std::int64_t samples) {
  mast::CalibrationConfig cfg;
  cfg.samples = static_cast<std::size_t>(samples);
  return cfg;
}

void BM_Calibration_Reference(benchmark::State& state) {
  const auto cfg = calibration(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mast::reference::generate_calibration_dataset(cfg));
}

void BM_Calibration_Parallel(benchmark::State& state) {
  const auto cfg = calibration(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mast::generate_calibration_dataset(cfg));
}

}  // namespace

BENCHMARK(BM_ApplyLama_Reference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyLama_Parallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Attention_Reference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Attention_Parallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveTemperature_Reference)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveTemperature_Parallel)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HighPass_Reference)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HighPass_Parallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Calibration_Reference)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Calibration_Parallel)->Arg(64)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  mast::configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
