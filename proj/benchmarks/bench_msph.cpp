#include <benchmark/benchmark.h>

#include "msph/beamform.hpp"
#include "msph/localize.hpp"
#include "msph/track.hpp"
#include "msph/translation.hpp"

using namespace msph;

namespace {

SceneConfig scene() {
  SceneConfig s;
  s.sensors = SensorPair::asymmetric();
  return s;
}

}  // namespace

static void BM_TranslationSR(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(coaxial_sr(1, 5.0, 0.12, p));
}
BENCHMARK(BM_TranslationSR)->Arg(8)->Arg(16)->Arg(32);

static void BM_SolveScattering(benchmark::State& state) {
  const Media m{};
  const Geometry g{};
  const int p = static_cast<int>(state.range(0));
  const auto inc = plane_wave_from_source(1.0, 0.7, m.k_outer(1000.0), p);
  for (auto _ : state) benchmark::DoNotOptimize(solve_scattering(m, g, 1000.0, inc, p));
}
BENCHMARK(BM_SolveScattering)->Arg(8)->Arg(16)->Arg(24);

static void BM_CueModelBuild(benchmark::State& state) {
  const SceneConfig s = scene();
  for (auto _ : state) benchmark::DoNotOptimize(CueModel(s));
}
BENCHMARK(BM_CueModelBuild)->Unit(benchmark::kMillisecond);

static void BM_CueEvaluate(benchmark::State& state) {
  const CueModel model(scene());
  const bool deriv = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate(1.3, 2.1, deriv));
}
BENCHMARK(BM_CueEvaluate)->Arg(0)->Arg(1);

static void BM_Localize(benchmark::State& state) {
  const CueModel model(scene());
  const auto obs = make_observation(model.spectrum(2.13, 1.10));
  OptimizerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(localize(obs, model, cfg));
}
BENCHMARK(BM_Localize)->Unit(benchmark::kMillisecond);

static void BM_EkfStep(benchmark::State& state) {
  const CueModel model(scene());
  const MeasurementModel mm{model.freqs()};
  const auto pm = process_matrices(1.0, 0.03, 0.03);
  TrackState s;
  s.x << 2.0, 1.0, 0.0, 0.0;
  s.P = TrackerConfig::default_covariance();
  const Eigen::VectorXd z = measurement(2.1, 1.1, model);
  for (auto _ : state) benchmark::DoNotOptimize(ekf_step(s, z, pm, mm, model));
}
BENCHMARK(BM_EkfStep);

static void BM_BeamformBand(benchmark::State& state) {
  SceneConfig s = scene();
  s.freqs = {1500.0, 3500.0, 11};
  const CueModel model(s);
  const auto grid = make_grid(162);
  for (auto _ : state) benchmark::DoNotOptimize(beamform_band(model, grid, {2.1293, 1.0996}));
}
BENCHMARK(BM_BeamformBand)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
