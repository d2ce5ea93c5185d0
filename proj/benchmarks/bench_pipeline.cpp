#include <benchmark/benchmark.h>

#include "obscura/fft.hpp"
#include "obscura/metrics.hpp"
#include "obscura/optics.hpp"
#include "obscura/restore.hpp"
#include "obscura/sensor.hpp"

namespace {

obscura::PlanarImage ramp_scene(std::size_t n) {
  obscura::Plane p(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) p(r, c) = ((r / 16 + c / 16) % 2 == 0 ? 0.8 : 0.2) + 0.001 * double(c % 7);
  }
  return obscura::PlanarImage(std::vector<obscura::Plane>{p});
}

obscura::Psf default_psf() {
  obscura::OpticalConfig cfg;
  return obscura::airy_psf(cfg, obscura::default_psf_size(cfg));
}

}  // namespace

static void BM_ReplicateConvolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto scene = ramp_scene(n);
  const auto psf = default_psf();
  for (auto _ : state) benchmark::DoNotOptimize(obscura::forward_capture(scene, psf));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_ReplicateConvolve)->Arg(256)->Arg(1024);

static void BM_SensorNoise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto scene = ramp_scene(n);
  obscura::NoiseParams noise;
  for (auto _ : state) benchmark::DoNotOptimize(obscura::add_sensor_noise(scene, noise, 1.0, 7));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_SensorNoise)->Arg(256)->Arg(1024);

static void BM_Wiener(benchmark::State& state) {
  const auto scene = ramp_scene(512);
  const auto psf = default_psf();
  for (auto _ : state) benchmark::DoNotOptimize(obscura::wiener_deconvolve(scene, psf, {1e-3}));
}
BENCHMARK(BM_Wiener);

static void BM_AdmmIterations(benchmark::State& state) {
  const auto scene = ramp_scene(256);
  const auto psf = default_psf();
  obscura::AdmmParams params;
  params.max_iters = static_cast<int>(state.range(0));
  params.tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(obscura::admm_tv_deconvolve(scene, psf, params));
}
BENCHMARK(BM_AdmmIterations)->Arg(10)->Arg(50);

static void BM_Ssim(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = ramp_scene(n);
  const auto b = obscura::add_sensor_noise(a, obscura::NoiseParams{}, 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(obscura::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
