// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails or overruns its time budget.

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "obscura/io.hpp"
#include "obscura/metrics.hpp"
#include "obscura/optics.hpp"
#include "obscura/restore.hpp"
#include "obscura/sensor.hpp"
#include "obscura_cli/commands.hpp"
#include "support/oracles.hpp"

namespace {

using namespace obscura;

constexpr double kBesselFirstZero = 3.8317059702075123;

// Tolerances and budgets.
constexpr double kWidthRelTol = 0.005;
constexpr double kConvolveTol = 1e-6;
constexpr double kVarianceRelTol = 0.05;
constexpr double kWienerMinPsnr = 80.0;
constexpr double kAdmmVsWienerMinPsnr = 60.0;
constexpr double kBenchmarkMinGainDb = 2.0;
constexpr double kMtf50MinGain = 1.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string strf(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::filesystem::path images_dir() { return std::filesystem::path(OBSCURA_TEST_DATA) / "images"; }

std::vector<std::filesystem::path> bundled_images() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(images_dir())) {
    if (e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double range_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

Outcome airy_geometry() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> wl(400e-9, 700e-9), radius(40e-6, 300e-6), dist(0.01, 0.2),
      pitch(1.5e-6, 8e-6);
  int tested = 0;
  double worst_zero = 0.0;  // in pitches
  double worst_width = 0.0;
  bool ok = true;
  while (tested < 20) {
    const OpticalConfig cfg{wl(rng), radius(rng), dist(rng), pitch(rng)};
    const double zero_m = kBesselFirstZero * cfg.wavelength * cfg.distance / (2 * std::numbers::pi * cfg.pinhole_radius);
    const double zero_px = zero_m / cfg.pixel_pitch;
    if (zero_px < 3.0 || zero_px > 80.0) continue;
    ++tested;
    const auto half = static_cast<std::size_t>(std::ceil(1.6 * zero_px));
    const Psf psf = airy_psf(cfg, 2 * half + 1);
    const Plane& k = psf.kernel();
    std::size_t i = 1;
    while (i + 1 <= half && !(k(half, half + i) <= k(half, half + i - 1) && k(half, half + i) <= k(half, half + i + 1))) ++i;
    const double err = std::abs(static_cast<double>(i) - zero_px);
    worst_zero = std::max(worst_zero, err);
    const double rel = std::abs(airy_disk_width(cfg) - 2 * zero_m) / (2 * zero_m);
    worst_width = std::max(worst_width, rel);
    ok = ok && err <= 1.0 && rel <= kWidthRelTol;
  }
  return {ok, strf("20 configs, worst first-zero error %.3f px (<= 1), worst width error %.3f%% (<= %.1f%%)",
                     worst_zero, 100 * worst_width, 100 * kWidthRelTol)};
}

Outcome forward_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto kernel = [&](std::size_t kh, std::size_t kw) {
    Plane raw(kh, kw);
    for (auto& v : raw.values()) v = 0.05 + u(rng);
    return normalize_psf(std::move(raw), 4e-6);
  };
  double worst = 0.0;
  int cases = 0;
  auto check = [&](std::size_t ch, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw) {
    const Psf psf = kernel(kh, kw);
    const auto img = testkit::random_image(ch, h, w, rng());
    const auto fast = forward_capture(img, psf);
    for (std::size_t c = 0; c < ch; ++c) {
      worst = std::max(worst, testkit::max_abs_diff(fast.channel(c), testkit::brute_force_convolve(img.channel(c), psf.kernel())));
    }
    ++cases;
  };
  for (std::size_t h = 1; h <= 16; ++h) {
    for (std::size_t w = 1; w <= 16; ++w) {
      for (std::size_t kh = 1; kh <= std::min<std::size_t>(7, h); kh += 2) {
        for (std::size_t kw = 1; kw <= std::min<std::size_t>(7, w); kw += 2) check(1, h, w, kh, kw);
      }
    }
  }
  std::uniform_int_distribution<std::size_t> dim(1, 16), half(0, 3);
  for (int i = 0; i < 100; ++i) {
    const std::size_t h = dim(rng), w = dim(rng);
    const std::size_t kh = std::min(2 * half(rng) + 1, h - (h + 1) % 2);
    const std::size_t kw = std::min(2 * half(rng) + 1, w - (w + 1) % 2);
    check(3, h, w, kh, kw);
  }
  return {worst <= kConvolveTol, strf("%d cases, max abs error %.3g (<= %.0e)", cases, worst, kConvolveTol)};
}

Outcome noise_statistics() {
  const double level = 0.4;
  const PlanarImage flat(1, 512, 512, level);
  bool ok = true;
  std::string detail;
  for (int iso : {800, 1600, 3200}) {
    NoiseParams p;
    p.iso = iso;
    const auto noisy = add_sensor_noise(flat, p, 1.0, 99);
    double sum = 0.0, sum2 = 0.0;
    for (double v : noisy.channel(0).values()) {
      sum += v;
      sum2 += v * v;
    }
    const double n = static_cast<double>(noisy.channel(0).size());
    const double var = (sum2 - sum * sum / n) / (n - 1);
    // Photon count is level * full_well / gain; each photon is worth gain / full_well.
    const double photons = level * p.full_well_photons * p.iso_base / iso;
    const double step = static_cast<double>(iso) / (p.iso_base * p.full_well_photons);
    const double predicted = photons * step * step + p.read_sigma_dn * p.read_sigma_dn;
    const double rel = std::abs(var - predicted) / predicted;
    ok = ok && rel <= kVarianceRelTol;
    detail += strf("ISO %d %.2f%%, ", iso, 100 * rel);
    const bool same = add_sensor_noise(flat, p, 1.0, 99) == noisy;
    const bool differs = !(add_sensor_noise(flat, p, 1.0, 100) == noisy);
    ok = ok && same && differs;
    if (!same || !differs) detail += "determinism broken, ";
  }
  return {ok, "variance error " + detail + strf("limit %.0f%%, same seed bit-identical", 100 * kVarianceRelTol)};
}

Outcome inverse_sanity() {
  Plane raw(5, 5, 0.02);
  raw(2, 2) = 0.6;
  const Psf psf = normalize_psf(std::move(raw), 4e-6);
  const auto src = testkit::random_image(3, 96, 96, 5);
  std::vector<Plane> blurred;
  for (std::size_t c = 0; c < 3; ++c) blurred.push_back(testkit::brute_force_circular(src.channel(c), psf.kernel()));
  const PlanarImage observation(std::move(blurred));
  const auto wiener = wiener_deconvolve(observation, psf, WienerParams{0.0});
  const double wiener_db = psnr(src, wiener);
  AdmmParams a;
  a.lambda_tv = 1e-12;
  a.rho = 1e-4;
  a.max_iters = 60;
  const auto admm = admm_tv_deconvolve(observation, psf, a);
  const double admm_db = psnr(wiener, admm.image);
  return {wiener_db >= kWienerMinPsnr && admm_db >= kAdmmVsWienerMinPsnr,
          strf("Wiener vs source %.1f dB (>= %.0f), ADMM vs Wiener %.1f dB (>= %.0f)", wiener_db, kWienerMinPsnr,
                 admm_db, kAdmmVsWienerMinPsnr)};
}

Outcome restoration_benchmark() {
  const OpticalConfig cfg;
  const Psf psf = airy_psf(cfg, default_psf_size(cfg));
  NoiseParams noise;
  noise.iso = 3200;
  const AdmmParams admm;
  std::vector<double> degraded_db, pipeline_db, admm_only_db;
  std::uint64_t seed = 1;
  for (const auto& path : bundled_images()) {
    const auto clean = io::read_image(path);
    const auto degraded = simulate_pinhole_capture(clean, psf, noise, 1.0, seed++);
    degraded_db.push_back(psnr(clean, degraded.clipped(0, 1)));
    pipeline_db.push_back(psnr(clean, restore_pipeline(degraded, psf, cfg, admm, {true}).image.clipped(0, 1)));
    admm_only_db.push_back(psnr(clean, restore_pipeline(degraded, psf, cfg, admm, {false}).image.clipped(0, 1)));
  }
  const double base = mean_of(degraded_db), full = mean_of(pipeline_db), alone = mean_of(admm_only_db);
  const bool ok = degraded_db.size() == 10 && full - base >= kBenchmarkMinGainDb && full > alone;
  return {ok, strf("%zu images, degraded %.3f dB, LPF+ADMM %.3f dB (gain %+.3f, need >= %.1f), ADMM alone %.3f dB "
                     "(LPF margin %+.3f, need > 0)",
                     degraded_db.size(), base, full, full - base, kBenchmarkMinGainDb, alone, full - alone)};
}

Outcome mtf50_gain() {
  const OpticalConfig cfg;
  const Psf psf = airy_psf(cfg, default_psf_size(cfg));
  const std::size_t n = 384, centre = n / 2, r = psf.radius_rows();
  const double amplitude = 50.0;
  PlanarImage point(1, n, n);
  point.at(0, centre, centre) = amplitude;
  NoiseParams noise;
  noise.iso = 100;
  noise.read_sigma_dn = 1e-3;
  const auto degraded = simulate_pinhole_capture(point, psf, noise, 100.0, 3);

  auto effective = [&](const PlanarImage& img) {
    Plane k = img.channel(0).crop(centre - r, centre - r, 2 * r + 1, 2 * r + 1);
    for (auto& v : k.values()) v /= amplitude;
    return k;
  };
  const double before = mtf50(mtf_from_kernel(effective(degraded), cfg.pixel_pitch));
  double best_db = -1.0, best_nsr = 0.0, after = 0.0;
  for (double nsr : {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    const auto restored = restore_pipeline(degraded, psf, cfg, WienerParams{nsr}).image;
    const double db = psnr(point, restored, amplitude);
    if (db > best_db) {
      best_db = db;
      best_nsr = nsr;
      after = mtf50(mtf_from_kernel(effective(restored), cfg.pixel_pitch));
    }
  }
  const double gain = after / before;
  return {gain >= kMtf50MinGain, strf("MTF50 blurred %.3f cy/mm, restored %.3f cy/mm at nsr %.0e, gain %.2fx (>= %.1f)",
                                        before, after, best_nsr, gain, kMtf50MinGain)};
}

Outcome sweep_ranges() {
  cli::RunConfig cfg;
  cfg.noise.iso = 1600;
  cfg.seed = 11;
  const Psf psf = cli::config_psf(cfg);
  const std::vector<double> isos{1600, 3200, 6400, 12800};
  const std::vector<double> exposures{1.0, 0.5, 0.25, 0.125};
  std::vector<double> iso_mean(isos.size(), 0.0), exp_mean(exposures.size(), 0.0);
  const std::vector<std::string> names{"00_camera.png", "02_coffee.png", "05_coins.png", "07_clock.png"};
  for (const auto& name : names) {
    const auto clean = io::read_image(images_dir() / name);
    const auto iso_rows = cli::run_sweep(cfg, clean, psf, cli::SweepAxis::Iso, isos);
    const auto exp_rows = cli::run_sweep(cfg, clean, psf, cli::SweepAxis::Exposure, exposures);
    for (std::size_t i = 0; i < isos.size(); ++i) iso_mean[i] += iso_rows[i].psnr_db / names.size();
    for (std::size_t i = 0; i < exposures.size(); ++i) exp_mean[i] += exp_rows[i].psnr_db / names.size();
  }
  const double iso_range = range_of(iso_mean), exp_range = range_of(exp_mean);
  std::string detail = strf("%zu images, ISO sweep PSNR", names.size());
  for (double v : iso_mean) detail += strf(" %.2f", v);
  detail += strf(" (range %.3f dB), exposure sweep PSNR", iso_range);
  for (double v : exp_mean) detail += strf(" %.2f", v);
  detail += strf(" (range %.3f dB)", exp_range);
  return {iso_range < exp_range, detail};
}

Outcome property_suites() {
  const std::string cmd = std::string("\"") + OBSCURA_UNIT_TESTS + "\" --gtest_brief=1 > \"" +
                          (std::filesystem::temp_directory_path() / "obscura_property_suites.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return {status == 0, strf("unit and property test binary exit status %d", status)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria{
      {1, "airy-geometry", 10, airy_geometry},
      {2, "forward-model-oracle", 30, forward_oracle},
      {3, "noise-statistics", 20, noise_statistics},
      {4, "inverse-filter-sanity", 30, inverse_sanity},
      {5, "restoration-benchmark", 300, restoration_benchmark},
      {6, "mtf50-gain", 60, mtf50_gain},
      {7, "sweep-ranges", 300, sweep_ranges},
      {8, "property-suites", 300, property_suites},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= c.budget_s;
    const bool pass = outcome.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %d %s: %s; %.1f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), elapsed, c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
