#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "obscura/error.hpp"
#include "obscura/fft.hpp"
#include "obscura/optics.hpp"
#include "support/oracles.hpp"

using namespace obscura;

namespace {

OpticalConfig example_cfg(double radius = 75e-6) { return {550e-9, radius, 0.05, 4e-6}; }

double first_axis_minimum(const Psf& psf) {
  const auto& k = psf.kernel();
  const std::size_t c = k.width() / 2;
  for (std::size_t i = c + 1; i + 1 < k.width(); ++i) {
    if (k(c, i) <= k(c, i - 1) && k(c, i) <= k(c, i + 1)) return static_cast<double>(i - c);
  }
  return -1.0;
}

TEST(AiryDiskWidth, Examples) {
  EXPECT_NEAR(airy_disk_width(example_cfg()), 4.4733e-4, 5e-8);
  EXPECT_NEAR(airy_disk_width(example_cfg(150e-6)), 2.2367e-4, 5e-8);
  OpticalConfig doubled = example_cfg();
  doubled.wavelength *= 2;
  doubled.pinhole_radius *= 2;
  EXPECT_NEAR(airy_disk_width(doubled), airy_disk_width(example_cfg()), 1e-18);
}

TEST(AiryDiskWidth, RejectsNonPositiveFields) {
  OpticalConfig cfg = example_cfg();
  cfg.distance = 0;
  EXPECT_THROW(airy_disk_width(cfg), InvalidArgument);
  cfg = example_cfg();
  cfg.pixel_pitch = -1;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(OpticalConfig, FarField) {
  OpticalConfig cfg = example_cfg();
  EXPECT_FALSE(cfg.far_field());
  cfg.distance = 10 * cfg.pinhole_radius * cfg.pinhole_radius / cfg.wavelength * 1.01;
  EXPECT_TRUE(cfg.far_field());
}

TEST(AiryPsf, FirstZeroOfExampleConfig) {
  const auto cfg = example_cfg();
  const double radius = airy_first_zero_radius(cfg);
  EXPECT_NEAR(radius, 2.23606e-4, 5e-9);
  EXPECT_NEAR(radius / cfg.pixel_pitch, 55.9, 0.05);
  const Psf psf = airy_psf(cfg, 257);
  const auto& k = psf.kernel();
  const std::size_t c = 128;
  const auto expected = static_cast<std::size_t>(std::lround(radius / cfg.pixel_pitch));
  std::size_t at = expected - 1;
  for (std::size_t i = expected - 1; i <= expected + 1; ++i) {
    if (k(c, c + i) < k(c, c + at)) at = i;
  }
  EXPECT_EQ(at, expected);
  // The nearest sample sits about 0.1 px off the zero, so the dip is about
  // 2e-6 of the peak rather than exactly 0.
  const long double a = 2 * std::numbers::pi_v<long double> * cfg.pinhole_radius * cfg.pixel_pitch *
                        static_cast<long double>(at) / (cfg.wavelength * cfg.distance);
  const double amp = static_cast<double>(2 * testkit::series_j1(a, 120) / a);
  EXPECT_NEAR(k(c, c + at) / k(c, c), amp * amp, 1e-9);
  EXPECT_LT(k(c, c + at), 3e-6 * k(c, c));
  EXPECT_NEAR(first_axis_minimum(psf), radius / cfg.pixel_pitch, 1.0);
}

TEST(AiryPsf, NarrowPsfIsNearlyDelta) {
  OpticalConfig cfg = example_cfg();
  cfg.pixel_pitch = 1e-2;
  const Psf psf = airy_psf(cfg, 3);
  EXPECT_GT(psf.kernel()(1, 1), 0.99);
}

TEST(AiryPsf, RejectsBadSizes) {
  EXPECT_THROW(airy_psf(example_cfg(), 4), InvalidArgument);
  EXPECT_THROW(airy_psf(example_cfg(), 1), InvalidArgument);
}

TEST(AiryPsf, NormalizedSymmetricCentrePeakForRandomConfigs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lambda(400e-9, 700e-9), radius(20e-6, 300e-6), dist(0.005, 0.2),
      pitch(1e-6, 10e-6);
  for (int t = 0; t < 30; ++t) {
    const OpticalConfig cfg{lambda(rng), radius(rng), dist(rng), pitch(rng)};
    const std::size_t size = std::min<std::size_t>(default_psf_size(cfg), 201);
    const Psf psf = airy_psf(cfg, size);
    const auto& k = psf.kernel();
    EXPECT_NEAR(k.sum(), 1.0, 1e-9);
    EXPECT_GE(k.min(), 0.0);
    EXPECT_EQ(k.max(), k(size / 2, size / 2));
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t c = 0; c < size; ++c) {
        ASSERT_NEAR(k(r, c), k(c, r), 1e-9);
        ASSERT_NEAR(k(r, c), k(size - 1 - r, size - 1 - c), 1e-9);
      }
    }
  }
}

TEST(AiryPsf, ChannelPsfsWidenWithWavelength) {
  const auto psfs = channel_psfs(example_cfg(), 101);
  ASSERT_EQ(psfs.size(), 3u);
  EXPECT_LT(psfs[0].kernel()(50, 50), psfs[1].kernel()(50, 50));
  EXPECT_LT(psfs[1].kernel()(50, 50), psfs[2].kernel()(50, 50));
}

TEST(DiffractionCutoff, Examples) {
  OpticalConfig cfg = example_cfg();
  EXPECT_NEAR(diffraction_cutoff(cfg), 5454.5, 0.05);
  EXPECT_NEAR(diffraction_cutoff_cpp(cfg), 0.02182, 5e-6);
  EXPECT_NEAR(diffraction_cutoff(example_cfg(37.5e-6)), diffraction_cutoff(cfg) / 2, 1e-9);
}

TEST(Mtf, DeltaIsFlat) {
  const auto curve = mtf_from_psf(Psf::delta(4e-6, 5));
  const double nyquist = 1.0 / (2 * 4e-6) / 1000;
  EXPECT_NEAR(curve.samples().back().frequency, nyquist, 1e-9);
  for (const auto& s : curve.samples()) EXPECT_NEAR(s.modulation, 1.0, 1e-6);
  EXPECT_THROW(mtf50(curve), NotFound);
}

TEST(Mtf, AiryFallsBelowOnePercentAtCutoffAndIsMonotone) {
  const auto cfg = example_cfg();
  const auto curve = mtf_from_psf(airy_psf(cfg, 257));
  const double cutoff_mm = diffraction_cutoff(cfg) / 1000;
  const auto s = curve.samples();
  EXPECT_DOUBLE_EQ(s[0].modulation, 1.0);
  double at_cutoff = -1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_LE(s[i].modulation, s[i - 1].modulation + 1e-3) << "f=" << s[i].frequency;
    EXPECT_GE(s[i].modulation, 0.0);
    EXPECT_LE(s[i].modulation, 1.0 + 1e-9);
    if (s[i - 1].frequency < cutoff_mm && s[i].frequency >= cutoff_mm) at_cutoff = s[i].modulation;
  }
  EXPECT_GE(at_cutoff, 0.0);
  EXPECT_LT(at_cutoff, 0.01);
}

TEST(Mtf, MatchesDirectDftRingAverage) {
  const Psf psf = normalize_psf(testkit::gaussian_kernel(5, 0.9), 4e-6);
  const auto curve = mtf_from_psf(psf);
  const int n = 20;
  std::vector<double> total(n / 2 + 1, 0.0);
  std::vector<double> count(n / 2 + 1, 0.0);
  for (int u = -n / 2 + 1; u <= n / 2; ++u) {
    for (int v = -n / 2 + 1; v <= n / 2; ++v) {
      const auto bin = static_cast<std::size_t>(std::lround(std::hypot(u, v)));
      if (bin >= total.size()) continue;
      std::complex<double> acc = 0;
      for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 5; ++c) {
          const double phase = -2 * std::numbers::pi * (u * static_cast<double>(r) + v * static_cast<double>(c)) / n;
          acc += psf.kernel()(r, c) * std::polar(1.0, phase);
        }
      }
      total[bin] += std::abs(acc);
      count[bin] += 1;
    }
  }
  ASSERT_EQ(curve.samples().size(), total.size());
  for (std::size_t b = 1; b < total.size(); ++b) {
    EXPECT_NEAR(curve.samples()[b].modulation, total[b] / count[b], 1e-12) << "bin " << b;
  }
}

TEST(Mtf, ScalingTheorem) {
  for (double radius : {75e-6, 120e-6, 200e-6}) {
    const OpticalConfig narrow = example_cfg(radius);
    const OpticalConfig wide = example_cfg(radius / 2);
    const double m1 = mtf50(mtf_from_psf(airy_psf(narrow, 2 * default_psf_size(narrow) + 1)));
    const double m2 = mtf50(mtf_from_psf(airy_psf(wide, 2 * default_psf_size(wide) + 1)));
    EXPECT_NEAR(m2 / m1, 0.5, 0.025) << "R=" << radius;
  }
}

TEST(Mtf50, Interpolation) {
  EXPECT_DOUBLE_EQ(mtf50(MtfCurve({{0, 1}, {10, 0.5}, {20, 0}})), 10.0);
  EXPECT_DOUBLE_EQ(mtf50(MtfCurve({{0, 1}, {10, 0.6}, {20, 0.4}})), 15.0);
  EXPECT_THROW(mtf50(MtfCurve({{0, 1}, {10, 0.9}})), NotFound);
  EXPECT_THROW(MtfCurve({{1, 1}, {2, 0.5}}), InvalidInput);
  EXPECT_THROW(MtfCurve({{0, 1}, {2, 0.5}, {2, 0.4}}), InvalidInput);
}

TEST(NormalizePsf, Examples) {
  EXPECT_DOUBLE_EQ(normalize_psf(Plane{{0, 0, 0}, {0, 2, 0}, {0, 0, 0}}, 1e-6).kernel()(1, 1), 1.0);
  EXPECT_THROW(normalize_psf(Plane{{1, 1}, {1, 1}}, 1e-6), InvalidArgument);
  const Psf clipped = normalize_psf(Plane{{-1, 0, 0}, {0, 4, 0}, {0, 0, 0}}, 1e-6);
  EXPECT_DOUBLE_EQ(clipped.kernel()(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(clipped.kernel()(0, 0), 0.0);
  EXPECT_THROW(normalize_psf(Plane(3, 3, 0.0), 1e-6), InvalidInput);
  EXPECT_THROW(normalize_psf(Plane(3, 3, -1.0), 1e-6), InvalidInput);
}

TEST(NormalizePsf, SumsToOneForRandomKernels) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Psf psf = normalize_psf(testkit::random_plane(7, 9, rng, -0.2, 3.0), 2e-6);
    EXPECT_NEAR(psf.kernel().sum(), 1.0, 1e-12);
    EXPECT_GE(psf.kernel().min(), 0.0);
  }
}

TEST(PsfType, RejectsInvalidKernels) {
  EXPECT_THROW(Psf(Plane{{0.5, 0.5}}, 1e-6), InvalidArgument);
  EXPECT_THROW(Psf(Plane{{0.5, 0.6, -0.1}}, 1e-6), InvalidInput);
  EXPECT_THROW(Psf(Plane{{0.5, 0.6, 0.1}}, 1e-6), InvalidInput);
  EXPECT_THROW(Psf(Plane{{1.0}}, 0.0), InvalidArgument);
}

PlanarImage gray(const Plane& p) { return PlanarImage(std::vector<Plane>{p}); }

TEST(MergeExposureStack, IdenticalFramesGiveNormalizedFrame) {
  const Plane f{{0.1, 0.2, 0.1}, {0.2, 0.8, 0.2}, {0.1, 0.2, 0.1}};
  const std::vector<PlanarImage> frames{gray(f), gray(f)};
  const std::vector<double> t{1.0, 1.0};
  const Psf merged = merge_exposure_stack(frames, t, {});
  const Psf expected = normalize_psf(f, 4e-6);
  EXPECT_LT(testkit::max_abs_diff(merged.kernel(), expected.kernel()), 1e-12);
}

TEST(MergeExposureStack, ConsistentRadiance) {
  const Plane b{{0.05, 0.1, 0.05}, {0.1, 0.4, 0.1}, {0.05, 0.1, 0.05}};
  Plane a = b;
  for (auto& v : a.values()) v *= 2;
  const std::vector<PlanarImage> frames{gray(a), gray(b)};
  const std::vector<double> t{2.0, 1.0};
  const Psf merged = merge_exposure_stack(frames, t, {});
  EXPECT_LT(testkit::max_abs_diff(merged.kernel(), normalize_psf(b, 4e-6).kernel()), 1e-12);
}

TEST(MergeExposureStack, SaturatedCentreTakenFromShortExposure) {
  // Long exposure 4 s saturates the centre; the short 1 s frame has corners
  // below the 2% floor.
  const Plane long_frame{{0.04, 0.21, 0.04}, {0.21, 1.0, 0.19}, {0.04, 0.2, 0.04}};
  const Plane short_frame{{0.01, 0.05, 0.01}, {0.05, 0.5, 0.05}, {0.01, 0.05, 0.01}};
  const std::vector<PlanarImage> frames{gray(long_frame), gray(short_frame)};
  const std::vector<double> t{4.0, 1.0};
  ExposureMergeOptions opts;
  opts.pitch = 3e-6;
  const Psf merged = merge_exposure_stack(frames, t, opts);
  // Per pixel: sum of unsaturated above-floor values / sum of their exposures.
  const Plane radiance{{0.04 / 4, 0.26 / 5, 0.04 / 4}, {0.26 / 5, 0.5 / 1, 0.24 / 5}, {0.04 / 4, 0.25 / 5, 0.04 / 4}};
  const double total = radiance.sum();
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(merged.kernel()(r, c), radiance(r, c) / total, 1e-12);
  }
  EXPECT_EQ(merged.pitch(), 3e-6);
}

TEST(MergeExposureStack, Errors) {
  const Plane f(3, 3, 0.5);
  const std::vector<PlanarImage> one{gray(f)};
  const std::vector<double> t1{1.0};
  EXPECT_THROW(merge_exposure_stack(one, t1, {}), InvalidInput);
  const std::vector<PlanarImage> mismatched{gray(f), gray(Plane(5, 5, 0.5))};
  const std::vector<double> t2{1.0, 2.0};
  EXPECT_THROW(merge_exposure_stack(mismatched, t2, {}), InvalidInput);
  Plane sat = f;
  sat(1, 1) = 1.0;
  const std::vector<PlanarImage> saturated{gray(sat), gray(sat)};
  try {
    merge_exposure_stack(saturated, t2, {});
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("saturated"), std::string::npos) << e.what();
  }
  const std::vector<double> bad_t{1.0, 0.0};
  EXPECT_THROW(merge_exposure_stack(std::vector<PlanarImage>{gray(f), gray(f)}, bad_t, {}), InvalidInput);
}

}  // namespace

TEST(Mtf, KernelVariantMatchesPsfAndIgnoresScale) {
  const Psf psf = normalize_psf(testkit::gaussian_kernel(7, 1.3), 4e-6);
  const auto a = mtf_from_psf(psf);
  Plane scaled = psf.kernel();
  for (auto& v : scaled.values()) v *= -3.0;
  const auto b = mtf_from_kernel(scaled, 4e-6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_DOUBLE_EQ(a.samples()[i].frequency, b.samples()[i].frequency);
    EXPECT_NEAR(a.samples()[i].modulation, b.samples()[i].modulation, 1e-12);
  }
  Plane zero_sum(3, 3);
  zero_sum(1, 0) = 1.0;
  zero_sum(1, 2) = -1.0;
  EXPECT_THROW(mtf_from_kernel(zero_sum, 4e-6), InvalidInput);
  EXPECT_THROW(mtf_from_kernel(psf.kernel(), 0.0), InvalidArgument);
}
