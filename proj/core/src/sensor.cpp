#include "obscura/sensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "obscura/error.hpp"
#include "obscura/fft.hpp"

namespace obscura {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Colour index (0 = R, 1 = G, 2 = B) at site parity (row & 1, col & 1).
std::array<std::array<int, 2>, 2> site_colours(BayerPattern pattern) {
  switch (pattern) {
    case BayerPattern::RGGB: return {{{0, 1}, {1, 2}}};
    case BayerPattern::BGGR: return {{{2, 1}, {1, 0}}};
    case BayerPattern::GRBG: return {{{1, 0}, {2, 1}}};
    case BayerPattern::GBRG: return {{{1, 2}, {0, 1}}};
  }
  return {{{0, 1}, {1, 2}}};
}

// Mirror without repeating the edge sample; keeps Bayer parity intact.
std::size_t reflect101(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  if (i < 0) i = -i;
  if (i >= m) i = 2 * (m - 1) - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

void NoiseParams::validate() const {
  if (iso <= 0) throw InvalidArgument("noise: iso must be positive");
  if (iso_base <= 0) throw InvalidArgument("noise: iso_base must be positive");
  if (iso < iso_base) throw InvalidArgument("noise: iso must be >= iso_base");
  if (!(full_well_photons > 0.0)) throw InvalidArgument("noise: full_well_photons must be positive");
  if (!(read_sigma_dn >= 0.0)) throw InvalidArgument("noise: read_sigma_dn must be non-negative");
}

BayerPattern parse_bayer_pattern(std::string_view name) {
  if (name == "RGGB" || name == "rggb") return BayerPattern::RGGB;
  if (name == "BGGR" || name == "bggr") return BayerPattern::BGGR;
  if (name == "GRBG" || name == "grbg") return BayerPattern::GRBG;
  if (name == "GBRG" || name == "gbrg") return BayerPattern::GBRG;
  throw InvalidArgument("unknown Bayer pattern '" + std::string(name) + "'");
}

std::string_view to_string(BayerPattern pattern) {
  switch (pattern) {
    case BayerPattern::RGGB: return "RGGB";
    case BayerPattern::BGGR: return "BGGR";
    case BayerPattern::GRBG: return "GRBG";
    case BayerPattern::GBRG: return "GBRG";
  }
  return "RGGB";
}

void BayerImage::validate() const {
  if (data.empty() || data.height() % 2 != 0 || data.width() % 2 != 0) {
    throw InvalidInput("Bayer image dimensions must be even and non-zero, got " +
                       std::to_string(data.height()) + "x" + std::to_string(data.width()));
  }
  for (double v : data.values()) {
    if (!std::isfinite(v)) throw InvalidInput("Bayer image contains NaN or infinite samples");
  }
}

namespace detail {

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return mix64(h ^ d);
}

double counter_uniform(std::uint64_t seed, std::uint64_t channel, std::uint64_t row, std::uint64_t col,
                       std::uint64_t draw) noexcept {
  const std::uint64_t h = counter_hash(seed, channel, row, col, draw);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double sample_poisson(double mean, double u, double z) noexcept {
  if (mean <= 0.0) return 0.0;
  if (mean >= 10.0) return std::max(0.0, std::round(mean + std::sqrt(mean) * z));
  double p = std::exp(-mean);
  double cdf = p;
  int k = 0;
  while (u > cdf && k < 200) {
    ++k;
    p *= mean / k;
    cdf += p;
  }
  return static_cast<double>(k);
}

}  // namespace detail

PlanarImage forward_capture(const PlanarImage& object, const Psf& psf) {
  object.require_finite();
  if (psf.height() > object.height() || psf.width() > object.width()) {
    throw InvalidArgument("PSF kernel (" + std::to_string(psf.height()) + "x" + std::to_string(psf.width()) +
                          ") is larger than the image (" + std::to_string(object.height()) + "x" +
                          std::to_string(object.width()) + ")");
  }
  std::vector<Plane> out;
  out.reserve(object.channels());
  for (const auto& p : object.planes()) out.push_back(fft::replicate_convolve(p, psf.kernel()));
  return PlanarImage(std::move(out));
}

PlanarImage add_sensor_noise(const PlanarImage& image, const NoiseParams& params, double exposure_scale,
                             std::uint64_t seed, SampleOrigin origin) {
  params.validate();
  if (!(exposure_scale > 0.0)) throw InvalidArgument("exposure_scale must be positive");
  image.require_finite();
  const double photons_per_unit = params.photons_per_unit(exposure_scale);
  const double read_sigma = params.read_sigma_dn;
  PlanarImage out = image;
  for (std::size_t c = 0; c < image.channels(); ++c) {
    const Plane& src = image.channel(c);
    Plane& dst = out.channel(c);
    for (std::size_t r = 0; r < src.height(); ++r) {
      const std::uint64_t row = origin.row + r;
      for (std::size_t col = 0; col < src.width(); ++col) {
        const double s = src(r, col);
        if (s < 0.0) {
          throw InvalidInput("negative sample " + std::to_string(s) + " at channel " + std::to_string(c) +
                             ", row " + std::to_string(r) + ", col " + std::to_string(col));
        }
        const std::uint64_t column = origin.col + col;
        auto uniform = [&](std::uint64_t k) { return detail::counter_uniform(seed, c, row, column, k); };
        auto gaussian = [&](std::uint64_t k) {
          return std::sqrt(-2.0 * std::log(uniform(k))) * std::cos(2.0 * std::numbers::pi * uniform(k + 1));
        };
        const double photons = s * photons_per_unit;
        const double noisy = detail::sample_poisson(photons, uniform(0), gaussian(0));
        double value = noisy / photons_per_unit;
        if (read_sigma > 0.0) value += read_sigma * gaussian(2);
        dst(r, col) = value;
      }
    }
  }
  return out;
}

PlanarImage simulate_pinhole_capture(const PlanarImage& object, const Psf& psf, const NoiseParams& params,
                                     double exposure_scale, std::uint64_t seed, double headroom) {
  if (!(headroom > 0.0)) throw InvalidArgument("headroom must be positive");
  // FFT round-off can leave tiny negatives next to zero-valued regions.
  PlanarImage blurred = forward_capture(object, psf).clipped(0.0, std::numeric_limits<double>::max());
  return add_sensor_noise(blurred, params, exposure_scale, seed).clipped(0.0, headroom);
}

BayerImage black_level_correct(const BayerImage& raw) {
  BayerImage out = raw;
  for (double& v : out.data.values()) v = std::max(v - raw.black_level, 0.0);
  out.black_level = 0.0;
  return out;
}

PlanarImage demosaic_bilinear(const BayerImage& raw) {
  raw.validate();
  if (raw.black_level != 0.0) {
    throw InvalidArgument("demosaic expects black-level-corrected data (black_level = 0)");
  }
  const auto colours = site_colours(raw.pattern);
  const std::size_t h = raw.data.height();
  const std::size_t w = raw.data.width();
  PlanarImage out(3, h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const int own = colours[r & 1][c & 1];
      std::array<double, 3> sum{};
      std::array<int, 3> count{};
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const auto rr = reflect101(static_cast<std::ptrdiff_t>(r) + dr, h);
          const auto cc = reflect101(static_cast<std::ptrdiff_t>(c) + dc, w);
          const int colour = colours[rr & 1][cc & 1];
          // Same-colour neighbours in the 3x3 window are exactly the
          // standard 2- and 4-tap bilinear kernels.
          sum[colour] += raw.data(rr, cc);
          ++count[colour];
        }
      }
      for (int ch = 0; ch < 3; ++ch) {
        out.at(ch, r, c) = ch == own ? raw.data(r, c) : sum[ch] / count[ch];
      }
    }
  }
  return out;
}

}  // namespace obscura
