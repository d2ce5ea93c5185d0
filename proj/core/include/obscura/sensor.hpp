#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "obscura/image.hpp"
#include "obscura/optics.hpp"

namespace obscura {

/// Two-parameter sensor noise model: Poisson shot noise plus Gaussian read noise.
struct NoiseParams {
  int iso = 3200;
  /// Photons collected at signal 1.0 at the base ISO.
  double full_well_photons = 10000.0;
  int iso_base = 100;
  /// Read-noise standard deviation in normalized signal units at `iso`.
  double read_sigma_dn = 0.01;

  void validate() const;
  double gain() const noexcept { return static_cast<double>(iso) / iso_base; }
  /// Photons per unit normalized signal at the given exposure scale.
  double photons_per_unit(double exposure_scale) const noexcept {
    return exposure_scale * full_well_photons / gain();
  }
  /// Predicted per-sample variance in normalized units for a clean signal.
  double predicted_variance(double signal, double exposure_scale) const noexcept {
    return signal / photons_per_unit(exposure_scale) + read_sigma_dn * read_sigma_dn;
  }
};

enum class BayerPattern { RGGB, BGGR, GRBG, GBRG };

BayerPattern parse_bayer_pattern(std::string_view name);
std::string_view to_string(BayerPattern pattern);

/// Mosaicked sensor data, one colour sample per site.
struct BayerImage {
  Plane data;
  BayerPattern pattern = BayerPattern::RGGB;
  double black_level = 0.0;

  /// Throws InvalidInput on odd dimensions or non-finite samples.
  void validate() const;
};

/// Linear convolution of each channel with the PSF (FFT based, replicate
/// edges, same-size output). Throws InvalidArgument if the kernel is larger
/// than the image.
PlanarImage forward_capture(const PlanarImage& object, const Psf& psf);

/// Absolute position of an image's top-left sample, used to key noise so a
/// crop can be re-noised identically to the full frame.
struct SampleOrigin {
  std::size_t row = 0;
  std::size_t col = 0;
};

/// Adds shot and read noise. Every sample draws from its own counter-based
/// stream keyed by (seed, channel, row, col), so the result does not depend
/// on traversal order or threading. Output is not clipped.
PlanarImage add_sensor_noise(const PlanarImage& image, const NoiseParams& params,
                             double exposure_scale, std::uint64_t seed, SampleOrigin origin = {});

inline constexpr double kDefaultHeadroom = 4.0;

/// forward_capture, then add_sensor_noise, then clip to [0, headroom].
PlanarImage simulate_pinhole_capture(const PlanarImage& object, const Psf& psf,
                                     const NoiseParams& params, double exposure_scale,
                                     std::uint64_t seed, double headroom = kDefaultHeadroom);

BayerImage black_level_correct(const BayerImage& raw);

/// Bilinear demosaic to RGB. Requires black_level == 0 and even dimensions.
PlanarImage demosaic_bilinear(const BayerImage& raw);

namespace detail {
/// Stateless 64-bit hash of a key tuple (splitmix64 finalizer chain).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d) noexcept;
/// Uniform double in (0, 1) from a stateless counter-based generator.
double counter_uniform(std::uint64_t seed, std::uint64_t channel, std::uint64_t row,
                       std::uint64_t col, std::uint64_t draw) noexcept;
/// Poisson variate: inversion below mean 10, rounded normal approximation above.
double sample_poisson(double mean, double u, double z) noexcept;
}  // namespace detail

}  // namespace obscura
