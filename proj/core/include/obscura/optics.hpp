#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "obscura/image.hpp"

namespace obscura {

/// Geometry of a pinhole camera. All lengths in metres.
struct OpticalConfig {
  double wavelength = 550e-9;
  double pinhole_radius = 75e-6;
  /// Pinhole-to-sensor distance; plays the role of the focal length.
  double distance = 0.02;
  double pixel_pitch = 4e-6;

  /// Throws InvalidArgument naming the first non-positive field.
  void validate() const;
  /// True when distance >= 10 * R^2 / wavelength (Fraunhofer regime).
  bool far_field() const noexcept;
};

/// Default per-channel wavelengths (R, G, B) in metres.
inline constexpr double kChannelWavelengths[3] = {610e-9, 550e-9, 465e-9};

/// Non-negative, unit-sum, odd-sized 2D kernel with a physical sample pitch.
class Psf {
 public:
  /// Validates the kernel as-is (odd sizes, non-negative, sum 1 within 1e-9).
  /// Use normalize_psf() for raw kernels.
  Psf(Plane kernel, double pitch);

  const Plane& kernel() const noexcept { return kernel_; }
  double pitch() const noexcept { return pitch_; }
  std::size_t height() const noexcept { return kernel_.height(); }
  std::size_t width() const noexcept { return kernel_.width(); }
  std::size_t radius_rows() const noexcept { return kernel_.height() / 2; }
  std::size_t radius_cols() const noexcept { return kernel_.width() / 2; }

  /// Single-sample impulse.
  static Psf delta(double pitch, std::size_t size = 1);

 private:
  Plane kernel_;
  double pitch_;
};

struct MtfSample {
  double frequency;   // cycles/mm
  double modulation;  // dimensionless
};

/// Radially averaged modulation transfer function.
class MtfCurve {
 public:
  /// Throws InvalidInput unless frequencies start at 0 and strictly increase.
  explicit MtfCurve(std::vector<MtfSample> samples);

  std::span<const MtfSample> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

 private:
  std::vector<MtfSample> samples_;
};

/// Airy disk width 1.22 * wavelength * distance / radius, in metres.
double airy_disk_width(const OpticalConfig& cfg);

/// Radius of the first dark ring, j1_0 * wavelength * distance / (2 pi R).
double airy_first_zero_radius(const OpticalConfig& cfg);

/// Sampled Fraunhofer PSF of a circular aperture at `cfg.pixel_pitch`,
/// normalized to unit sum. `size` must be odd and >= 3.
Psf airy_psf(const OpticalConfig& cfg, std::size_t size);

/// One Airy PSF per wavelength, all with the same geometry otherwise.
std::vector<Psf> channel_psfs(const OpticalConfig& cfg, std::size_t size,
                              std::span<const double> wavelengths = kChannelWavelengths);

/// Smallest odd kernel size covering three first-zero radii, capped at 511.
std::size_t default_psf_size(const OpticalConfig& cfg);

/// Incoherent cutoff frequency 2R / (wavelength * distance), cycles per metre.
double diffraction_cutoff(const OpticalConfig& cfg);
/// diffraction_cutoff() expressed in cycles per pixel.
double diffraction_cutoff_cpp(const OpticalConfig& cfg);

/// MTF by direct Fourier transform of the kernel (zero padded to at least
/// four times its extent) averaged over rings one DFT bin wide.
MtfCurve mtf_from_psf(const Psf& psf);

/// Same as mtf_from_psf for any real kernel, such as the effective PSF of a
/// restoration with negative lobes. Modulation is relative to the DC
/// response; throws InvalidInput when that is zero.
MtfCurve mtf_from_kernel(const Plane& kernel, double pitch);

/// Frequency of the first downward crossing of modulation 0.5, linearly
/// interpolated. Throws NotFound if the curve never reaches 0.5.
double mtf50(const MtfCurve& curve);

/// Clips negatives to zero and rescales to unit sum. Throws InvalidArgument
/// for even dimensions and InvalidInput for an all-zero kernel.
Psf normalize_psf(Plane kernel, double pitch);

struct ExposureMergeOptions {
  double saturation_level = 1.0;
  /// Samples below this fraction of saturation_level are treated as noise.
  double noise_floor_fraction = 0.02;
  double pitch = 4e-6;
};

/// Merges a bracketed stack of PSF captures into one HDR kernel.
///
/// Each unsaturated sample contributes its radiance estimate value/exposure
/// weighted by the exposure time. Samples under the noise floor are only
/// used for pixels where no frame rises above it. Multi-channel frames are
/// averaged over channels first.
Psf merge_exposure_stack(std::span<const PlanarImage> frames, std::span<const double> exposures,
                         const ExposureMergeOptions& options);

}  // namespace obscura
