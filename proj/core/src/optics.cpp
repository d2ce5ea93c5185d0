#include "obscura/optics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "obscura/bessel.hpp"
#include "obscura/error.hpp"
#include "obscura/fft.hpp"

namespace obscura {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string("optical config: ") + name + " must be positive and finite");
  }
}

}  // namespace

void OpticalConfig::validate() const {
  require_positive(wavelength, "wavelength");
  require_positive(pinhole_radius, "pinhole_radius");
  require_positive(distance, "distance");
  require_positive(pixel_pitch, "pixel_pitch");
}

bool OpticalConfig::far_field() const noexcept {
  return distance >= 10.0 * pinhole_radius * pinhole_radius / wavelength;
}

Psf::Psf(Plane kernel, double pitch) : kernel_(std::move(kernel)), pitch_(pitch) {
  if (kernel_.height() % 2 == 0 || kernel_.width() % 2 == 0) {
    throw InvalidArgument("PSF dimensions must be odd, got " + std::to_string(kernel_.height()) +
                          "x" + std::to_string(kernel_.width()));
  }
  if (!(pitch_ > 0.0)) throw InvalidArgument("PSF pitch must be positive");
  for (double v : kernel_.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("PSF samples must be finite and non-negative");
  }
  if (std::abs(kernel_.sum() - 1.0) > 1e-9) throw InvalidInput("PSF must sum to 1");
}

Psf Psf::delta(double pitch, std::size_t size) {
  Plane k(size, size);
  k(size / 2, size / 2) = 1.0;
  return Psf(std::move(k), pitch);
}

MtfCurve::MtfCurve(std::vector<MtfSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty() || samples_.front().frequency != 0.0) {
    throw InvalidInput("MTF curve must start at frequency 0");
  }
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].frequency > samples_[i - 1].frequency)) {
      throw InvalidInput("MTF frequencies must be strictly increasing");
    }
  }
}

double airy_disk_width(const OpticalConfig& cfg) {
  cfg.validate();
  return 1.22 * cfg.wavelength * cfg.distance / cfg.pinhole_radius;
}

double airy_first_zero_radius(const OpticalConfig& cfg) {
  cfg.validate();
  return kBesselJ1FirstZero * cfg.wavelength * cfg.distance / (2.0 * std::numbers::pi * cfg.pinhole_radius);
}

Psf airy_psf(const OpticalConfig& cfg, std::size_t size) {
  cfg.validate();
  if (size < 3 || size % 2 == 0) {
    throw InvalidArgument("PSF size must be odd and at least 3, got " + std::to_string(size));
  }
  if (!cfg.far_field()) {
    spdlog::warn("pinhole distance {} m is not far-field (R^2/lambda = {} m); Airy model is approximate",
                 cfg.distance, cfg.pinhole_radius * cfg.pinhole_radius / cfg.wavelength);
  }
  const double k = 2.0 * std::numbers::pi / cfg.wavelength;
  const double scale = k * cfg.pinhole_radius / cfg.distance;
  const auto centre = static_cast<double>(size / 2);
  Plane kernel(size, size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double rho = cfg.pixel_pitch * std::hypot(static_cast<double>(r) - centre,
                                                      static_cast<double>(c) - centre);
      const double a = scale * rho;
      const double amplitude = a == 0.0 ? 1.0 : 2.0 * bessel_j1(a) / a;
      kernel(r, c) = amplitude * amplitude;
    }
  }
  return normalize_psf(std::move(kernel), cfg.pixel_pitch);
}

std::vector<Psf> channel_psfs(const OpticalConfig& cfg, std::size_t size, std::span<const double> wavelengths) {
  std::vector<Psf> out;
  out.reserve(wavelengths.size());
  for (double lambda : wavelengths) {
    OpticalConfig c = cfg;
    c.wavelength = lambda;
    out.push_back(airy_psf(c, size));
  }
  return out;
}

std::size_t default_psf_size(const OpticalConfig& cfg) {
  const double radius_px = 3.0 * airy_first_zero_radius(cfg) / cfg.pixel_pitch;
  const auto half = static_cast<std::size_t>(std::ceil(radius_px));
  return std::clamp<std::size_t>(2 * half + 1, 3, 511);
}

double diffraction_cutoff(const OpticalConfig& cfg) {
  cfg.validate();
  return 2.0 * cfg.pinhole_radius / (cfg.wavelength * cfg.distance);
}

double diffraction_cutoff_cpp(const OpticalConfig& cfg) { return diffraction_cutoff(cfg) * cfg.pixel_pitch; }

MtfCurve mtf_from_psf(const Psf& psf) { return mtf_from_kernel(psf.kernel(), psf.pitch()); }

MtfCurve mtf_from_kernel(const Plane& kernel, double pitch) {
  if (!(pitch > 0.0)) throw InvalidArgument("MTF pitch must be positive");
  const std::size_t extent = std::max(kernel.height(), kernel.width());
  std::size_t n = 4 * extent;
  n += n % 2;
  const auto spectrum = fft::transfer_function(kernel, n, n);
  const double dc = std::abs(spectrum(0, 0));
  if (!(dc > 0.0)) throw InvalidInput("kernel has no DC response");
  const std::size_t bins = n / 2 + 1;
  std::vector<double> total(bins, 0.0);
  std::vector<double> weight(bins, 0.0);
  for (std::size_t r = 0; r < spectrum.rows(); ++r) {
    const double u = fft::bin_frequency(r, n) * static_cast<double>(n);
    for (std::size_t c = 0; c < spectrum.cols(); ++c) {
      const double v = static_cast<double>(c);
      const auto bin = static_cast<std::size_t>(std::lround(std::hypot(u, v)));
      if (bin >= bins) continue;
      // Interior half-plane columns stand in for their mirrored twins.
      const double w = (c == 0 || 2 * c == n) ? 1.0 : 2.0;
      total[bin] += w * std::abs(spectrum(r, c)) / dc;
      weight[bin] += w;
    }
  }
  std::vector<MtfSample> samples;
  samples.reserve(bins);
  const double cycles_per_mm_per_bin = 1.0 / (static_cast<double>(n) * pitch) / 1000.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (weight[b] == 0.0) continue;
    double m = total[b] / weight[b];
    if (b == 0) m = 1.0;
    samples.push_back({static_cast<double>(b) * cycles_per_mm_per_bin, m});
  }
  return MtfCurve(std::move(samples));
}

double mtf50(const MtfCurve& curve) {
  const auto s = curve.samples();
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].modulation <= 0.5 && s[i - 1].modulation > 0.5) {
      const double t = (s[i - 1].modulation - 0.5) / (s[i - 1].modulation - s[i].modulation);
      return s[i - 1].frequency + t * (s[i].frequency - s[i - 1].frequency);
    }
  }
  throw NotFound("MTF never drops to 0.5 within the sampled range");
}

Psf normalize_psf(Plane kernel, double pitch) {
  if (kernel.height() % 2 == 0 || kernel.width() % 2 == 0) {
    throw InvalidArgument("PSF dimensions must be odd, got " + std::to_string(kernel.height()) + "x" +
                          std::to_string(kernel.width()));
  }
  for (double& v : kernel.values()) {
    if (!std::isfinite(v)) throw InvalidInput("PSF kernel contains non-finite samples");
    v = std::max(v, 0.0);
  }
  const double total = kernel.sum();
  if (!(total > 0.0)) throw InvalidInput("PSF kernel is zero after clipping negatives");
  for (double& v : kernel.values()) v /= total;
  // Fold the residual rounding error into the peak so the sum is 1 to the ulp.
  auto values = kernel.values();
  auto peak = std::max_element(values.begin(), values.end());
  *peak += 1.0 - kernel.sum();
  return Psf(std::move(kernel), pitch);
}

Psf merge_exposure_stack(std::span<const PlanarImage> frames, std::span<const double> exposures,
                         const ExposureMergeOptions& options) {
  if (frames.size() < 2) throw InvalidInput("exposure merge needs at least 2 frames");
  if (exposures.size() != frames.size()) throw InvalidInput("exposure merge: one exposure per frame required");
  if (!(options.saturation_level > 0.0)) throw InvalidArgument("saturation level must be positive");
  const std::size_t h = frames.front().height();
  const std::size_t w = frames.front().width();
  for (const auto& f : frames) {
    if (f.height() != h || f.width() != w) throw InvalidInput("exposure merge: frames differ in size");
    f.require_finite();
  }
  for (double t : exposures) {
    if (!(t > 0.0)) throw InvalidInput("exposure merge: exposures must be positive");
  }

  const double floor = options.noise_floor_fraction * options.saturation_level;
  Plane merged(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double strong_sum = 0.0, strong_weight = 0.0;
      double weak_sum = 0.0, weak_weight = 0.0;
      for (std::size_t i = 0; i < frames.size(); ++i) {
        double v = 0.0;
        for (const auto& p : frames[i].planes()) v += p(r, c);
        v /= static_cast<double>(frames[i].channels());
        if (v >= options.saturation_level) continue;
        // Weight t times radiance v / t.
        const double t = exposures[i];
        if (v >= floor) {
          strong_sum += v;
          strong_weight += t;
        } else {
          weak_sum += v;
          weak_weight += t;
        }
      }
      if (strong_weight > 0.0) {
        merged(r, c) = strong_sum / strong_weight;
      } else if (weak_weight > 0.0) {
        merged(r, c) = weak_sum / weak_weight;
      } else {
        throw InvalidInput("exposure merge: pixel (" + std::to_string(r) + ", " + std::to_string(c) +
                           ") is saturated in every frame");
      }
    }
  }
  return normalize_psf(std::move(merged), options.pitch);
}

}  // namespace obscura
