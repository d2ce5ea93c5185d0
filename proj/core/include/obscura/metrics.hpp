#pragma once

#include <limits>

#include "obscura/image.hpp"

namespace obscura {

/// PSNR returned for identical images.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

struct QualityScore {
  double psnr_db;
  double ssim;
};

/// 10 log10(peak^2 / MSE) in dB. Throws InvalidArgument on shape mismatch.
double psnr(const PlanarImage& a, const PlanarImage& b, double peak = 1.0);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, averaged over valid window positions and then channels.
/// Throws InvalidInput if either dimension is below 11.
double ssim(const PlanarImage& a, const PlanarImage& b, double peak = 1.0);

QualityScore evaluate(const PlanarImage& reference, const PlanarImage& test, double peak = 1.0);

}  // namespace obscura
