#include "obscura/metrics.hpp"

#include <array>
#include <cmath>

#include "obscura/error.hpp"

namespace obscura {
namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kWindow; ++i) {
    const double d = static_cast<double>(i) - static_cast<double>(kWindow / 2);
    taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable Gaussian filter over valid positions only.
Plane filter_valid(const Plane& in, const std::array<double, kWindow>& taps) {
  const std::size_t oh = in.height() - kWindow + 1;
  const std::size_t ow = in.width() - kWindow + 1;
  Plane rows(in.height(), ow);
  for (std::size_t r = 0; r < in.height(); ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) s += taps[k] * in(r, c + k);
      rows(r, c) = s;
    }
  }
  Plane out(oh, ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) s += taps[k] * rows(r + k, c);
      out(r, c) = s;
    }
  }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.height(), a.width());
  auto o = out.values();
  const auto x = a.values();
  const auto y = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  return out;
}

double ssim_plane(const Plane& a, const Plane& b, double c1, double c2) {
  static const auto taps = gaussian_taps();
  const Plane mu_a = filter_valid(a, taps);
  const Plane mu_b = filter_valid(b, taps);
  const Plane aa = filter_valid(product(a, a), taps);
  const Plane bb = filter_valid(product(b, b), taps);
  const Plane ab = filter_valid(product(a, b), taps);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a.values()[i];
    const double mb = mu_b.values()[i];
    const double va = aa.values()[i] - ma * ma;
    const double vb = bb.values()[i] - mb * mb;
    const double cov = ab.values()[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace

double psnr(const PlanarImage& a, const PlanarImage& b, double peak) {
  if (!a.same_shape(b)) throw InvalidArgument("psnr: images differ in shape");
  if (a.sample_count() == 0) throw InvalidArgument("psnr: empty images");
  double sum = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    const auto x = a.channel(c).values();
    const auto y = b.channel(c).values();
    for (std::size_t i = 0; i < x.size(); ++i) sum += (x[i] - y[i]) * (x[i] - y[i]);
  }
  const double mse = sum / static_cast<double>(a.sample_count());
  if (mse == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const PlanarImage& a, const PlanarImage& b, double peak) {
  if (!a.same_shape(b)) throw InvalidArgument("ssim: images differ in shape");
  if (a.height() < kWindow || a.width() < kWindow) {
    throw InvalidInput("ssim: images must be at least 11x11, got " + std::to_string(a.height()) + "x" +
                       std::to_string(a.width()));
  }
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  double total = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c) total += ssim_plane(a.channel(c), b.channel(c), c1, c2);
  return total / static_cast<double>(a.channels());
}

QualityScore evaluate(const PlanarImage& reference, const PlanarImage& test, double peak) {
  return {psnr(reference, test, peak), ssim(reference, test, peak)};
}

}  // namespace obscura
