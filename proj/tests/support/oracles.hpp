#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "obscura/image.hpp"

namespace obscura::testkit {

/// Direct spatial "same" convolution with replicate edges.
inline Plane brute_force_convolve(const Plane& img, const Plane& k) {
  const auto h = static_cast<long>(img.height());
  const auto w = static_cast<long>(img.width());
  const auto kr = static_cast<long>(k.height() / 2);
  const auto kc = static_cast<long>(k.width() / 2);
  Plane out(img.height(), img.width());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      long double acc = 0;
      for (long i = -kr; i <= kr; ++i) {
        for (long j = -kc; j <= kc; ++j) {
          const long rr = std::clamp(r - i, 0L, h - 1);
          const long cc = std::clamp(c - j, 0L, w - 1);
          acc += static_cast<long double>(k(i + kr, j + kc)) * img(rr, cc);
        }
      }
      out(r, c) = static_cast<double>(acc);
    }
  }
  return out;
}

/// Direct circular convolution with a centred kernel.
inline Plane brute_force_circular(const Plane& img, const Plane& k) {
  const auto h = static_cast<long>(img.height());
  const auto w = static_cast<long>(img.width());
  const auto kr = static_cast<long>(k.height() / 2);
  const auto kc = static_cast<long>(k.width() / 2);
  Plane out(img.height(), img.width());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      long double acc = 0;
      for (long i = -kr; i <= kr; ++i) {
        for (long j = -kc; j <= kc; ++j) {
          acc += static_cast<long double>(k(i + kr, j + kc)) * img(((r - i) % h + h) % h, ((c - j) % w + w) % w);
        }
      }
      out(r, c) = static_cast<double>(acc);
    }
  }
  return out;
}

/// J1 by its power series in long double.
inline long double series_j1(long double x, int terms = 50) {
  long double term = x / 2;
  long double sum = term;
  const long double q = -(x * x) / 4;
  for (int k = 1; k < terms; ++k) {
    term *= q / (static_cast<long double>(k) * (k + 1));
    sum += term;
  }
  return sum;
}

inline Plane random_plane(std::size_t h, std::size_t w, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Plane p(h, w);
  for (auto& v : p.values()) v = dist(rng);
  return p;
}

inline PlanarImage random_image(std::size_t channels, std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Plane> planes;
  for (std::size_t c = 0; c < channels; ++c) planes.push_back(random_plane(h, w, rng));
  return PlanarImage(std::move(planes));
}

inline Plane gaussian_kernel(std::size_t size, double sigma) {
  Plane k(size, size);
  const double c = static_cast<double>(size / 2);
  double sum = 0;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t col = 0; col < size; ++col) {
      const double d2 = (r - c) * (r - c) + (col - c) * (col - c);
      sum += k(r, col) = std::exp(-d2 / (2 * sigma * sigma));
    }
  }
  for (auto& v : k.values()) v /= sum;
  return k;
}

/// Piecewise-constant test scene with soft texture.
inline PlanarImage blocks_scene(std::size_t h, std::size_t w, std::size_t cell = 16) {
  Plane p(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      p(r, c) = ((r / cell + c / cell) % 3) * 0.3 + 0.1 + 0.05 * std::sin(0.11 * r + 0.07 * c);
    }
  }
  return PlanarImage(std::vector<Plane>{p});
}

inline double mse(const PlanarImage& a, const PlanarImage& b) {
  long double acc = 0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    const auto x = a.channel(c).values();
    const auto y = b.channel(c).values();
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
  }
  return static_cast<double>(acc / a.sample_count());
}

inline double max_abs_diff(const Plane& a, const Plane& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

/// Single-channel reference SSIM with a full 2D Gaussian window.
inline double reference_ssim(const Plane& a, const Plane& b, double peak = 1.0) {
  constexpr int kWin = 11;
  double g[kWin][kWin];
  double gs = 0;
  for (int i = 0; i < kWin; ++i) {
    for (int j = 0; j < kWin; ++j) {
      gs += g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
    }
  }
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  double total = 0;
  std::size_t n = 0;
  for (std::size_t r = 0; r + kWin <= a.height(); ++r) {
    for (std::size_t c = 0; c + kWin <= a.width(); ++c) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
          const double wgt = g[i][j] / gs;
          const double x = a(r + i, c + j);
          const double y = b(r + i, c + j);
          ma += wgt * x;
          mb += wgt * y;
          saa += wgt * x * x;
          sbb += wgt * y * y;
          sab += wgt * x * y;
        }
      }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++n;
    }
  }
  return total / n;
}

}  // namespace obscura::testkit
