#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "obscura/image.hpp"

namespace obscura::fft {

/// Half-plane spectrum of a real 2D signal: `rows() x cols()` complex
/// coefficients with cols() = width/2 + 1.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t rows() const noexcept { return height_; }
  std::size_t cols() const noexcept { return width_ / 2 + 1; }

  std::complex<double>& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
  const std::complex<double>& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols() + c];
  }
  std::vector<std::complex<double>>& coefficients() noexcept { return data_; }
  const std::vector<std::complex<double>>& coefficients() const noexcept { return data_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::complex<double>> data_;
};

/// Unnormalized forward DFT.
Spectrum forward(const Plane& signal);
/// Inverse DFT, scaled by 1/(height*width) so that inverse(forward(x)) == x.
Plane inverse(const Spectrum& spectrum);

/// Signed frequency in cycles/sample of DFT bin `index` on an axis of `n` samples.
inline double bin_frequency(std::size_t index, std::size_t n) noexcept {
  const auto i = static_cast<double>(index);
  const auto len = static_cast<double>(n);
  return (2 * index <= n ? i : i - len) / len;
}

/// Transfer function of `kernel` on a `height x width` periodic canvas. The
/// kernel centre (odd dimensions) is placed at the origin, so the result has
/// no linear phase.
Spectrum transfer_function(const Plane& kernel, std::size_t height, std::size_t width);

/// Circular (periodic-boundary) convolution with an odd-sized centred kernel.
Plane circular_convolve(const Plane& image, const Plane& kernel);

/// Linear convolution with replicate-edge extension, same-size output.
Plane replicate_convolve(const Plane& image, const Plane& kernel);

/// Replicate-pads `image` by (pad_rows, pad_cols) on every side.
Plane replicate_pad(const Plane& image, std::size_t pad_rows, std::size_t pad_cols);

}  // namespace obscura::fft
