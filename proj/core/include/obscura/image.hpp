#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace obscura {

/// Dense row-major 2D grid of doubles.
class Plane {
 public:
  Plane() = default;
  Plane(std::size_t height, std::size_t width, double fill = 0.0);
  /// Builds a plane from nested rows; all rows must have the same length.
  Plane(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * width_ + col]; }
  double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * width_ + col]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double sum() const noexcept;
  double max() const noexcept;
  double min() const noexcept;

  /// Copy of the rectangle [row, row+height) x [col, col+width).
  Plane crop(std::size_t row, std::size_t col, std::size_t height, std::size_t width) const;

  bool operator==(const Plane&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Multi-channel (1 or 3) floating-point image in linear light. Nominal
/// range is [0, 1]; values above 1 are allowed until something clips them.
class PlanarImage {
 public:
  PlanarImage() = default;
  PlanarImage(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
  /// Throws InvalidInput on channel-count or dimension mismatch.
  explicit PlanarImage(std::vector<Plane> planes);

  std::size_t channels() const noexcept { return planes_.size(); }
  std::size_t height() const noexcept { return planes_.empty() ? 0 : planes_.front().height(); }
  std::size_t width() const noexcept { return planes_.empty() ? 0 : planes_.front().width(); }
  std::size_t sample_count() const noexcept { return channels() * height() * width(); }

  Plane& channel(std::size_t c) { return planes_.at(c); }
  const Plane& channel(std::size_t c) const { return planes_.at(c); }
  std::span<Plane> planes() noexcept { return planes_; }
  std::span<const Plane> planes() const noexcept { return planes_; }

  double& at(std::size_t c, std::size_t row, std::size_t col) { return planes_[c](row, col); }
  double at(std::size_t c, std::size_t row, std::size_t col) const { return planes_[c](row, col); }

  bool same_shape(const PlanarImage& other) const noexcept;
  /// Throws InvalidInput if any sample is NaN or infinite.
  void require_finite() const;

  double mean() const noexcept;
  PlanarImage crop(std::size_t row, std::size_t col, std::size_t height, std::size_t width) const;
  /// Clamps every sample to [lo, hi].
  PlanarImage clipped(double lo, double hi) const;

  bool operator==(const PlanarImage&) const = default;

 private:
  std::vector<Plane> planes_;
};

}  // namespace obscura
