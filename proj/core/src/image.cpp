#include "obscura/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "obscura/error.hpp"

namespace obscura {

Plane::Plane(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width, fill) {}

Plane::Plane(std::initializer_list<std::initializer_list<double>> rows) {
  height_ = rows.size();
  width_ = height_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(height_ * width_);
  for (const auto& row : rows) {
    if (row.size() != width_) throw InvalidInput("ragged rows in plane initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

double Plane::sum() const noexcept { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Plane::max() const noexcept {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

double Plane::min() const noexcept {
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

Plane Plane::crop(std::size_t row, std::size_t col, std::size_t height, std::size_t width) const {
  if (row + height > height_ || col + width > width_) {
    throw InvalidArgument("crop rectangle exceeds plane bounds");
  }
  Plane out(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    const double* src = data_.data() + (row + r) * width_ + col;
    std::copy(src, src + width, out.data_.data() + r * width);
  }
  return out;
}

PlanarImage::PlanarImage(std::size_t channels, std::size_t height, std::size_t width, double fill) {
  if (channels != 1 && channels != 3) throw InvalidInput("image must have 1 or 3 channels");
  planes_.assign(channels, Plane(height, width, fill));
}

PlanarImage::PlanarImage(std::vector<Plane> planes) : planes_(std::move(planes)) {
  if (planes_.size() != 1 && planes_.size() != 3) {
    throw InvalidInput("image must have 1 or 3 channels, got " + std::to_string(planes_.size()));
  }
  for (const auto& p : planes_) {
    if (p.height() != planes_.front().height() || p.width() != planes_.front().width()) {
      throw InvalidInput("image channels differ in size");
    }
  }
}

bool PlanarImage::same_shape(const PlanarImage& other) const noexcept {
  return channels() == other.channels() && height() == other.height() && width() == other.width();
}

void PlanarImage::require_finite() const {
  for (const auto& p : planes_) {
    for (double v : p.values()) {
      if (!std::isfinite(v)) throw InvalidInput("image contains NaN or infinite samples");
    }
  }
}

double PlanarImage::mean() const noexcept {
  if (sample_count() == 0) return 0.0;
  double total = 0.0;
  for (const auto& p : planes_) total += p.sum();
  return total / static_cast<double>(sample_count());
}

PlanarImage PlanarImage::crop(std::size_t row, std::size_t col, std::size_t height,
                              std::size_t width) const {
  std::vector<Plane> out;
  out.reserve(planes_.size());
  for (const auto& p : planes_) out.push_back(p.crop(row, col, height, width));
  return PlanarImage(std::move(out));
}

PlanarImage PlanarImage::clipped(double lo, double hi) const {
  PlanarImage out = *this;
  for (auto& p : out.planes_) {
    for (double& v : p.values()) v = std::clamp(v, lo, hi);
  }
  return out;
}

}  // namespace obscura
