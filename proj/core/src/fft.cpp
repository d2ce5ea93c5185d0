#include "obscura/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "obscura/error.hpp"

namespace obscura::fft {
namespace {

template <typename T>
struct FftwFree {
  void operator()(T* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T, FftwFree<T>>;

template <typename T>
FftwBuffer<T> allocate(std::size_t count) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1)));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW's planner is not thread-safe; plan execution on fresh arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [shape, plans] : plans_) {
      fftw_destroy_plan(plans.forward);
      fftw_destroy_plan(plans.inverse);
    }
  }

  PlanPair get(std::size_t h, std::size_t w) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({h, w});
    if (it != plans_.end()) return it->second;
    auto real = allocate<double>(h * w);
    auto cplx = allocate<fftw_complex>(h * (w / 2 + 1));
    const int hi = static_cast<int>(h);
    const int wi = static_cast<int>(w);
    PlanPair plans;
    plans.forward = fftw_plan_dft_r2c_2d(hi, wi, real.get(), cplx.get(), FFTW_ESTIMATE);
    plans.inverse = fftw_plan_dft_c2r_2d(hi, wi, cplx.get(), real.get(), FFTW_ESTIMATE);
    if (plans.forward == nullptr || plans.inverse == nullptr) {
      throw Error("FFTW failed to create a plan");
    }
    plans_.emplace(std::make_pair(h, w), plans);
    return plans;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, std::size_t>, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

}  // namespace

Spectrum::Spectrum(std::size_t height, std::size_t width)
    : height_(height), width_(width), data_(height * (width / 2 + 1)) {}

Spectrum forward(const Plane& signal) {
  const std::size_t h = signal.height();
  const std::size_t w = signal.width();
  if (h == 0 || w == 0) throw InvalidArgument("cannot transform an empty plane");
  const auto plans = plan_cache().get(h, w);
  auto real = allocate<double>(h * w);
  std::memcpy(real.get(), signal.values().data(), sizeof(double) * h * w);
  Spectrum out(h, w);
  auto cplx = allocate<fftw_complex>(out.coefficients().size());
  fftw_execute_dft_r2c(plans.forward, real.get(), cplx.get());
  std::memcpy(out.coefficients().data(), cplx.get(), sizeof(fftw_complex) * out.coefficients().size());
  return out;
}

Plane inverse(const Spectrum& spectrum) {
  const std::size_t h = spectrum.height();
  const std::size_t w = spectrum.width();
  const auto plans = plan_cache().get(h, w);
  auto cplx = allocate<fftw_complex>(spectrum.coefficients().size());
  std::memcpy(cplx.get(), spectrum.coefficients().data(),
              sizeof(fftw_complex) * spectrum.coefficients().size());
  auto real = allocate<double>(h * w);
  fftw_execute_dft_c2r(plans.inverse, cplx.get(), real.get());
  Plane out(h, w);
  const double scale = 1.0 / static_cast<double>(h * w);
  auto values = out.values();
  for (std::size_t i = 0; i < h * w; ++i) values[i] = real.get()[i] * scale;
  return out;
}

Spectrum transfer_function(const Plane& kernel, std::size_t height, std::size_t width) {
  if (kernel.height() % 2 == 0 || kernel.width() % 2 == 0) {
    throw InvalidArgument("kernel dimensions must be odd");
  }
  if (kernel.height() > height || kernel.width() > width) {
    throw InvalidArgument("kernel larger than transform canvas");
  }
  const auto cr = static_cast<std::ptrdiff_t>(kernel.height() / 2);
  const auto cc = static_cast<std::ptrdiff_t>(kernel.width() / 2);
  Plane canvas(height, width);
  for (std::size_t r = 0; r < kernel.height(); ++r) {
    for (std::size_t c = 0; c < kernel.width(); ++c) {
      canvas(wrap(static_cast<std::ptrdiff_t>(r) - cr, height),
             wrap(static_cast<std::ptrdiff_t>(c) - cc, width)) += kernel(r, c);
    }
  }
  return forward(canvas);
}

Plane circular_convolve(const Plane& image, const Plane& kernel) {
  auto spectrum = forward(image);
  const auto h = transfer_function(kernel, image.height(), image.width());
  auto& coeffs = spectrum.coefficients();
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= h.coefficients()[i];
  return inverse(spectrum);
}

Plane replicate_pad(const Plane& image, std::size_t pad_rows, std::size_t pad_cols) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  Plane out(h + 2 * pad_rows, w + 2 * pad_cols);
  for (std::size_t r = 0; r < out.height(); ++r) {
    const std::size_t sr = std::min(h - 1, r < pad_rows ? 0 : r - pad_rows);
    for (std::size_t c = 0; c < out.width(); ++c) {
      const std::size_t sc = std::min(w - 1, c < pad_cols ? 0 : c - pad_cols);
      out(r, c) = image(sr, sc);
    }
  }
  return out;
}

Plane replicate_convolve(const Plane& image, const Plane& kernel) {
  if (kernel.height() > image.height() || kernel.width() > image.width()) {
    throw InvalidArgument("kernel (" + std::to_string(kernel.height()) + "x" +
                          std::to_string(kernel.width()) + ") larger than image (" +
                          std::to_string(image.height()) + "x" + std::to_string(image.width()) + ")");
  }
  const std::size_t pr = kernel.height() / 2;
  const std::size_t pc = kernel.width() / 2;
  const Plane padded = replicate_pad(image, pr, pc);
  return circular_convolve(padded, kernel).crop(pr, pc, image.height(), image.width());
}

}  // namespace obscura::fft
