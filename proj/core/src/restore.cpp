#include "obscura/restore.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "obscura/error.hpp"
#include "obscura/fft.hpp"

namespace obscura {
namespace {

using cdouble = std::complex<double>;

constexpr double kMaxRadialCutoff = 0.5 * std::numbers::sqrt2;

// Forward differences with periodic wrap: (D_x x)(r,c) = x(r,c+1) - x(r,c).
struct Gradient {
  Plane dx;
  Plane dy;
};

Gradient gradient(const Plane& x) {
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  Gradient g{Plane(h, w), Plane(h, w)};
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t rn = r + 1 == h ? 0 : r + 1;
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t cn = c + 1 == w ? 0 : c + 1;
      g.dx(r, c) = x(r, cn) - x(r, c);
      g.dy(r, c) = x(rn, c) - x(r, c);
    }
  }
  return g;
}

// Adjoint of gradient(): (D^T p)(r,c) = px(r,c-1) - px(r,c) + py(r-1,c) - py(r,c).
Plane divergence_adjoint(const Plane& px, const Plane& py) {
  const std::size_t h = px.height();
  const std::size_t w = px.width();
  Plane out(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t rp = r == 0 ? h - 1 : r - 1;
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t cp = c == 0 ? w - 1 : c - 1;
      out(r, c) = px(r, cp) - px(r, c) + py(rp, c) - py(r, c);
    }
  }
  return out;
}

double total_variation(const Plane& x, TvMode mode) {
  const auto g = gradient(x);
  double tv = 0.0;
  const auto gx = g.dx.values();
  const auto gy = g.dy.values();
  for (std::size_t i = 0; i < gx.size(); ++i) {
    tv += mode == TvMode::Anisotropic ? std::abs(gx[i]) + std::abs(gy[i]) : std::hypot(gx[i], gy[i]);
  }
  return tv;
}

double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double data_term(const Plane& x, const Plane& y, const fft::Spectrum& h) {
  auto spec = fft::forward(x);
  auto& coeffs = spec.coefficients();
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= h.coefficients()[i];
  const Plane hx = fft::inverse(spec);
  double s = 0.0;
  const auto a = hx.values();
  const auto b = y.values();
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return 0.5 * s;
}

void check_kernel_fits(const PlanarImage& image, const Psf& psf) {
  if (psf.height() > image.height() || psf.width() > image.width()) {
    throw InvalidArgument("PSF kernel is larger than the image");
  }
}

// FFT sizes whose prime factors are all <= 7.
std::size_t next_smooth_size(std::size_t n) {
  for (;; ++n) {
    std::size_t m = n;
    for (std::size_t p : {2u, 3u, 5u, 7u}) {
      while (m % p == 0) m /= p;
    }
    if (m == 1) return n;
  }
}

}  // namespace

void WienerParams::validate() const {
  if (!(nsr >= 0.0) || std::isnan(nsr)) throw InvalidArgument("wiener: nsr must be >= 0");
}

void AdmmParams::validate() const {
  if (!(lambda_tv > 0.0)) throw InvalidArgument("admm: lambda_tv must be > 0");
  if (!(rho > 0.0)) throw InvalidArgument("admm: rho must be > 0");
  if (max_iters < 1) throw InvalidArgument("admm: max_iters must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("admm: tol must be > 0");
}

PlanarImage ideal_lowpass(const PlanarImage& image, double cutoff_cpp) {
  if (!(cutoff_cpp > 0.0) || cutoff_cpp > kMaxRadialCutoff + 1e-12) {
    throw InvalidArgument("low-pass cutoff must lie in (0, 0.5*sqrt(2)] cycles/pixel, got " +
                          std::to_string(cutoff_cpp));
  }
  std::vector<Plane> out;
  out.reserve(image.channels());
  for (const auto& plane : image.planes()) {
    auto spec = fft::forward(plane);
    for (std::size_t r = 0; r < spec.rows(); ++r) {
      const double u = fft::bin_frequency(r, spec.height());
      for (std::size_t c = 0; c < spec.cols(); ++c) {
        const double v = static_cast<double>(c) / static_cast<double>(spec.width());
        if (std::hypot(u, v) > cutoff_cpp) spec(r, c) = 0.0;
      }
    }
    out.push_back(fft::inverse(spec));
  }
  return PlanarImage(std::move(out));
}

PlanarImage wiener_deconvolve(const PlanarImage& image, const Psf& psf, const WienerParams& params) {
  params.validate();
  image.require_finite();
  check_kernel_fits(image, psf);
  const auto h = fft::transfer_function(psf.kernel(), image.height(), image.width());
  if (params.nsr == 0.0) {
    for (const auto& v : h.coefficients()) {
      if (std::abs(v) < 1e-12) {
        throw IllConditioned("PSF transfer function has |H| < 1e-12; use nsr > 0");
      }
    }
  }
  std::vector<Plane> out;
  out.reserve(image.channels());
  for (const auto& plane : image.planes()) {
    auto spec = fft::forward(plane);
    auto& coeffs = spec.coefficients();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      const cdouble hv = h.coefficients()[i];
      coeffs[i] = std::conj(hv) * coeffs[i] / (std::norm(hv) + params.nsr);
    }
    out.push_back(fft::inverse(spec));
  }
  return PlanarImage(std::move(out));
}

double tv_objective(const PlanarImage& estimate, const PlanarImage& observation, const Psf& psf,
                    double lambda_tv, TvMode mode) {
  if (!estimate.same_shape(observation)) throw InvalidArgument("objective: shape mismatch");
  check_kernel_fits(estimate, psf);
  const auto h = fft::transfer_function(psf.kernel(), estimate.height(), estimate.width());
  double total = 0.0;
  for (std::size_t c = 0; c < estimate.channels(); ++c) {
    total += data_term(estimate.channel(c), observation.channel(c), h);
    if (lambda_tv != 0.0) total += lambda_tv * total_variation(estimate.channel(c), mode);
  }
  return total;
}

RestoreResult admm_tv_deconvolve(const PlanarImage& image, const Psf& psf, const AdmmParams& params) {
  params.validate();
  image.require_finite();
  check_kernel_fits(image, psf);

  const std::size_t hgt = image.height();
  const std::size_t wid = image.width();
  const std::size_t channels = image.channels();
  const double rho = params.rho;
  const double threshold = params.lambda_tv / rho;

  const auto h = fft::transfer_function(psf.kernel(), hgt, wid);
  const std::size_t ncoef = h.coefficients().size();
  // |H|^2 + rho (|D_x|^2 + |D_y|^2), with |D|^2 = 2 - 2 cos(2 pi f).
  std::vector<double> denom(ncoef);
  for (std::size_t r = 0; r < h.rows(); ++r) {
    const double u = fft::bin_frequency(r, hgt);
    for (std::size_t c = 0; c < h.cols(); ++c) {
      const double v = static_cast<double>(c) / static_cast<double>(wid);
      const double dd = 4.0 - 2.0 * std::cos(2.0 * std::numbers::pi * u) - 2.0 * std::cos(2.0 * std::numbers::pi * v);
      denom[r * h.cols() + c] = std::norm(h(r, c)) + rho * dd;
    }
  }

  struct ChannelState {
    Plane x;
    Gradient z;
    Gradient u;
    std::vector<cdouble> hty;  // conj(H) Y
  };
  std::vector<ChannelState> state(channels);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    auto& s = state[ch];
    s.x = image.channel(ch);
    s.z = gradient(s.x);
    s.u = {Plane(hgt, wid), Plane(hgt, wid)};
    const auto y = fft::forward(image.channel(ch));
    s.hty.resize(ncoef);
    for (std::size_t i = 0; i < ncoef; ++i) s.hty[i] = std::conj(h.coefficients()[i]) * y.coefficients()[i];
  }

  auto objective = [&] {
    double total = 0.0;
    for (std::size_t ch = 0; ch < channels; ++ch) {
      total += data_term(state[ch].x, image.channel(ch), h) +
               params.lambda_tv * total_variation(state[ch].x, params.tv_mode);
    }
    return total;
  };

  const double initial_objective = objective();
  RestoreReport report;
  report.method = "admm";

  for (int iter = 0; iter < params.max_iters; ++iter) {
    double primal_sq = 0.0, dual_sq = 0.0, dx_sq = 0.0, z_sq = 0.0, u_sq = 0.0;
    for (auto& s : state) {
      // x-update: (H^T H + rho D^T D) x = H^T y + rho D^T (z - u).
      Plane vx(hgt, wid), vy(hgt, wid);
      {
        auto ox = vx.values(), oy = vy.values();
        const auto zx = s.z.dx.values(), zy = s.z.dy.values();
        const auto ux = s.u.dx.values(), uy = s.u.dy.values();
        for (std::size_t i = 0; i < ox.size(); ++i) {
          ox[i] = zx[i] - ux[i];
          oy[i] = zy[i] - uy[i];
        }
      }
      auto rhs = fft::forward(divergence_adjoint(vx, vy));
      auto& coeffs = rhs.coefficients();
      for (std::size_t i = 0; i < ncoef; ++i) coeffs[i] = (s.hty[i] + rho * coeffs[i]) / denom[i];
      s.x = fft::inverse(rhs);

      // z-update: shrink D x + u; u-update: u += D x - z.
      const auto dx = gradient(s.x);
      Gradient z_prev = s.z;
      auto gx = dx.dx.values(), gy = dx.dy.values();
      auto zx = s.z.dx.values(), zy = s.z.dy.values();
      auto ux = s.u.dx.values(), uy = s.u.dy.values();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const double ax = gx[i] + ux[i];
        const double ay = gy[i] + uy[i];
        if (params.tv_mode == TvMode::Anisotropic) {
          zx[i] = std::copysign(std::max(std::abs(ax) - threshold, 0.0), ax);
          zy[i] = std::copysign(std::max(std::abs(ay) - threshold, 0.0), ay);
        } else {
          const double norm = std::hypot(ax, ay);
          const double scale = norm > threshold ? 1.0 - threshold / norm : 0.0;
          zx[i] = scale * ax;
          zy[i] = scale * ay;
        }
        const double rx = gx[i] - zx[i];
        const double ry = gy[i] - zy[i];
        ux[i] += rx;
        uy[i] += ry;
        primal_sq += rx * rx + ry * ry;
        dx_sq += gx[i] * gx[i] + gy[i] * gy[i];
        z_sq += zx[i] * zx[i] + zy[i] * zy[i];
      }
      Plane dzx(hgt, wid), dzy(hgt, wid);
      {
        auto ox = dzx.values(), oy = dzy.values();
        const auto px = z_prev.dx.values(), py = z_prev.dy.values();
        for (std::size_t i = 0; i < ox.size(); ++i) {
          ox[i] = zx[i] - px[i];
          oy[i] = zy[i] - py[i];
        }
      }
      dual_sq += rho * rho * sum_squares(divergence_adjoint(dzx, dzy).values());
      u_sq += rho * rho * sum_squares(divergence_adjoint(s.u.dx, s.u.dy).values());
    }

    constexpr double tiny = 1e-300;
    const double primal_rel = std::sqrt(primal_sq) / std::max({std::sqrt(dx_sq), std::sqrt(z_sq), tiny});
    const double dual_rel = std::sqrt(dual_sq) / std::max(std::sqrt(u_sq), tiny);
    report.primal_residuals.push_back(primal_rel);
    report.dual_residuals.push_back(dual_rel);
    report.iterations_run = iter + 1;

    const double obj = objective();
    report.final_objective = obj;
    if (!std::isfinite(obj) || obj > 10.0 * initial_objective) {
      throw Diverged("ADMM diverged at iteration " + std::to_string(iter + 1) + ": objective " +
                     std::to_string(obj) + " exceeds 10x the initial " + std::to_string(initial_objective) +
                     " (try a larger rho)");
    }
    if (primal_rel < params.tol && dual_rel < params.tol) {
      report.converged = true;
      break;
    }
  }

  std::vector<Plane> planes;
  planes.reserve(channels);
  for (auto& s : state) planes.push_back(std::move(s.x));
  RestoreResult result{PlanarImage(std::move(planes)), std::move(report)};
  result.report.reblur_mse = reblur_residual(result.image, image, psf);
  return result;
}

double reblur_residual(const PlanarImage& estimate, const PlanarImage& observation, const Psf& psf) {
  if (!estimate.same_shape(observation)) {
    throw InvalidArgument("reblur residual: estimate and observation differ in shape");
  }
  const PlanarImage reblurred = forward_capture(estimate, psf);
  double sum = 0.0;
  for (std::size_t c = 0; c < estimate.channels(); ++c) {
    const auto a = reblurred.channel(c).values();
    const auto b = observation.channel(c).values();
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return sum / static_cast<double>(estimate.sample_count());
}

double estimate_wiener_nsr(const PlanarImage& observation, const NoiseParams& params, double exposure_scale) {
  params.validate();
  const double mean = observation.mean();
  double power = 0.0;
  for (const auto& p : observation.planes()) power += sum_squares(p.values());
  power /= static_cast<double>(std::max<std::size_t>(observation.sample_count(), 1));
  const double noise = params.predicted_variance(std::max(mean, 0.0), exposure_scale);
  return noise / std::max(power, 1e-12);
}

PlanarImage pad_with_taper(const PlanarImage& image, std::size_t pad, std::size_t taper) {
  return pad_with_taper(image, {pad, pad, pad, pad}, taper);
}

PlanarImage pad_with_taper(const PlanarImage& image, const Padding& pad, std::size_t taper) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const std::size_t oh = h + pad.top + pad.bottom;
  const std::size_t ow = w + pad.left + pad.right;
  // Weight 1 inside the image, raised-cosine ramp to 0 across the outer
  // `taper` samples of each padding band.
  auto ramp = [taper](std::size_t depth, std::size_t band) {
    const std::size_t t = std::min(taper, band);
    if (depth + t <= band) return 1.0;
    const double pos = static_cast<double>(band - depth) + 0.5;  // samples from the outer edge
    return 0.5 - 0.5 * std::cos(std::numbers::pi * pos / static_cast<double>(t + 1));
  };
  std::vector<double> wr(oh), wc(ow);
  for (std::size_t r = 0; r < oh; ++r) {
    if (r < pad.top) wr[r] = ramp(pad.top - r, pad.top);
    else if (r >= pad.top + h) wr[r] = ramp(r - pad.top - h + 1, pad.bottom);
    else wr[r] = 1.0;
  }
  for (std::size_t c = 0; c < ow; ++c) {
    if (c < pad.left) wc[c] = ramp(pad.left - c, pad.left);
    else if (c >= pad.left + w) wc[c] = ramp(c - pad.left - w + 1, pad.right);
    else wc[c] = 1.0;
  }

  std::vector<Plane> planes;
  planes.reserve(image.channels());
  for (const auto& src : image.planes()) {
    const double mean = src.sum() / static_cast<double>(src.size());
    Plane out(oh, ow);
    for (std::size_t r = 0; r < oh; ++r) {
      const std::size_t sr = std::min(h - 1, r < pad.top ? 0 : r - pad.top);
      for (std::size_t c = 0; c < ow; ++c) {
        const std::size_t sc = std::min(w - 1, c < pad.left ? 0 : c - pad.left);
        const double weight = wr[r] * wc[c];
        out(r, c) = weight == 1.0 ? src(sr, sc) : mean + weight * (src(sr, sc) - mean);
      }
    }
    planes.push_back(std::move(out));
  }
  return PlanarImage(std::move(planes));
}

RestoreResult restore_pipeline(const PlanarImage& image, const Psf& psf, const OpticalConfig& cfg,
                               const RestoreMethod& method, const PipelineOptions& options) {
  cfg.validate();
  image.require_finite();
  if (std::abs(psf.pitch() - cfg.pixel_pitch) > 1e-6 * cfg.pixel_pitch) {
    throw InvalidArgument("PSF pitch " + std::to_string(psf.pitch()) + " m does not match pixel pitch " +
                          std::to_string(cfg.pixel_pitch) + " m");
  }
  const std::size_t base_r = std::max(psf.radius_rows(), options.taper_width);
  const std::size_t base_c = std::max(psf.radius_cols(), options.taper_width);
  Padding pad{base_r, base_r, base_c, base_c};
  pad.bottom += next_smooth_size(image.height() + 2 * base_r) - (image.height() + 2 * base_r);
  pad.right += next_smooth_size(image.width() + 2 * base_c) - (image.width() + 2 * base_c);
  const std::size_t taper = std::max({base_r, base_c});

  PlanarImage work = pad_with_taper(image, pad, taper);
  if (options.lowpass) {
    work = ideal_lowpass(work, std::min(diffraction_cutoff_cpp(cfg), kMaxRadialCutoff));
  }

  RestoreResult result;
  if (const auto* wiener = std::get_if<WienerParams>(&method)) {
    PlanarImage restored = wiener_deconvolve(work, psf, *wiener);
    result.report.method = "wiener";
    result.report.final_objective = tv_objective(restored, work, psf, 0.0, TvMode::Anisotropic);
    result.report.converged = true;
    result.image = std::move(restored);
  } else {
    result = admm_tv_deconvolve(work, psf, std::get<AdmmParams>(method));
  }
  result.image = result.image.crop(pad.top, pad.left, image.height(), image.width());
  result.report.reblur_mse = reblur_residual(result.image, image, psf);
  return result;
}

}  // namespace obscura
