#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "obscura/image.hpp"
#include "obscura/optics.hpp"
#include "obscura/sensor.hpp"

namespace obscura {

struct WienerParams {
  /// Flat noise-to-signal power ratio.
  double nsr = 1e-3;
  void validate() const;
};

enum class TvMode { Anisotropic, Isotropic };

struct AdmmParams {
  double lambda_tv = 1e-3;
  double rho = 1.0;
  int max_iters = 100;
  /// Threshold on the relative primal and dual residuals.
  double tol = 1e-4;
  TvMode tv_mode = TvMode::Anisotropic;
  void validate() const;
};

struct RestoreReport {
  std::string method;
  int iterations_run = 0;
  double final_objective = 0.0;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  double reblur_mse = 0.0;
  bool converged = false;
};

struct RestoreResult {
  PlanarImage image;
  RestoreReport report;
};

/// Zeroes every DFT coefficient whose radial frequency exceeds `cutoff_cpp`
/// cycles/pixel. Valid cutoffs are (0, 0.5*sqrt(2)].
PlanarImage ideal_lowpass(const PlanarImage& image, double cutoff_cpp);

/// Frequency-domain Wiener filter, conj(H) Y / (|H|^2 + nsr), assuming
/// periodic boundaries. Throws IllConditioned when nsr == 0 and |H| < 1e-12
/// anywhere.
PlanarImage wiener_deconvolve(const PlanarImage& image, const Psf& psf, const WienerParams& params);

/// TV-regularized deconvolution, min_x 0.5||h*x - y||^2 + lambda TV(x), by
/// ADMM with the splitting z = Dx (periodic forward differences). Starts from
/// x = y. Throws Diverged if the objective exceeds 10x its initial value.
RestoreResult admm_tv_deconvolve(const PlanarImage& image, const Psf& psf, const AdmmParams& params);

/// 0.5 * ||h*x - y||^2 + lambda * TV(x) under periodic boundaries, summed
/// over channels.
double tv_objective(const PlanarImage& estimate, const PlanarImage& observation, const Psf& psf,
                    double lambda_tv, TvMode mode);

/// Mean squared difference between forward_capture(estimate, psf) and the
/// observation. Throws InvalidArgument on shape mismatch.
double reblur_residual(const PlanarImage& estimate, const PlanarImage& observation, const Psf& psf);

/// Flat Wiener NSR derived from the noise model: predicted noise variance at
/// the image mean over the mean signal power.
double estimate_wiener_nsr(const PlanarImage& observation, const NoiseParams& params,
                           double exposure_scale);

using RestoreMethod = std::variant<WienerParams, AdmmParams>;

struct PipelineOptions {
  bool lowpass = true;
  /// Minimum edge padding. The image is replicate-padded by
  /// max(PSF radius, taper_width) and the padding is cosine-tapered to the
  /// image mean, which keeps periodic solvers from wrapping edges together.
  std::size_t taper_width = 16;
};

struct Padding {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;
};

/// Replicate-pads and blends the padding towards the per-channel mean with
/// a raised-cosine ramp over its outer `taper` samples, so the result is
/// close to periodic.
PlanarImage pad_with_taper(const PlanarImage& image, const Padding& pad, std::size_t taper);
PlanarImage pad_with_taper(const PlanarImage& image, std::size_t pad, std::size_t taper);

/// Optics-aware restoration: edge padding, ideal low-pass at the diffraction
/// cutoff (clamped to the largest valid value), then the chosen
/// deconvolver. The report carries the reblur MSE against the input.
RestoreResult restore_pipeline(const PlanarImage& image, const Psf& psf, const OpticalConfig& cfg,
                               const RestoreMethod& method, const PipelineOptions& options = {});

struct TileOptions {
  std::size_t tile_size = 1024;
  std::size_t overlap = 64;
  /// Images with more pixels than this are processed in tiles.
  std::size_t area_threshold = 2048 * 2048;
  /// Worker threads; 0 picks hardware concurrency. Results do not depend on it.
  std::size_t workers = 0;
};

/// restore_pipeline over overlapping tiles with raised-cosine blending. Each
/// tile is restored with a margin of real neighbouring pixels as context.
RestoreResult restore_tiled(const PlanarImage& image, const Psf& psf, const OpticalConfig& cfg,
                            const RestoreMethod& method, const PipelineOptions& options,
                            const TileOptions& tiles);

/// Dispatches to restore_tiled when the image area exceeds the threshold.
RestoreResult restore_auto(const PlanarImage& image, const Psf& psf, const OpticalConfig& cfg,
                           const RestoreMethod& method, const PipelineOptions& options = {},
                           const TileOptions& tiles = {});

}  // namespace obscura
