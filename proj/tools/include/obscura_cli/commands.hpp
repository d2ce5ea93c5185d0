#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "obscura/image.hpp"
#include "obscura/optics.hpp"
#include "obscura/restore.hpp"
#include "obscura_cli/config.hpp"

namespace obscura::cli {

inline constexpr const char* kReportSchema = "obscura-report/1";
inline constexpr const char* kSweepSchema = "obscura-sweep/1";

/// Airy PSF described by the config.
Psf config_psf(const RunConfig& cfg);

/// PSF from a file when given, otherwise from the config. A file PSF must
/// match the configured pixel pitch.
Psf load_or_build_psf(const RunConfig& cfg, const std::optional<std::filesystem::path>& psf_path);

/// Restoration method parameters for an observation; the Wiener NSR is
/// estimated from `noise` when the config leaves it unset.
RestoreMethod resolve_method(const RunConfig& cfg, const PlanarImage& observation, const NoiseParams& noise,
                             double exposure_scale);

/// Degrade a clean image as configured.
PlanarImage simulate(const RunConfig& cfg, const PlanarImage& clean, const Psf& psf);

/// Restore a capture as configured (tiling large inputs).
RestoreResult restore(const RunConfig& cfg, const PlanarImage& observation, const Psf& psf);

/// One JSON object on one line.
std::string report_to_json_line(const RestoreReport& report);

enum class SweepAxis { Iso, Exposure };

/// Noise parameters and exposure scale for one sweep point.
///
/// Exposure sweeps vary the exposure scale at the configured ISO. ISO sweeps
/// hold the scene light fixed: the photon count per sample stays at the
/// configured ISO's level while the gain changes, and read noise is split
/// into a pre-gain part (constant after brightness normalization) and a
/// post-gain part that shrinks as gain rises.
struct SweepPoint {
  NoiseParams noise;
  double exposure_scale;
};
SweepPoint sweep_point(const RunConfig& cfg, SweepAxis axis, double value);

struct SweepRow {
  double value;
  double psnr_db;
  double ssim;
  double reblur_mse;
};

/// Simulate and restore `clean` at each value. Captures are quantized to
/// 16-bit PNG before restoration, as a `simulate` run would store them. When
/// `out_dir` is set the degraded and restored images are written there.
std::vector<SweepRow> run_sweep(const RunConfig& cfg, const PlanarImage& clean, const Psf& psf, SweepAxis axis,
                                std::span<const double> values,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

std::string sweep_csv(std::span<const SweepRow> rows);

/// File name used for a sweep value's restored image.
std::string sweep_image_name(const char* kind, double value);

/// Entry point used by the executable; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace obscura::cli
