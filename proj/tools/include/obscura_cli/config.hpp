#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "obscura/optics.hpp"
#include "obscura/restore.hpp"
#include "obscura/sensor.hpp"

namespace obscura::cli {

/// Bad command line or configuration; maps to exit code 64.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Wiener, Admm };

struct DatasetSection {
  std::size_t patch_size = 256;
  std::size_t patches_per_image = 4;
  std::vector<int> iso_choices = {1600, 3200, 6400};
  std::vector<double> exposure_scales = {1.0, 0.5};
};

struct RunConfig {
  OpticalConfig optics{};
  /// 0 selects default_psf_size(optics).
  std::size_t psf_size = 0;

  NoiseParams noise{};
  double exposure_scale = 1.0;
  std::uint64_t seed = 0;
  double headroom = kDefaultHeadroom;

  Method method = Method::Admm;
  /// Unset means derive the NSR from the noise model.
  std::optional<double> wiener_nsr;
  AdmmParams admm{};
  PipelineOptions pipeline{};
  TileOptions tiles{};

  DatasetSection dataset{};

  /// Share of read noise (in variance) injected before the ISO gain; the
  /// rest is added after it. Only used by ISO sweeps.
  double read_noise_pre_gain_fraction = 0.5;

  std::size_t effective_psf_size() const;
};

/// Parses `[section]` / `key = value` text. Unknown keys, malformed values
/// and invariant violations raise UsageError naming the field path.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// Loads a config file; a missing file raises UsageError naming it.
RunConfig load_config(const std::filesystem::path& path);

/// Applies `section.key=value`.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Checks every field against the library invariants.
void validate(const RunConfig& cfg);

/// Fully annotated example configuration with the default values.
std::string example_config();

}  // namespace obscura::cli
