#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "obscura/optics.hpp"
#include "obscura/sensor.hpp"

namespace obscura {

inline constexpr const char* kGeneratorVersion = "obscura-dataset/1";

struct DatasetSpec {
  std::filesystem::path source_dir;
  std::filesystem::path output_dir;
  Psf psf = Psf::delta(4e-6);
  std::vector<int> iso_choices = {3200};
  std::vector<double> exposure_scales = {1.0};
  std::size_t patch_size = 256;
  std::size_t patches_per_image = 4;
  std::uint64_t seed = 0;
  /// Supplies full-well, base ISO and read noise; `iso` is overridden per image.
  NoiseParams noise{};
  double headroom = kDefaultHeadroom;

  void validate() const;
};

struct PatchPair {
  std::string clean;
  std::string degraded;
  std::string source;
  int iso = 0;
  double exposure_scale = 0.0;
  std::uint64_t image_seed = 0;
  std::array<std::size_t, 2> patch_origin{};  // row, col in the source image
  std::string clean_sha256;
  std::string degraded_sha256;
};

struct Manifest {
  std::string generator_version = kGeneratorVersion;
  std::string psf_sha256;
  std::string psf_file;
  std::uint64_t seed = 0;
  std::size_t patch_size = 0;
  std::size_t patches_per_image = 0;
  std::vector<int> iso_choices;
  std::vector<double> exposure_scales;
  NoiseParams noise{};
  double headroom = kDefaultHeadroom;
  std::string source_dir;
  std::vector<PatchPair> pairs;
};

/// Per-image seed: a hash of the run seed and the image index.
std::uint64_t derive_image_seed(std::uint64_t seed, std::size_t image_index) noexcept;

/// Simulates each source image (sorted by filename) as a pinhole capture and
/// cuts aligned clean/degraded patches from it. Writes 16-bit PNG pairs, the
/// PSF and `manifest.json` into output_dir. Unreadable or undersized sources
/// are skipped with a warning; throws InvalidInput if nothing was produced.
Manifest generate_pairs(const DatasetSpec& spec);

std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text);

/// Rebuilds the generation spec recorded in a manifest; the PSF is read from
/// the copy stored next to it.
DatasetSpec spec_from_manifest(const Manifest& manifest, const std::filesystem::path& manifest_dir,
                               const std::filesystem::path& output_dir);

}  // namespace obscura
