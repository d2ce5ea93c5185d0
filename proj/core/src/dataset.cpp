#include "obscura/dataset.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <json.hpp>

#include "obscura/error.hpp"
#include "obscura/io.hpp"

namespace obscura {
namespace {

using nlohmann::json;

constexpr std::uint64_t kIsoStream = 0x150;
constexpr std::uint64_t kExposureStream = 0xE7;
constexpr std::uint64_t kPatchStream = 0x9A7C;

std::size_t pick_index(std::uint64_t seed, std::uint64_t stream, std::uint64_t k, std::size_t n) {
  return static_cast<std::size_t>(detail::counter_hash(seed, stream, k, 0, 0) % n);
}

std::string pair_name(const char* kind, std::size_t image, std::size_t patch) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu_%02zu.png", kind, image, patch);
  return buf;
}

std::vector<std::filesystem::path> list_sources(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InvalidInput("source directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pfm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

void DatasetSpec::validate() const {
  if (patch_size < 64) throw InvalidArgument("dataset: patch_size must be >= 64");
  if (patches_per_image == 0) throw InvalidArgument("dataset: patches_per_image must be >= 1");
  if (iso_choices.empty()) throw InvalidArgument("dataset: iso_choices must not be empty");
  if (exposure_scales.empty()) throw InvalidArgument("dataset: exposure_scales must not be empty");
  for (int iso : iso_choices) {
    NoiseParams p = noise;
    p.iso = iso;
    p.validate();
  }
  for (double e : exposure_scales) {
    if (!(e > 0.0)) throw InvalidArgument("dataset: exposure scales must be positive");
  }
}

std::uint64_t derive_image_seed(std::uint64_t seed, std::size_t image_index) noexcept {
  return detail::counter_hash(seed, image_index, 0x1D, 0, 0);
}

Manifest generate_pairs(const DatasetSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.output_dir);

  // Simulate with the PSF exactly as stored, so the manifest alone is enough
  // to regenerate every file.
  const auto psf_path = spec.output_dir / "psf.pfm";
  io::write_psf(psf_path, spec.psf);
  const Psf psf = io::read_psf(psf_path);

  Manifest manifest;
  manifest.psf_sha256 = io::sha256_file(psf_path);
  manifest.psf_file = "psf.pfm";
  manifest.seed = spec.seed;
  manifest.patch_size = spec.patch_size;
  manifest.patches_per_image = spec.patches_per_image;
  manifest.iso_choices = spec.iso_choices;
  manifest.exposure_scales = spec.exposure_scales;
  manifest.noise = spec.noise;
  manifest.headroom = spec.headroom;
  manifest.source_dir = spec.source_dir.string();

  const std::size_t margin_r = psf.radius_rows();
  const std::size_t margin_c = psf.radius_cols();
  const auto sources = list_sources(spec.source_dir);
  for (std::size_t index = 0; index < sources.size(); ++index) {
    const auto& path = sources[index];
    PlanarImage clean;
    try {
      clean = io::read_image(path);
    } catch (const Error& e) {
      spdlog::warn("dataset: skipping unreadable {}: {}", path.string(), e.what());
      continue;
    }
    if (clean.height() < spec.patch_size + 2 * margin_r || clean.width() < spec.patch_size + 2 * margin_c) {
      spdlog::warn("dataset: skipping {} ({}x{}): smaller than patch plus PSF margin", path.string(),
                   clean.height(), clean.width());
      continue;
    }

    const std::uint64_t image_seed = derive_image_seed(spec.seed, index);
    NoiseParams noise = spec.noise;
    noise.iso = spec.iso_choices[pick_index(image_seed, kIsoStream, 0, spec.iso_choices.size())];
    const double exposure =
        spec.exposure_scales[pick_index(image_seed, kExposureStream, 0, spec.exposure_scales.size())];

    // Degrade the whole frame first; patches then carry real blur context.
    const PlanarImage degraded =
        simulate_pinhole_capture(clean, psf, noise, exposure, image_seed, spec.headroom);

    const std::size_t span_r = clean.height() - 2 * margin_r - spec.patch_size + 1;
    const std::size_t span_c = clean.width() - 2 * margin_c - spec.patch_size + 1;
    for (std::size_t p = 0; p < spec.patches_per_image; ++p) {
      const std::size_t row = margin_r + pick_index(image_seed, kPatchStream, 2 * p, span_r);
      const std::size_t col = margin_c + pick_index(image_seed, kPatchStream, 2 * p + 1, span_c);
      const auto clean_bytes = io::encode_png(clean.crop(row, col, spec.patch_size, spec.patch_size), 16);
      const auto degraded_bytes = io::encode_png(degraded.crop(row, col, spec.patch_size, spec.patch_size), 16);
      PatchPair pair;
      pair.clean = pair_name("clean", index, p);
      pair.degraded = pair_name("degraded", index, p);
      pair.source = path.filename().string();
      pair.iso = noise.iso;
      pair.exposure_scale = exposure;
      pair.image_seed = image_seed;
      pair.patch_origin = {row, col};
      pair.clean_sha256 = io::sha256_hex(clean_bytes);
      pair.degraded_sha256 = io::sha256_hex(degraded_bytes);
      io::write_file(spec.output_dir / pair.clean, clean_bytes);
      io::write_file(spec.output_dir / pair.degraded, degraded_bytes);
      manifest.pairs.push_back(std::move(pair));
    }
  }
  if (manifest.pairs.empty()) throw InvalidInput("dataset: no usable source images in " + spec.source_dir.string());

  const std::string text = manifest_to_json(manifest);
  io::write_file(spec.output_dir / "manifest.json",
                 std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return manifest;
}

std::string manifest_to_json(const Manifest& m) {
  json j;
  j["generator_version"] = m.generator_version;
  j["psf_sha256"] = m.psf_sha256;
  j["psf_file"] = m.psf_file;
  j["seed"] = m.seed;
  j["patch_size"] = m.patch_size;
  j["patches_per_image"] = m.patches_per_image;
  j["iso_choices"] = m.iso_choices;
  j["exposure_scales"] = m.exposure_scales;
  j["noise"] = {{"full_well_photons", m.noise.full_well_photons},
                {"iso_base", m.noise.iso_base},
                {"read_sigma_dn", m.noise.read_sigma_dn}};
  j["headroom"] = m.headroom;
  j["source_dir"] = m.source_dir;
  j["pairs"] = json::array();
  for (const auto& p : m.pairs) {
    j["pairs"].push_back({{"clean", p.clean},
                          {"degraded", p.degraded},
                          {"source", p.source},
                          {"iso", p.iso},
                          {"exposure_scale", p.exposure_scale},
                          {"image_seed", p.image_seed},
                          {"patch_origin", {p.patch_origin[0], p.patch_origin[1]}},
                          {"clean_sha256", p.clean_sha256},
                          {"degraded_sha256", p.degraded_sha256}});
  }
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
  Manifest m;
  try {
    const json j = json::parse(text);
    m.generator_version = j.at("generator_version").get<std::string>();
    m.psf_sha256 = j.at("psf_sha256").get<std::string>();
    m.psf_file = j.at("psf_file").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.patch_size = j.at("patch_size").get<std::size_t>();
    m.patches_per_image = j.at("patches_per_image").get<std::size_t>();
    m.iso_choices = j.at("iso_choices").get<std::vector<int>>();
    m.exposure_scales = j.at("exposure_scales").get<std::vector<double>>();
    const auto& n = j.at("noise");
    m.noise.full_well_photons = n.at("full_well_photons").get<double>();
    m.noise.iso_base = n.at("iso_base").get<int>();
    m.noise.read_sigma_dn = n.at("read_sigma_dn").get<double>();
    m.headroom = j.at("headroom").get<double>();
    m.source_dir = j.at("source_dir").get<std::string>();
    for (const auto& p : j.at("pairs")) {
      PatchPair pair;
      pair.clean = p.at("clean").get<std::string>();
      pair.degraded = p.at("degraded").get<std::string>();
      pair.source = p.at("source").get<std::string>();
      pair.iso = p.at("iso").get<int>();
      pair.exposure_scale = p.at("exposure_scale").get<double>();
      pair.image_seed = p.at("image_seed").get<std::uint64_t>();
      pair.patch_origin = {p.at("patch_origin").at(0).get<std::size_t>(), p.at("patch_origin").at(1).get<std::size_t>()};
      pair.clean_sha256 = p.at("clean_sha256").get<std::string>();
      pair.degraded_sha256 = p.at("degraded_sha256").get<std::string>();
      m.pairs.push_back(std::move(pair));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed dataset manifest: ") + e.what());
  }
  return m;
}

DatasetSpec spec_from_manifest(const Manifest& m, const std::filesystem::path& manifest_dir,
                               const std::filesystem::path& output_dir) {
  DatasetSpec spec;
  spec.source_dir = m.source_dir;
  spec.output_dir = output_dir;
  spec.psf = io::read_psf(manifest_dir / m.psf_file);
  spec.iso_choices = m.iso_choices;
  spec.exposure_scales = m.exposure_scales;
  spec.patch_size = m.patch_size;
  spec.patches_per_image = m.patches_per_image;
  spec.seed = m.seed;
  spec.noise = m.noise;
  spec.headroom = m.headroom;
  return spec;
}

}  // namespace obscura
