#include "obscura_cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "obscura/error.hpp"

namespace obscura::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double parse_double(const std::string& field, const std::string& text) {
  const std::string v = unquote(text);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  throw UsageError(field + ": expected a number, got '" + text + "'");
}

template <typename Int>
Int parse_int(const std::string& field, const std::string& text) {
  const std::string v = unquote(text);
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError(field + ": expected an integer, got '" + text + "'");
  }
  return out;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string v = unquote(text);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError(field + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> parse_list(const std::string& field, const std::string& text) {
  std::string v = trim(text);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    throw UsageError(field + ": expected a list like [a, b], got '" + text + "'");
  }
  std::vector<std::string> items;
  std::stringstream ss(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

using Setter = std::function<void(RunConfig&, const std::string& field, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"optics.wavelength", [](RunConfig& c, auto& f, auto& v) { c.optics.wavelength = parse_double(f, v); }},
      {"optics.pinhole_radius", [](RunConfig& c, auto& f, auto& v) { c.optics.pinhole_radius = parse_double(f, v); }},
      {"optics.distance", [](RunConfig& c, auto& f, auto& v) { c.optics.distance = parse_double(f, v); }},
      {"optics.pixel_pitch", [](RunConfig& c, auto& f, auto& v) { c.optics.pixel_pitch = parse_double(f, v); }},
      {"optics.psf_size", [](RunConfig& c, auto& f, auto& v) { c.psf_size = parse_int<std::size_t>(f, v); }},
      {"noise.iso", [](RunConfig& c, auto& f, auto& v) { c.noise.iso = parse_int<int>(f, v); }},
      {"noise.iso_base", [](RunConfig& c, auto& f, auto& v) { c.noise.iso_base = parse_int<int>(f, v); }},
      {"noise.full_well_photons",
       [](RunConfig& c, auto& f, auto& v) { c.noise.full_well_photons = parse_double(f, v); }},
      {"noise.read_sigma_dn", [](RunConfig& c, auto& f, auto& v) { c.noise.read_sigma_dn = parse_double(f, v); }},
      {"noise.exposure_scale", [](RunConfig& c, auto& f, auto& v) { c.exposure_scale = parse_double(f, v); }},
      {"noise.seed", [](RunConfig& c, auto& f, auto& v) { c.seed = parse_int<std::uint64_t>(f, v); }},
      {"noise.headroom", [](RunConfig& c, auto& f, auto& v) { c.headroom = parse_double(f, v); }},
      {"restore.method",
       [](RunConfig& c, auto& f, auto& v) {
         const std::string m = unquote(v);
         if (m == "wiener") c.method = Method::Wiener;
         else if (m == "admm") c.method = Method::Admm;
         else throw UsageError(f + ": expected wiener or admm, got '" + v + "'");
       }},
      {"restore.nsr",
       [](RunConfig& c, auto& f, auto& v) {
         if (unquote(v) == "auto") c.wiener_nsr.reset();
         else c.wiener_nsr = parse_double(f, v);
       }},
      {"restore.lambda_tv", [](RunConfig& c, auto& f, auto& v) { c.admm.lambda_tv = parse_double(f, v); }},
      {"restore.rho", [](RunConfig& c, auto& f, auto& v) { c.admm.rho = parse_double(f, v); }},
      {"restore.max_iters", [](RunConfig& c, auto& f, auto& v) { c.admm.max_iters = parse_int<int>(f, v); }},
      {"restore.tol", [](RunConfig& c, auto& f, auto& v) { c.admm.tol = parse_double(f, v); }},
      {"restore.tv_mode",
       [](RunConfig& c, auto& f, auto& v) {
         const std::string m = unquote(v);
         if (m == "anisotropic") c.admm.tv_mode = TvMode::Anisotropic;
         else if (m == "isotropic") c.admm.tv_mode = TvMode::Isotropic;
         else throw UsageError(f + ": expected anisotropic or isotropic, got '" + v + "'");
       }},
      {"restore.lowpass", [](RunConfig& c, auto& f, auto& v) { c.pipeline.lowpass = parse_bool(f, v); }},
      {"restore.taper_width",
       [](RunConfig& c, auto& f, auto& v) { c.pipeline.taper_width = parse_int<std::size_t>(f, v); }},
      {"restore.tile_size", [](RunConfig& c, auto& f, auto& v) { c.tiles.tile_size = parse_int<std::size_t>(f, v); }},
      {"restore.tile_overlap",
       [](RunConfig& c, auto& f, auto& v) { c.tiles.overlap = parse_int<std::size_t>(f, v); }},
      {"restore.tile_area_threshold",
       [](RunConfig& c, auto& f, auto& v) { c.tiles.area_threshold = parse_int<std::size_t>(f, v); }},
      {"restore.workers", [](RunConfig& c, auto& f, auto& v) { c.tiles.workers = parse_int<std::size_t>(f, v); }},
      {"dataset.patch_size",
       [](RunConfig& c, auto& f, auto& v) { c.dataset.patch_size = parse_int<std::size_t>(f, v); }},
      {"dataset.patches_per_image",
       [](RunConfig& c, auto& f, auto& v) { c.dataset.patches_per_image = parse_int<std::size_t>(f, v); }},
      {"dataset.iso_choices",
       [](RunConfig& c, auto& f, auto& v) {
         c.dataset.iso_choices.clear();
         for (const auto& item : parse_list(f, v)) c.dataset.iso_choices.push_back(parse_int<int>(f, item));
       }},
      {"dataset.exposure_scales",
       [](RunConfig& c, auto& f, auto& v) {
         c.dataset.exposure_scales.clear();
         for (const auto& item : parse_list(f, v)) c.dataset.exposure_scales.push_back(parse_double(f, item));
       }},
      {"sweep.read_noise_pre_gain_fraction",
       [](RunConfig& c, auto& f, auto& v) { c.read_noise_pre_gain_fraction = parse_double(f, v); }},
  };
  return table;
}

void set_field(RunConfig& cfg, const std::string& field, const std::string& value, const std::string& where) {
  const auto& table = setters();
  const auto it = table.find(field);
  if (it == table.end()) throw UsageError(where + "unknown config field '" + field + "'");
  try {
    it->second(cfg, field, value);
  } catch (const UsageError& e) {
    throw UsageError(where + e.what());
  }
}

}  // namespace

std::size_t RunConfig::effective_psf_size() const {
  return psf_size != 0 ? psf_size : default_psf_size(optics);
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto hash = line.find('#');
    std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw UsageError(where + "malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw UsageError(where + "expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (section.empty()) throw UsageError(where + "key '" + key + "' must follow a [section] header");
    const std::string field = section + "." + key;
    set_field(cfg, field, value, where);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("override must look like section.key=value: '" + assignment + "'");
  set_field(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "override: ");
}

void validate(const RunConfig& cfg) {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) throw UsageError(std::string(field) + ": " + rule);
  };
  require(cfg.optics.wavelength > 0.0, "optics.wavelength", "must be positive");
  require(cfg.optics.pinhole_radius > 0.0, "optics.pinhole_radius", "must be positive");
  require(cfg.optics.distance > 0.0, "optics.distance", "must be positive");
  require(cfg.optics.pixel_pitch > 0.0, "optics.pixel_pitch", "must be positive");
  if (cfg.psf_size != 0 && (cfg.psf_size < 3 || cfg.psf_size % 2 == 0)) {
    throw UsageError("optics.psf_size: PSF size must be odd and at least 3, got " + std::to_string(cfg.psf_size));
  }
  require(cfg.noise.iso_base > 0, "noise.iso_base", "must be positive");
  require(cfg.noise.iso >= cfg.noise.iso_base, "noise.iso", "must be >= noise.iso_base");
  require(cfg.noise.full_well_photons > 0.0, "noise.full_well_photons", "must be positive");
  require(cfg.noise.read_sigma_dn >= 0.0, "noise.read_sigma_dn", "must be non-negative");
  require(cfg.exposure_scale > 0.0, "noise.exposure_scale", "must be positive");
  require(cfg.headroom > 0.0, "noise.headroom", "must be positive");
  require(!cfg.wiener_nsr || *cfg.wiener_nsr >= 0.0, "restore.nsr", "must be >= 0");
  require(cfg.admm.lambda_tv > 0.0, "restore.lambda_tv", "must be positive");
  require(cfg.admm.rho > 0.0, "restore.rho", "must be positive");
  require(cfg.admm.max_iters >= 1, "restore.max_iters", "must be >= 1");
  require(cfg.admm.tol > 0.0, "restore.tol", "must be positive");
  if (cfg.tiles.tile_size == 0 || 2 * cfg.tiles.overlap > cfg.tiles.tile_size) {
    throw UsageError("restore.tile_size: must be positive and at least twice restore.tile_overlap");
  }
  if (cfg.dataset.patch_size < 64) throw UsageError("dataset.patch_size: must be >= 64");
  if (cfg.dataset.patches_per_image == 0) throw UsageError("dataset.patches_per_image: must be >= 1");
  if (cfg.dataset.iso_choices.empty()) throw UsageError("dataset.iso_choices: must not be empty");
  for (int iso : cfg.dataset.iso_choices) {
    if (iso < cfg.noise.iso_base) throw UsageError("dataset.iso_choices: every ISO must be >= noise.iso_base");
  }
  if (cfg.dataset.exposure_scales.empty()) throw UsageError("dataset.exposure_scales: must not be empty");
  for (double e : cfg.dataset.exposure_scales) {
    if (!(e > 0.0)) throw UsageError("dataset.exposure_scales: values must be positive");
  }
  if (!(cfg.read_noise_pre_gain_fraction >= 0.0 && cfg.read_noise_pre_gain_fraction <= 1.0)) {
    throw UsageError("sweep.read_noise_pre_gain_fraction: must lie in [0, 1]");
  }
}

std::string example_config() {
  return R"(# obscura run configuration. Every key is optional; shown values are the defaults.

[optics]
wavelength = 550e-9       # metres
pinhole_radius = 75e-6    # metres (0.15 mm pinhole)
distance = 0.02           # pinhole-to-sensor distance, metres
pixel_pitch = 4e-6        # metres per pixel
psf_size = 0              # odd kernel size; 0 = cover three first-zero radii

[noise]
iso = 3200
iso_base = 100
full_well_photons = 10000 # photons at signal 1.0 and base ISO
read_sigma_dn = 0.01      # read-noise std-dev, normalized units
exposure_scale = 1.0      # light relative to nominal
seed = 0
headroom = 4.0            # clip level after noise

[restore]
method = admm             # admm | wiener
nsr = auto                # Wiener noise-to-signal ratio, or auto
lambda_tv = 1e-3
rho = 1.0
max_iters = 100
tol = 1e-4
tv_mode = anisotropic     # anisotropic | isotropic
lowpass = true            # diffraction-limit low-pass before deconvolution
taper_width = 16          # minimum edge padding, pixels
tile_size = 1024
tile_overlap = 64
tile_area_threshold = 4194304
workers = 0               # 0 = all cores; output does not depend on it

[dataset]
patch_size = 256
patches_per_image = 4
iso_choices = [1600, 3200, 6400]
exposure_scales = [1.0, 0.5]

[sweep]
read_noise_pre_gain_fraction = 0.5
)";
}

}  // namespace obscura::cli
