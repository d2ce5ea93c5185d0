#include "obscura_cli/commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "obscura/dataset.hpp"
#include "obscura/error.hpp"
#include "obscura/io.hpp"
#include "obscura/metrics.hpp"

namespace obscura::cli {
namespace {

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const std::string t = item.substr(b);
      values.push_back(std::stod(t, &used));
      if (t.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(t);
    } catch (const std::logic_error&) {
      throw UsageError("--values: cannot parse '" + item + "' as a number");
    }
  }
  if (values.empty()) throw UsageError("--values: the value list is empty");
  return values;
}

// Options shared by every config-driven subcommand.
struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;

  void attach(CLI::App& app) {
    app.add_option("--config,-c", config_path, "Run configuration file (key = value, see `obscura config`)");
    app.add_option("--set", overrides, "Override a config field, e.g. --set noise.iso=6400")->take_all();
  }

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    validate(cfg);
    return cfg;
  }
};

void write_lines(const std::filesystem::path& path, const std::string& line, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << line << '\n';
}

int dispatch_errors(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 64;
  } catch (const obscura::Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

Psf config_psf(const RunConfig& cfg) { return airy_psf(cfg.optics, cfg.effective_psf_size()); }

Psf load_or_build_psf(const RunConfig& cfg, const std::optional<std::filesystem::path>& psf_path) {
  if (!psf_path) return config_psf(cfg);
  Psf psf = io::read_psf(*psf_path);
  if (std::abs(psf.pitch() - cfg.optics.pixel_pitch) > 1e-6 * cfg.optics.pixel_pitch) {
    throw InvalidInput("PSF pitch " + format_number(psf.pitch()) + " m in " + psf_path->string() +
                       " differs from optics.pixel_pitch " + format_number(cfg.optics.pixel_pitch) + " m");
  }
  return psf;
}

RestoreMethod resolve_method(const RunConfig& cfg, const PlanarImage& observation, const NoiseParams& noise,
                             double exposure_scale) {
  if (cfg.method == Method::Admm) return cfg.admm;
  const double nsr = cfg.wiener_nsr ? *cfg.wiener_nsr : estimate_wiener_nsr(observation, noise, exposure_scale);
  return WienerParams{nsr};
}

PlanarImage simulate(const RunConfig& cfg, const PlanarImage& clean, const Psf& psf) {
  return simulate_pinhole_capture(clean, psf, cfg.noise, cfg.exposure_scale, cfg.seed, cfg.headroom);
}

RestoreResult restore(const RunConfig& cfg, const PlanarImage& observation, const Psf& psf) {
  const auto method = resolve_method(cfg, observation, cfg.noise, cfg.exposure_scale);
  return restore_auto(observation, psf, cfg.optics, method, cfg.pipeline, cfg.tiles);
}

std::string report_to_json_line(const RestoreReport& report) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["method"] = report.method;
  j["iterations_run"] = report.iterations_run;
  j["final_objective"] = report.final_objective;
  j["primal_residuals"] = report.primal_residuals;
  j["dual_residuals"] = report.dual_residuals;
  j["reblur_mse"] = report.reblur_mse;
  j["converged"] = report.converged;
  return j.dump();
}

SweepPoint sweep_point(const RunConfig& cfg, SweepAxis axis, double value) {
  SweepPoint point{cfg.noise, cfg.exposure_scale};
  if (axis == SweepAxis::Exposure) {
    if (!(value > 0.0)) throw UsageError("exposure sweep values must be positive");
    point.exposure_scale = value;
    return point;
  }
  const auto iso = static_cast<int>(std::lround(value));
  if (iso < cfg.noise.iso_base || std::abs(value - iso) > 1e-9) {
    throw UsageError("ISO sweep values must be integers >= noise.iso_base");
  }
  const double ratio = static_cast<double>(cfg.noise.iso) / iso;
  point.noise.iso = iso;
  // Same photons per sample as at the configured ISO.
  point.exposure_scale = cfg.exposure_scale / ratio;
  const double pre = cfg.read_noise_pre_gain_fraction;
  point.noise.read_sigma_dn = cfg.noise.read_sigma_dn * std::sqrt(pre + (1.0 - pre) * ratio * ratio);
  return point;
}

std::string sweep_image_name(const char* kind, double value) {
  std::ostringstream os;
  os << kind << '_' << std::setprecision(10) << value << ".png";
  return os.str();
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg, const PlanarImage& clean, const Psf& psf, SweepAxis axis,
                                std::span<const double> values, const std::optional<std::filesystem::path>& out_dir) {
  if (values.empty()) throw UsageError("sweep needs at least one value");
  if (out_dir) std::filesystem::create_directories(*out_dir);
  std::vector<SweepRow> rows;
  for (double value : values) {
    const SweepPoint point = sweep_point(cfg, axis, value);
    const PlanarImage degraded = io::decode_image(io::encode_png(
        simulate_pinhole_capture(clean, psf, point.noise, point.exposure_scale, cfg.seed, cfg.headroom), 16));
    const auto method = resolve_method(cfg, degraded, point.noise, point.exposure_scale);
    const RestoreResult restored = restore_auto(degraded, psf, cfg.optics, method, cfg.pipeline, cfg.tiles);
    const PlanarImage shown = restored.image.clipped(0.0, 1.0);
    const auto score = evaluate(clean, shown);
    rows.push_back({value, score.psnr_db, score.ssim, restored.report.reblur_mse});
    if (out_dir) {
      io::write_image(*out_dir / sweep_image_name("degraded", value), degraded, 16);
      io::write_image(*out_dir / sweep_image_name("restored", value), restored.image, 16);
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "value,psnr_db,ssim,reblur_mse\n";
  for (const auto& r : rows) {
    os << format_number(r.value) << ',' << format_number(r.psnr_db) << ',' << format_number(r.ssim) << ','
       << format_number(r.reblur_mse) << '\n';
  }
  return os.str();
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  // Diagnostics go to stderr; stdout carries only command payloads.
  if (!spdlog::get("obscura")) {
    auto logger = spdlog::stderr_color_mt("obscura");
    spdlog::set_default_logger(logger);
  }

  CLI::App app{"obscura: pinhole camera simulation and restoration"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::function<void()> action;

  // psf gen / psf mtf
  auto* psf_cmd = app.add_subcommand("psf", "Generate or characterize a point spread function");
  psf_cmd->require_subcommand(1);
  CommonOptions psf_gen_opts;
  std::string psf_gen_out;
  std::optional<std::size_t> psf_gen_size;
  auto* psf_gen = psf_cmd->add_subcommand("gen", "Write the Airy PSF for the configured optics as PFM");
  psf_gen_opts.attach(*psf_gen);
  psf_gen->add_option("--out,-o", psf_gen_out, "Output PFM path (pitch goes to <out>.txt)")->required();
  psf_gen->add_option("--size", psf_gen_size, "Odd kernel size (overrides optics.psf_size)");
  psf_gen->callback([&] {
    action = [&] {
      RunConfig cfg = psf_gen_opts.load();
      if (psf_gen_size) {
        if (*psf_gen_size < 3 || *psf_gen_size % 2 == 0) {
          throw UsageError("--size: PSF size must be odd and at least 3, got " + std::to_string(*psf_gen_size));
        }
        cfg.psf_size = *psf_gen_size;
      }
      io::write_psf(psf_gen_out, config_psf(cfg));
      out << psf_gen_out << '\n';
    };
  });

  CommonOptions psf_mtf_opts;
  std::string psf_mtf_in;
  std::string psf_mtf_out;
  auto* psf_mtf = psf_cmd->add_subcommand("mtf", "Write the MTF CSV of a PSF and print its MTF50 (cycles/mm)");
  psf_mtf_opts.attach(*psf_mtf);
  psf_mtf->add_option("--psf,-i", psf_mtf_in, "PSF PFM file (default: Airy PSF from the config)");
  psf_mtf->add_option("--out,-o", psf_mtf_out, "Output CSV path")->required();
  psf_mtf->callback([&] {
    action = [&] {
      const RunConfig cfg = psf_mtf_opts.load();
      const Psf psf = psf_mtf_in.empty() ? config_psf(cfg) : io::read_psf(psf_mtf_in);
      const MtfCurve curve = mtf_from_psf(psf);
      io::write_mtf_csv(psf_mtf_out, curve);
      out << std::setprecision(17) << mtf50(curve) << '\n';
    };
  });

  // simulate
  CommonOptions sim_opts;
  std::string sim_in, sim_out, sim_psf;
  std::optional<std::uint64_t> sim_seed;
  std::optional<int> sim_iso;
  std::optional<double> sim_exposure;
  auto* sim = app.add_subcommand("simulate", "Blur a clean image with the PSF and add sensor noise");
  sim_opts.attach(*sim);
  sim->add_option("--in,-i", sim_in, "Clean input image (PNG or PFM)")->required();
  sim->add_option("--out,-o", sim_out, "Degraded output (.png = 16-bit, .pfm = float)")->required();
  sim->add_option("--psf", sim_psf, "PSF PFM file (default: Airy PSF from the config)");
  sim->add_option("--seed", sim_seed, "Noise seed (overrides noise.seed)");
  sim->add_option("--iso", sim_iso, "ISO (overrides noise.iso)");
  sim->add_option("--exposure", sim_exposure, "Exposure scale (overrides noise.exposure_scale)");
  sim->callback([&] {
    action = [&] {
      RunConfig cfg = sim_opts.load();
      if (sim_seed) cfg.seed = *sim_seed;
      if (sim_iso) cfg.noise.iso = *sim_iso;
      if (sim_exposure) cfg.exposure_scale = *sim_exposure;
      validate(cfg);
      const Psf psf = load_or_build_psf(cfg, sim_psf.empty() ? std::nullopt : std::optional(sim_psf));
      io::write_image(sim_out, simulate(cfg, io::read_image(sim_in), psf), 16);
      out << sim_out << '\n';
    };
  });

  // restore
  CommonOptions res_opts;
  std::string res_in, res_out, res_psf, res_report, res_method;
  std::optional<int> res_iters;
  std::optional<double> res_nsr, res_lambda;
  bool res_no_lowpass = false;
  auto* res = app.add_subcommand("restore", "Low-pass at the diffraction limit and deconvolve");
  res_opts.attach(*res);
  res->add_option("--in,-i", res_in, "Captured image (PNG or PFM)")->required();
  res->add_option("--out,-o", res_out, "Restored output (.png = 16-bit, .pfm = float)")->required();
  res->add_option("--psf", res_psf, "PSF PFM file (default: Airy PSF from the config)");
  res->add_option("--report", res_report, "JSON-lines report to append to (default: <out>.jsonl)");
  res->add_option("--method", res_method, "wiener or admm (overrides restore.method)")
      ->check(CLI::IsMember({"wiener", "admm"}));
  res->add_option("--max-iters", res_iters, "ADMM iteration cap (overrides restore.max_iters)");
  res->add_option("--nsr", res_nsr, "Wiener noise-to-signal ratio (overrides restore.nsr)");
  res->add_option("--lambda-tv", res_lambda, "ADMM TV weight (overrides restore.lambda_tv)");
  res->add_flag("--no-lowpass", res_no_lowpass, "Skip the diffraction-limit low-pass filter");
  res->callback([&] {
    action = [&] {
      RunConfig cfg = res_opts.load();
      if (!res_method.empty()) cfg.method = res_method == "wiener" ? Method::Wiener : Method::Admm;
      if (res_iters) cfg.admm.max_iters = *res_iters;
      if (res_nsr) cfg.wiener_nsr = *res_nsr;
      if (res_lambda) cfg.admm.lambda_tv = *res_lambda;
      if (res_no_lowpass) cfg.pipeline.lowpass = false;
      validate(cfg);
      const Psf psf = load_or_build_psf(cfg, res_psf.empty() ? std::nullopt : std::optional(res_psf));
      const RestoreResult result = restore(cfg, io::read_image(res_in), psf);
      io::write_image(res_out, result.image, 16);
      const std::string report_path = res_report.empty() ? res_out + ".jsonl" : res_report;
      write_lines(report_path, report_to_json_line(result.report), true);
      out << res_out << '\n' << report_path << '\n';
    };
  });

  // evaluate
  std::string eval_ref;
  std::vector<std::string> eval_tests;
  double eval_peak = 1.0;
  auto* eval = app.add_subcommand("evaluate", "Print file,psnr_db,ssim for test images against a reference");
  eval->add_option("--ref,-r", eval_ref, "Reference image")->required();
  eval->add_option("--test,-t", eval_tests, "Image(s) to score")->required()->take_all();
  eval->add_option("--peak", eval_peak, "Peak signal value for PSNR/SSIM");
  eval->callback([&] {
    action = [&] {
      const PlanarImage ref = io::read_image(eval_ref);
      std::ostringstream rows;
      rows << "file,psnr_db,ssim\n";
      for (const auto& t : eval_tests) {
        const auto score = evaluate(ref, io::read_image(t), eval_peak);
        rows << t << ',' << format_number(score.psnr_db) << ',' << format_number(score.ssim) << '\n';
      }
      out << rows.str();
    };
  });

  // dataset
  CommonOptions ds_opts;
  std::string ds_source, ds_out, ds_psf;
  auto* ds = app.add_subcommand("dataset", "Generate aligned clean/degraded training patches");
  ds_opts.attach(*ds);
  ds->add_option("--source", ds_source, "Directory of clean PNG/PFM images")->required();
  ds->add_option("--out,-o", ds_out, "Output directory")->required();
  ds->add_option("--psf", ds_psf, "PSF PFM file (default: Airy PSF from the config)");
  ds->callback([&] {
    action = [&] {
      const RunConfig cfg = ds_opts.load();
      DatasetSpec spec;
      spec.source_dir = ds_source;
      spec.output_dir = ds_out;
      spec.psf = load_or_build_psf(cfg, ds_psf.empty() ? std::nullopt : std::optional(ds_psf));
      spec.iso_choices = cfg.dataset.iso_choices;
      spec.exposure_scales = cfg.dataset.exposure_scales;
      spec.patch_size = cfg.dataset.patch_size;
      spec.patches_per_image = cfg.dataset.patches_per_image;
      spec.seed = cfg.seed;
      spec.noise = cfg.noise;
      spec.headroom = cfg.headroom;
      generate_pairs(spec);
      out << (std::filesystem::path(ds_out) / "manifest.json").string() << '\n';
    };
  });

  // sweep
  CommonOptions sw_opts;
  std::string sw_axis, sw_values, sw_in, sw_out, sw_psf;
  auto* sw = app.add_subcommand("sweep", "Simulate and restore across ISO or exposure values");
  sw_opts.attach(*sw);
  sw->add_option("--axis", sw_axis, "iso or exposure")->required()->check(CLI::IsMember({"iso", "exposure"}));
  sw->add_option("--values", sw_values, "Comma-separated values, e.g. 1600,3200,6400")->required();
  sw->add_option("--in,-i", sw_in, "Clean input image")->required();
  sw->add_option("--out-dir,-o", sw_out, "Directory for sweep.csv and per-value images")->required();
  sw->add_option("--psf", sw_psf, "PSF PFM file (default: Airy PSF from the config)");
  sw->callback([&] {
    action = [&] {
      const auto values = parse_values(sw_values);
      const RunConfig cfg = sw_opts.load();
      const Psf psf = load_or_build_psf(cfg, sw_psf.empty() ? std::nullopt : std::optional(sw_psf));
      const auto axis = sw_axis == "iso" ? SweepAxis::Iso : SweepAxis::Exposure;
      const auto rows = run_sweep(cfg, io::read_image(sw_in), psf, axis, values, std::filesystem::path(sw_out));
      const std::string csv = sweep_csv(rows);
      std::ofstream(std::filesystem::path(sw_out) / "sweep.csv", std::ios::trunc) << csv;
      out << csv;
    };
  });

  // config
  auto* cfg_cmd = app.add_subcommand("config", "Print an annotated example configuration");
  cfg_cmd->callback([&] { action = [&] { out << example_config(); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as ParseErrors with exit code 0.
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "usage error: " << e.what() << '\n';
    return 64;
  }
  if (!action) {
    err << app.help();
    return 64;
  }
  return dispatch_errors(action, err);
}

}  // namespace obscura::cli
