#include "mast/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mast/c_api.h"
#include "mast/calibration.hpp"
#include "mast/diagnostics.hpp"
#include "mast/digest.hpp"
#include "mast/error.hpp"
#include "mast/image_io.hpp"
#include "mast/json_io.hpp"
#include "mast/masks.hpp"
#include "mast/parallel.hpp"
#include "mast/pipeline.hpp"
#include "mast/tensor_io.hpp"
#include "mast/version.hpp"

namespace fs = std::filesystem;

namespace mast {
namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::DegenerateInput:
    case ErrorKind::FormatError:
    case ErrorKind::InfeasibleMasks:
    case ErrorKind::EmptyBand:
    case ErrorKind::Io:
      return kExitUser;
    case ErrorKind::DegenerateLogits:
    case ErrorKind::SingularFit:
      return kExitInternal;
  }
  return kExitInternal;
}

/// Records every file written below an output directory with its digest.
class OutputLog {
 public:
  explicit OutputLog(fs::path root) : root_(std::move(root)) {}

  void tensor(const fs::path& rel, const Tensor& t) {
    const auto bytes = encode_tensor(t);
    write_file_bytes(root_ / rel, bytes);
    add(rel, sha256_hex(bytes), bytes.size());
  }

  void json(const fs::path& rel, const Json& j) {
    const std::string text = j.dump(2) + "\n";
    write_text_file(root_ / rel, text);
    add(rel, sha256_hex({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}), text.size());
  }

  void file(const fs::path& rel) {
    add(rel, sha256_file(root_ / rel), fs::file_size(root_ / rel));
  }

  const Json& entries() const { return entries_; }
  const fs::path& root() const { return root_; }

 private:
  void add(const fs::path& rel, const std::string& digest, std::uintmax_t bytes) {
    entries_.push_back(Json{{"path", rel.generic_string()}, {"sha256", digest}, {"bytes", bytes}});
  }

  fs::path root_;
  Json entries_ = Json::array();
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

Tensor load_2d(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm" || ext == ".PGM") return read_pgm(path);
  Tensor t = read_tensor(path);
  if (t.rank() != 2) fail(ErrorKind::InvalidInput, path.string() + " must hold a rank-2 tensor");
  return t;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string config;
  std::string out;
  std::vector<std::string> masks;
  std::optional<double> mask_sigma;
  bool renormalize = false;
  std::string tau_mode;
  std::string tau_model;
  std::size_t steps = 1;
  bool no_ddi = false;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  if (a.mask_sigma) cfg.mask_sigma = *a.mask_sigma;
  if (!a.tau_mode.empty()) cfg.tau_mode = TauSetting::parse(a.tau_mode);
  if (a.seed) cfg.seed = *a.seed;
  if (!a.masks.empty()) cfg.n_styles = a.masks.size();
  if (a.steps < 1) fail(ErrorKind::InvalidInput, "--steps must be >= 1");
  cfg.validate();

  Json inputs = Json::array();
  auto record_input = [&](const std::string& path) {
    inputs.push_back(Json{{"path", path}, {"sha256", sha256_file(path)}});
  };
  if (!a.config.empty()) record_input(a.config);

  StepOptions options;
  options.disable_ddi = a.no_ddi;
  options.feasibility.renormalize = a.renormalize;
  if (!a.tau_model.empty()) {
    options.fitted_model = load_temperature_model(a.tau_model);
    record_input(a.tau_model);
  }
  if (cfg.tau_mode.mode == TauMode::Fit && !options.fitted_model) {
    fail(ErrorKind::InvalidInput, "--tau-mode fit requires --tau-model");
  }
  if (!a.masks.empty()) {
    std::vector<Tensor> masks;
    std::size_t src_h = 0, src_w = 0;
    for (const auto& path : a.masks) {
      const Tensor m = load_mask(path);
      src_h = m.rows();
      src_w = m.cols();
      masks.push_back(smooth_mask(resample_to_tokens(m, cfg.token_h, cfg.token_w), cfg.mask_sigma));
      record_input(path);
    }
    options.masks = make_mask_set(std::move(masks), src_h, src_w);
  }

  const fs::path root(a.out);
  ensure_dir(root);
  OutputLog log(root);
  Json steps = Json::array();
  for (std::size_t s = 0; s < a.steps; ++s) {
    PipelineConfig step_cfg = cfg;
    step_cfg.seed = cfg.seed + s;
    const SyntheticScene scene = generate_fixture(step_cfg);
    const StepReport report = run_step(scene, step_cfg, options);

    std::ostringstream dir;
    dir << "tensors/step" << std::setw(3) << std::setfill('0') << s;
    const fs::path tdir(dir.str());
    ensure_dir(root / tdir);
    for (std::size_t h = 0; h < report.heads.size(); ++h) {
      const std::string suffix = "_head" + std::to_string(h) + ".mstt";
      log.tensor(tdir / ("anchored_queries" + suffix), report.heads[h].anchored_queries);
      log.tensor(tdir / ("biased_logits" + suffix), report.heads[h].biased_logits);
      log.tensor(tdir / ("attention_weights" + suffix), report.heads[h].attention_weights);
    }
    log.tensor(tdir / "attention_output.mstt", report.attention_output);
    log.tensor(tdir / "ddi_output.mstt", report.ddi_output);
    log.tensor(tdir / "ddi_high_freq.mstt", report.ddi_high_freq);
    log.tensor(tdir / "adain_init.mstt", report.adain_init);
    const MaskSet& used = options.masks ? *options.masks : scene.masks;
    for (std::size_t i = 0; i < used.n_styles(); ++i) {
      log.tensor(tdir / ("mask" + std::to_string(i) + ".mstt"), used.masks[i]);
    }

    Json j = report_to_json(report);
    j["step"] = s;
    j["seed"] = step_cfg.seed;
    steps.push_back(std::move(j));
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    out << "step " << s << ":";
    for (const auto& h : report.heads) out << " tau=" << std::setprecision(6) << h.tau;
    out << "\n";
  }
  log.json("report.json", Json{{"config", config_to_json(cfg)}, {"steps", std::move(steps)}});

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const Json manifest{{"config", config_to_json(cfg)},
                      {"options",
                       {{"renormalize", a.renormalize}, {"no_ddi", a.no_ddi}, {"steps", a.steps}}},
                      {"inputs", std::move(inputs)},
                      {"outputs", log.entries()},
                      {"versions",
                       {{"mast", kVersion},
                        {"tensor_format", kTensorFormatVersion},
                        {"c_api", mast_api_version()}}},
                      {"threads", thread_count()},
                      {"started_utc", utc_timestamp()},
                      {"wall_clock_seconds", seconds}};
  write_json(root / "manifest.json", manifest);
  out << "wrote " << (root / "report.json").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  int degree = 2;
  std::string out;
  std::string dataset_out;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  if (a.degree < 1 || a.degree > 4) fail(ErrorKind::InvalidInput, "--degree must lie in 1..4");
  if (a.samples < static_cast<std::size_t>(a.degree) + 1) {
    fail(ErrorKind::InvalidInput, "need at least degree + 1 = " + std::to_string(a.degree + 1) + " samples, got " +
                                      std::to_string(a.samples));
  }
  CalibrationConfig cfg;
  cfg.samples = a.samples;
  cfg.seed = a.seed;
  const CalibrationDataset data = generate_calibration_dataset(cfg);
  const auto [train, holdout] = split_holdout(data);
  const PolynomialFit fit = fit_temperature_model(train, a.degree);

  Json j = model_to_json(fit.model);
  j["r_squared_holdout"] = holdout.samples.empty() ? Json(nullptr) : Json(r_squared(fit.model, holdout.samples));
  j["samples"] = a.samples;
  j["train_samples"] = train.samples.size();
  j["holdout_samples"] = holdout.samples.size();
  j["seed"] = a.seed;
  j["generator"] = data.provenance.generator;
  if (fit.constant_targets) j["constant_targets"] = true;
  write_json(a.out, j);
  if (!a.dataset_out.empty()) write_json(a.dataset_out, dataset_to_json(data));

  out << "degree " << a.degree << " coefficients:";
  for (double c : fit.model.coefficients) out << ' ' << std::setprecision(8) << c;
  out << "\nR^2 train " << fit.r_squared;
  if (!holdout.samples.empty()) out << ", holdout " << j["r_squared_holdout"].get<double>();
  out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string out;
  std::vector<std::string> attention;
  std::string image;
  std::vector<std::string> masks;
  std::size_t band_px = kDefaultBandPx;
  bool paired = false;
  std::uint64_t seed = 0;
  std::size_t pairs = 20;
  std::string run_dir;
};

void write_map(const fs::path& root, const std::string& stem, const Tensor& map) {
  const PgmScaling s = write_pgm_minmax(root / (stem + ".pgm"), map);
  write_json(root / (stem + ".scaling.json"),
             Json{{"min", s.min}, {"max", s.max}, {"mapping", "byte = round(255 * (value - min) / (max - min))"}});
}

void add_entropy_rows(std::vector<StatisticRow>& rows, const std::string& source, const EntropyProfile& p) {
  rows.push_back({source, "mean_entropy", p.mean_entropy});
  rows.push_back({source, "mean_log_p_max", p.mean_log_p_max});
  rows.push_back({source, "entropy_q10", p.q10});
  rows.push_back({source, "entropy_q50", p.q50});
  rows.push_back({source, "entropy_q90", p.q90});
  rows.push_back({source, "rows", static_cast<double>(p.row_entropy.size())});
}

void add_boundary_rows(std::vector<StatisticRow>& rows, const std::string& source, const BoundaryReport& r) {
  rows.push_back({source, "boundary_band_mean", r.boundary_band_mean});
  rows.push_back({source, "interior_mean", r.interior_mean});
  rows.push_back({source, "band_pixels", static_cast<double>(r.band_pixels)});
}

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  if (a.attention.empty() && a.image.empty() && !a.paired && a.run_dir.empty()) {
    fail(ErrorKind::InvalidInput, "nothing to diagnose: pass --attention, --image, --paired-composite or --run-dir");
  }
  if (!a.image.empty() && a.masks.empty()) fail(ErrorKind::InvalidInput, "--image needs at least one --mask");
  const fs::path root(a.out);
  ensure_dir(root);
  std::vector<StatisticRow> rows;

  for (const auto& path : a.attention) {
    const Tensor w = read_tensor(path);
    add_entropy_rows(rows, fs::path(path).stem().string(), attention_entropy_profile(w));
  }

  if (!a.run_dir.empty()) {
    const fs::path tensors = fs::path(a.run_dir) / "tensors";
    if (!fs::is_directory(tensors)) fail(ErrorKind::Io, "no tensors directory under " + a.run_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(tensors)) {
      if (entry.path().filename().string().rfind("attention_weights_head", 0) == 0) files.push_back(entry.path());
    }
    if (files.empty()) fail(ErrorKind::Io, "no attention weights under " + tensors.string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string source = f.parent_path().filename().string() + "/" + f.stem().string();
      add_entropy_rows(rows, source, attention_entropy_profile(read_tensor(f)));
    }
  }

  if (!a.image.empty()) {
    const Tensor img = load_2d(a.image);
    std::vector<Tensor> masks;
    for (const auto& path : a.masks) {
      Tensor m = load_mask(path);
      if (m.rows() != img.rows() || m.cols() != img.cols()) m = resample_to_tokens(m, img.rows(), img.cols());
      masks.push_back(std::move(m));
    }
    const Tensor lap = laplacian_map(img);
    write_map(root, "laplacian", lap);
    add_boundary_rows(rows, "image", boundary_band_stats(lap, make_mask_set(std::move(masks)), a.band_px));
  }

  if (a.paired) {
    if (a.pairs < 1) fail(ErrorKind::InvalidInput, "--pairs must be >= 1");
    std::size_t smooth_lower = 0;
    for (std::size_t k = 0; k < a.pairs; ++k) {
      const CompositePair pair = make_composite_pair(a.seed, k);
      const PairedBoundaryResult r = paired_boundary_stats(pair, a.band_px);
      const std::string source = "pair" + std::to_string(k);
      add_boundary_rows(rows, source + "_hard", r.hard);
      add_boundary_rows(rows, source + "_smooth", r.smooth);
      if (r.smooth.boundary_band_mean < r.hard.boundary_band_mean) ++smooth_lower;
      if (k == 0) {
        write_map(root, "pair0_hard_laplacian", r.hard.laplacian_map);
        write_map(root, "pair0_smooth_laplacian", r.smooth.laplacian_map);
        write_map(root, "pair0_hard_composite", pair.hard);
        write_map(root, "pair0_smooth_composite", pair.smooth);
      }
    }
    rows.push_back({"paired", "smooth_lower_fraction", static_cast<double>(smooth_lower) / static_cast<double>(a.pairs)});
    out << "smooth band mean lower in " << smooth_lower << "/" << a.pairs << " pairs\n";
  }

  write_statistics_csv(root / "statistics.csv", rows);
  out << "wrote " << (root / "statistics.csv").string() << " (" << rows.size() << " rows)\n";
  return kExitOk;
}

// -------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::string values = "paper";
  std::string out;
};

std::vector<double> parse_values(const std::string& text) {
  if (text == "paper") return paper_pi_star_grid();
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) fail(ErrorKind::InvalidInput, "bad pi_star value '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) fail(ErrorKind::InvalidInput, "empty --pi-star-sweep list");
  return values;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  const std::vector<double> values = parse_values(a.values);
  const auto rows = sweep_pi_star(generate_fixture(cfg), cfg, values);
  out << "pi_star  effective  style_mass  expected  entropy\n";
  for (const auto& r : rows) {
    if (r.clamped) out << "warning: pi_star " << r.pi_star_requested << " clamped to " << r.pi_star_effective << "\n";
    out << std::fixed << std::setprecision(4) << r.pi_star_requested << "  " << std::setprecision(6)
        << r.pi_star_effective << "  " << r.mean_style_mass << "  " << r.expected_style_mass << "  "
        << r.mean_entropy << "\n";
  }
  out.unsetf(std::ios::floatfield);
  if (!a.out.empty()) {
    if (fs::path(a.out).extension() == ".csv") {
      std::ostringstream os;
      os << "pi_star_requested,pi_star_effective,mean_style_mass,expected_style_mass,mean_entropy,clamped\n"
         << std::setprecision(17);
      for (const auto& r : rows) {
        os << r.pi_star_requested << ',' << r.pi_star_effective << ',' << r.mean_style_mass << ','
           << r.expected_style_mass << ',' << r.mean_entropy << ',' << (r.clamped ? 1 : 0) << '\n';
      }
      write_text_file(a.out, os.str());
    } else {
      write_json(a.out, Json{{"config", config_to_json(cfg)}, {"rows", sweep_to_json(rows)}});
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-style attention control toolkit", "mast"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the synthetic attention pipeline");
  run_cmd->add_option("--config", run.config, "Pipeline config JSON");
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--mask", run.masks, "Style mask (PGM or tensor file), one per style");
  run_cmd->add_option("--mask-sigma", run.mask_sigma, "Mask smoothing sigma in tokens");
  run_cmd->add_flag("--renormalize", run.renormalize, "Rescale overlapping masks instead of failing");
  run_cmd->add_option("--tau-mode", run.tau_mode, "paper-poly | fit | fixed:<v> | oracle");
  run_cmd->add_option("--tau-model", run.tau_model, "Fitted temperature model JSON");
  run_cmd->add_option("--steps", run.steps, "Number of steps, each with a fresh fixture");
  run_cmd->add_flag("--no-ddi", run.no_ddi, "Force the detail-injection weight to 0");
  run_cmd->add_option("--seed", run.seed, "Override the config seed");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit the temperature polynomial on synthetic logits");
  cal_cmd->add_option("--samples", cal.samples, "Number of synthetic fixtures");
  cal_cmd->add_option("--seed", cal.seed, "Generator seed");
  cal_cmd->add_option("--degree", cal.degree, "Polynomial degree (1-4)");
  cal_cmd->add_option("--out", cal.out, "Coefficient JSON")->required();
  cal_cmd->add_option("--dataset-out", cal.dataset_out, "Write the (delta, tau*) pairs as JSON");

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Boundary and attention-entropy diagnostics");
  diag_cmd->add_option("--out", diag.out, "Output directory")->required();
  diag_cmd->add_option("--attention", diag.attention, "Attention weight tensor file(s)");
  diag_cmd->add_option("--image", diag.image, "Image (PGM or tensor file) for the Laplacian map");
  diag_cmd->add_option("--mask", diag.masks, "Mask(s) defining the boundary band");
  diag_cmd->add_option("--band-px", diag.band_px, "Boundary band half-width in pixels");
  diag_cmd->add_flag("--paired-composite", diag.paired, "Hard vs smooth composite experiment");
  diag_cmd->add_option("--seed", diag.seed, "Seed for the paired composites");
  diag_cmd->add_option("--pairs", diag.pairs, "Number of composite pairs");
  diag_cmd->add_option("--run-dir", diag.run_dir, "Output directory of a previous run");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Style mass and entropy over pi_star values");
  sweep_cmd->add_option("--config", sweep.config, "Pipeline config JSON");
  sweep_cmd->add_option("--pi-star-sweep", sweep.values, "Comma-separated values, or 'paper'");
  sweep_cmd->add_option("--out", sweep.out, "Table output (.json or .csv)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUser;
  }

  try {
    configure_threads_from_env();
    if (*run_cmd) return cmd_run(run, out);
    if (*cal_cmd) return cmd_calibrate(cal, out);
    if (*diag_cmd) return cmd_diagnose(diag, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace mast
