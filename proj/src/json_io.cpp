#include "mast/json_io.hpp"

#include <cmath>
#include <set>

#include "mast/error.hpp"
#include "mast/tensor_io.hpp"

namespace mast {
namespace {

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::InvalidInput, std::string("config key '") + key + "' has the wrong type");
  }
}

std::size_t get_count(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    if (!(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(ErrorKind::InvalidInput, std::string("config key '") + key + "' must be a non-negative integer");
    }
  }
  return v.get<std::size_t>();
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::FormatError, what + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

PipelineConfig config_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::InvalidInput, "config must be a JSON object");
  static const std::set<std::string> known{"lambda",   "pi_star",  "r",        "epsilon_hp",       "mask_sigma",
                                           "tau_mode", "seed",     "token_grid", "d",              "d_v",
                                           "n_heads",  "n_styles", "feature_channels", "latent_channels",
                                           "mask_layout"};
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) fail(ErrorKind::InvalidInput, "unknown config key '" + item.key() + "'");
  }
  PipelineConfig cfg;
  if (j.contains("lambda")) cfg.lambda = get_as<double>(j, "lambda");
  if (j.contains("pi_star")) cfg.pi_star = get_as<double>(j, "pi_star");
  if (j.contains("r")) cfg.r = get_as<double>(j, "r");
  if (j.contains("epsilon_hp")) cfg.epsilon_hp = get_as<double>(j, "epsilon_hp");
  if (j.contains("mask_sigma")) cfg.mask_sigma = get_as<double>(j, "mask_sigma");
  if (j.contains("tau_mode")) cfg.tau_mode = TauSetting::parse(get_as<std::string>(j, "tau_mode"));
  if (j.contains("seed")) cfg.seed = get_count(j, "seed");
  if (j.contains("token_grid")) {
    const Json& g = j.at("token_grid");
    if (!g.is_array() || g.size() != 2) fail(ErrorKind::InvalidInput, "token_grid must be [h, w]");
    const Json hw{{"h", g[0]}, {"w", g[1]}};
    cfg.token_h = get_count(hw, "h");
    cfg.token_w = get_count(hw, "w");
  }
  if (j.contains("d")) cfg.d = get_count(j, "d");
  if (j.contains("d_v")) cfg.d_v = get_count(j, "d_v");
  if (j.contains("n_heads")) cfg.n_heads = get_count(j, "n_heads");
  if (j.contains("n_styles")) cfg.n_styles = get_count(j, "n_styles");
  if (j.contains("feature_channels")) cfg.feature_channels = get_count(j, "feature_channels");
  if (j.contains("latent_channels")) cfg.latent_channels = get_count(j, "latent_channels");
  if (j.contains("mask_layout")) cfg.mask_layout = parse_mask_layout(get_as<std::string>(j, "mask_layout"));
  cfg.validate();
  return cfg;
}

Json config_to_json(const PipelineConfig& cfg) {
  return Json{{"lambda", cfg.lambda},
              {"pi_star", cfg.pi_star},
              {"r", cfg.r},
              {"epsilon_hp", cfg.epsilon_hp},
              {"mask_sigma", cfg.mask_sigma},
              {"tau_mode", cfg.tau_mode.to_string()},
              {"seed", cfg.seed},
              {"token_grid", {cfg.token_h, cfg.token_w}},
              {"d", cfg.d},
              {"d_v", cfg.d_v},
              {"n_heads", cfg.n_heads},
              {"n_styles", cfg.n_styles},
              {"feature_channels", cfg.feature_channels},
              {"latent_channels", cfg.latent_channels},
              {"mask_layout", to_string(cfg.mask_layout)}};
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return config_from_json(parse_json(std::string(bytes.begin(), bytes.end()), "config " + path.string()));
}

TemperatureModel model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("coefficients")) {
    fail(ErrorKind::FormatError, "temperature model needs a 'coefficients' array");
  }
  TemperatureModel model;
  try {
    model.coefficients = j.at("coefficients").get<std::vector<double>>();
    if (j.contains("clamp_min")) model.clamp_min = j.at("clamp_min").get<double>();
    if (j.contains("r_squared") && !j.at("r_squared").is_null()) model.r_squared = j.at("r_squared").get<double>();
    if (j.contains("degree") && j.at("degree").get<std::size_t>() + 1 != model.coefficients.size()) {
      fail(ErrorKind::FormatError, "temperature model degree does not match its coefficient count");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::FormatError, std::string("malformed temperature model: ") + e.what());
  }
  if (model.coefficients.empty()) fail(ErrorKind::FormatError, "temperature model has no coefficients");
  return model;
}

Json model_to_json(const TemperatureModel& model) {
  return Json{{"degree", model.degree()},
              {"coefficients", model.coefficients},
              {"clamp_min", model.clamp_min},
              {"r_squared", finite_or_null(model.r_squared)}};
}

TemperatureModel load_temperature_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return model_from_json(parse_json(std::string(bytes.begin(), bytes.end()), "temperature model " + path.string()));
}

Json report_to_json(const StepReport& report) {
  Json heads = Json::array();
  for (std::size_t h = 0; h < report.heads.size(); ++h) {
    const HeadReport& hr = report.heads[h];
    Json head{{"head", h},
              {"tau", hr.tau},
              {"delta", hr.gap.delta},
              {"content_sharpness", hr.gap.content_sharpness},
              {"concat_sharpness", hr.gap.concat_sharpness},
              {"post_sharpness", hr.post_sharpness},
              {"target_mass_mean", hr.target_mass_mean},
              {"achieved_mass_mean", hr.achieved_mass_mean},
              {"max_mass_error", hr.max_mass_error},
              {"entropy_tau1", hr.entropy_tau1},
              {"entropy_tau", hr.entropy_tau},
              {"std_sharpness_content", hr.std_sharpness_content},
              {"std_sharpness_concat", hr.std_sharpness_concat}};
    if (hr.oracle) {
      head["oracle"] = Json{{"tau", hr.oracle->tau},
                            {"achieved", hr.oracle->achieved},
                            {"residual", hr.oracle->residual},
                            {"at_boundary", hr.oracle->at_boundary}};
    }
    heads.push_back(std::move(head));
  }
  return Json{{"pi_star_requested", report.pi_star_requested},
              {"pi_star_effective", report.pi_star_effective},
              {"tau_mode", report.tau_mode},
              {"omega", report.omega},
              {"heads", std::move(heads)},
              {"checksums", report.checksums},
              {"warnings", report.warnings}};
}

Json sweep_to_json(const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back(Json{{"pi_star_requested", r.pi_star_requested},
                       {"pi_star_effective", r.pi_star_effective},
                       {"mean_style_mass", r.mean_style_mass},
                       {"expected_style_mass", r.expected_style_mass},
                       {"mean_entropy", r.mean_entropy},
                       {"clamped", r.clamped}});
  }
  return out;
}

Json dataset_to_json(const CalibrationDataset& data) {
  Json samples = Json::array();
  for (const auto& s : data.samples) samples.push_back(Json::array({s.delta, s.tau_star}));
  return Json{{"generator", data.provenance.generator},
              {"seed", data.provenance.seed},
              {"samples", data.provenance.samples},
              {"columns", {"delta", "tau_star"}},
              {"data", std::move(samples)}};
}

}  // namespace mast
