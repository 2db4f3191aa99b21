#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "mast/calibration.hpp"
#include "mast/pipeline.hpp"
#include "mast/sts.hpp"

namespace mast {

using Json = nlohmann::ordered_json;

/// Keys: lambda, pi_star, r, epsilon_hp, mask_sigma, tau_mode, seed,
/// token_grid [h, w], d, d_v, n_heads, n_styles, feature_channels,
/// latent_channels, mask_layout. Missing keys keep their defaults; unknown
/// keys are rejected.
PipelineConfig config_from_json(const Json& j);
Json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

/// {"degree", "coefficients" (highest degree first), "clamp_min", "r_squared"};
/// other keys are ignored on read.
TemperatureModel model_from_json(const Json& j);
Json model_to_json(const TemperatureModel& model);
TemperatureModel load_temperature_model(const std::filesystem::path& path);

Json report_to_json(const StepReport& report);
Json sweep_to_json(const std::vector<SweepRow>& rows);
Json dataset_to_json(const CalibrationDataset& data);

/// Parses JSON text; syntax errors become FormatError.
Json parse_json(const std::string& text, const std::string& what);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace mast
