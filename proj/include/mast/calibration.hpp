#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mast/lama.hpp"
#include "mast/sts.hpp"

namespace mast {

/// Synthetic attention-logit distribution used to build (delta, tau*) pairs.
/// Each sample is one attention unit (head/layer/timestep):
///   - token count T drawn from `token_counts`, shared by the content and
///     every style group;
///   - content logits ~ sigma_c * normal with sigma_c = kappa * 3.2 * (2 ln T / 10),
///     kappa ~ U[kappa_lo, kappa_hi];
///   - 1..max_styles style groups with logits ~ rho_i * sigma_c * normal,
///     rho_i ~ U[rho_lo, rho_hi] (style keys correlate less with the query);
///   - total style coverage ~ U[coverage_lo, coverage_hi], split across
///     styles by uniform spacings and applied through the LAMA closed form.
/// tau* is the solve_temperature answer for the content sharpness target.
struct CalibrationConfig {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::size_t queries = 32;
  std::vector<std::size_t> token_counts{128, 192, 256};
  std::size_t max_styles = 3;
  double kappa_lo = 0.75, kappa_hi = 0.95;
  double rho_lo = 0.5, rho_hi = 0.7;
  double coverage_lo = 0.1, coverage_hi = 0.97;
  TemperatureGrid grid{};
};

/// Logit groups and LAMA targets for calibration sample `index`.
std::pair<LogitGroups, MassTargets> calibration_fixture(const CalibrationConfig& cfg, std::size_t index);

CalibrationSample calibration_sample(const CalibrationConfig& cfg, std::size_t index);

/// All samples, computed in parallel. Each sample depends only on
/// (seed, index), so the result does not depend on the thread count.
CalibrationDataset generate_calibration_dataset(const CalibrationConfig& cfg);

/// Deterministic split: every tenth sample (index % 10 == 9) is held out.
std::pair<CalibrationDataset, CalibrationDataset> split_holdout(const CalibrationDataset& data);

}  // namespace mast
