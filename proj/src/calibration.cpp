#include "mast/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "mast/error.hpp"
#include "mast/parallel.hpp"
#include "mast/rng.hpp"

namespace mast {

std::pair<LogitGroups, MassTargets> calibration_fixture(const CalibrationConfig& cfg, std::size_t index) {
  if (cfg.token_counts.empty() || cfg.max_styles == 0 || cfg.queries == 0) {
    fail(ErrorKind::InvalidInput, "calibration config needs token counts, styles and queries");
  }
  const CounterRng rng = CounterRng(cfg.seed, 0xCA11B).substream(index);
  const std::size_t tokens = cfg.token_counts[rng.below(0, cfg.token_counts.size())];
  const std::size_t n_styles = 1 + rng.below(1, cfg.max_styles);
  const double kappa = rng.uniform(2, static_cast<float>(cfg.kappa_lo), static_cast<float>(cfg.kappa_hi));
  const double coverage = rng.uniform(3, static_cast<float>(cfg.coverage_lo), static_cast<float>(cfg.coverage_hi));
  const double sigma_c = kappa * 3.2 * (2.0 * std::log(static_cast<double>(tokens)) / 10.0);

  // Split the coverage by the spacings of sorted uniforms (flat Dirichlet).
  std::vector<double> cuts{0.0, 1.0};
  for (std::size_t i = 1; i < n_styles; ++i) cuts.push_back(rng.uniform(10 + i));
  std::sort(cuts.begin(), cuts.end());

  LogitGroups groups;
  groups.key_dim = 1;
  groups.content = random_normal(rng.substream(100), {cfg.queries, tokens}, static_cast<float>(sigma_c));
  std::vector<double> style_mass;
  for (std::size_t i = 0; i < n_styles; ++i) {
    const double rho = rng.uniform(20 + i, static_cast<float>(cfg.rho_lo), static_cast<float>(cfg.rho_hi));
    groups.style.push_back(random_normal(rng.substream(200 + i), {cfg.queries, tokens}, static_cast<float>(rho * sigma_c)));
    style_mass.push_back(coverage * (cuts[i + 1] - cuts[i]));
  }
  return {std::move(groups), uniform_mass_targets(style_mass, cfg.queries)};
}

CalibrationSample calibration_sample(const CalibrationConfig& cfg, std::size_t index) {
  const auto [groups, targets] = calibration_fixture(cfg, index);
  const Tensor biased = apply_lama(groups, targets);
  const SharpnessGap gap = sharpness_gap(groups, biased);
  const TemperatureSolution sol = solve_temperature(biased, gap.content_sharpness, cfg.grid);
  return {gap.delta, sol.tau};
}

CalibrationDataset generate_calibration_dataset(const CalibrationConfig& cfg) {
  CalibrationDataset data;
  data.provenance = {cfg.seed, cfg.samples, "synthetic-gaussian-logits-v1"};
  data.samples.resize(cfg.samples);
  parallel_for(cfg.samples, [&](std::size_t i) { data.samples[i] = calibration_sample(cfg, i); });
  return data;
}

std::pair<CalibrationDataset, CalibrationDataset> split_holdout(const CalibrationDataset& data) {
  CalibrationDataset train, holdout;
  train.provenance = holdout.provenance = data.provenance;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    (i % 10 == 9 ? holdout : train).samples.push_back(data.samples[i]);
  }
  return {std::move(train), std::move(holdout)};
}

}  // namespace mast
