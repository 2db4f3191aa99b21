#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mast/lama.hpp"
#include "mast/tensor.hpp"

namespace mast {

/// Mean per-row log p_max of softmax(tau * logits). Rows may contain -inf
/// (excluded keys) but must keep at least one finite entry.
double mean_log_p_max(const Tensor& logits, double temperature = 1.0);

struct SharpnessGap {
  double delta = 0.0;              // content_sharpness - concat_sharpness
  double content_sharpness = 0.0;  // mean log p_max over content rows
  double concat_sharpness = 0.0;   // mean log p_max over biased concat rows
};

SharpnessGap sharpness_gap(const LogitGroups& groups, const Tensor& biased_concat);

struct TemperatureGrid {
  double lo = 0.5;
  double hi = 8.0;
  double step = 0.01;
  double refine_tolerance = 1e-4;
};

struct TemperatureSolution {
  double tau = 1.0;
  double achieved = 0.0;  // mean log p_max at tau
  double residual = 0.0;  // |achieved - target|
  bool at_boundary = false;
};

/// Temperature on the grid whose mean log p_max is closest to `target`,
/// refined by bisection between the bracketing grid points. Targets outside
/// the reachable range return the nearest grid end with at_boundary set.
TemperatureSolution solve_temperature(const Tensor& concat_logits, double target_sharpness,
                                      const TemperatureGrid& grid = {});

/// tau = poly(delta), clamped from below.
struct TemperatureModel {
  std::vector<double> coefficients;  // highest degree first
  double clamp_min = 1.0;
  double r_squared = 1.0;

  std::size_t degree() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }
  double raw(double delta) const;

  /// Quadratic fitted on Stable Diffusion attention logits.
  static TemperatureModel paper_default();
};

double predict_temperature(const TemperatureModel& model, double delta);

/// Row-wise softmax(tau * biased_concat). tau must be >= min_tau.
Tensor apply_sts(const Tensor& biased_concat, double tau, double min_tau = 1.0);

struct CalibrationSample {
  double delta = 0.0;
  double tau_star = 0.0;
};

struct CalibrationProvenance {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::string generator;
};

struct CalibrationDataset {
  std::vector<CalibrationSample> samples;
  CalibrationProvenance provenance;
};

struct PolynomialFit {
  TemperatureModel model;
  double r_squared = 1.0;
  /// True when the targets have zero variance and R^2 is reported as 1.
  bool constant_targets = false;
};

/// Ordinary least squares fit of tau_star on delta, degree 1..4.
PolynomialFit fit_temperature_model(const CalibrationDataset& data, int degree);

/// R^2 of a model (without clamping) on a dataset.
double r_squared(const TemperatureModel& model, const std::vector<CalibrationSample>& samples);

/// Sharpness from the row standard deviation of the logits. Diagnostic only:
/// it tracks support size rather than peak dominance and is never used to
/// choose a temperature.
double mean_row_std(const Tensor& logits);

/// Mean Shannon entropy (nats) of the rows of softmax(tau * logits).
double mean_row_entropy(const Tensor& logits, double temperature = 1.0);

}  // namespace mast
