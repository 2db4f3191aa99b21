#include "mast/sts.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "mast/error.hpp"
#include "mast/numerics.hpp"

namespace mast {
namespace {

/// mean_q log p_max(tau * l_q) as a function of tau. Row maxima are cached:
/// log p_max(tau * l) = -log sum_j exp(tau * (l_j - max l)) for tau > 0.
class SharpnessCurve {
 public:
  explicit SharpnessCurve(const Tensor& logits) : logits_(logits), row_max_(logits.rows()) {
    require_rank(logits, 2, "sharpness");
    for (std::size_t q = 0; q < logits.rows(); ++q) {
      row_max_[q] = rowops::max_value(logits.row(q));
      if (!std::isfinite(row_max_[q])) fail(ErrorKind::InvalidInput, "logit row without finite entries");
    }
  }

  double operator()(double tau) const {
    const auto rows = static_cast<std::ptrdiff_t>(logits_.rows());
    std::vector<double> per_row(logits_.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < rows; ++qi) {
      const auto q = static_cast<std::size_t>(qi);
      const double m = row_max_[q];
      double s = 0.0;
      for (float v : logits_.row(q)) s += std::exp(tau * (static_cast<double>(v) - m));
      per_row[q] = -std::log(s);
    }
    double total = 0.0;
    for (double v : per_row) total += v;
    return total / static_cast<double>(per_row.size());
  }

  bool degenerate() const {
    for (std::size_t q = 0; q < logits_.rows(); ++q) {
      const double m = row_max_[q];
      for (float v : logits_.row(q)) {
        if (std::isfinite(v) && static_cast<double>(v) != m) return false;
      }
    }
    return true;
  }

 private:
  const Tensor& logits_;
  std::vector<double> row_max_;
};

TemperatureSolution make_solution(double tau, double achieved, double target, bool boundary) {
  return {tau, achieved, std::abs(achieved - target), boundary};
}

}  // namespace

double mean_log_p_max(const Tensor& logits, double temperature) {
  if (!(temperature > 0.0)) fail(ErrorKind::InvalidInput, "temperature must be positive");
  return SharpnessCurve(logits)(temperature);
}

SharpnessGap sharpness_gap(const LogitGroups& groups, const Tensor& biased_concat) {
  require_rank(groups.content, 2, "sharpness_gap content");
  if (biased_concat.rank() != 2 || biased_concat.rows() != groups.queries()) {
    fail(ErrorKind::InvalidInput, "biased concat logits do not match the logit groups");
  }
  SharpnessGap g;
  g.content_sharpness = mean_log_p_max(groups.content);
  g.concat_sharpness = mean_log_p_max(biased_concat);
  g.delta = g.content_sharpness - g.concat_sharpness;
  return g;
}

TemperatureSolution solve_temperature(const Tensor& concat_logits, double target_sharpness,
                                      const TemperatureGrid& grid) {
  if (!(target_sharpness <= 0.0)) fail(ErrorKind::InvalidInput, "target sharpness must be <= 0");
  if (!(grid.lo > 0.0 && grid.hi > grid.lo && grid.step > 0.0)) fail(ErrorKind::InvalidInput, "bad temperature grid");
  const SharpnessCurve curve(concat_logits);
  if (curve.degenerate()) {
    fail(ErrorKind::DegenerateLogits, "every logit row is constant; sharpness does not depend on temperature");
  }

  const auto n = static_cast<std::size_t>(std::llround((grid.hi - grid.lo) / grid.step));
  auto tau_at = [&](std::size_t k) { return grid.lo + static_cast<double>(k) * grid.step; };

  const double f_lo = curve(tau_at(0));
  if (target_sharpness <= f_lo) return make_solution(tau_at(0), f_lo, target_sharpness, target_sharpness < f_lo);
  const double f_hi = curve(tau_at(n));
  if (target_sharpness >= f_hi) return make_solution(tau_at(n), f_hi, target_sharpness, target_sharpness > f_hi);

  // Largest k with f(tau_k) <= target; f is non-decreasing in tau.
  std::size_t lo = 0, hi = n;
  double f_left = f_lo, f_right = f_hi;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const double f = curve(tau_at(mid));
    if (f <= target_sharpness) {
      lo = mid;
      f_left = f;
    } else {
      hi = mid;
      f_right = f;
    }
  }

  double a = tau_at(lo), b = tau_at(hi);
  TemperatureSolution best = make_solution(a, f_left, target_sharpness, false);
  if (std::abs(f_right - target_sharpness) < best.residual) best = make_solution(b, f_right, target_sharpness, false);
  while (b - a > grid.refine_tolerance) {
    const double mid = 0.5 * (a + b);
    const double f = curve(mid);
    if (std::abs(f - target_sharpness) < best.residual) best = make_solution(mid, f, target_sharpness, false);
    if (f <= target_sharpness) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return best;
}

double TemperatureModel::raw(double delta) const {
  double acc = 0.0;
  for (double c : coefficients) acc = acc * delta + c;
  return acc;
}

TemperatureModel TemperatureModel::paper_default() {
  TemperatureModel m;
  m.coefficients = {0.08395, 0.43705, 1.00998};
  m.clamp_min = 1.0;
  m.r_squared = 0.932;
  return m;
}

double predict_temperature(const TemperatureModel& model, double delta) {
  if (!std::isfinite(delta)) fail(ErrorKind::InvalidInput, "sharpness gap must be finite");
  return std::max(model.raw(delta), model.clamp_min);
}

Tensor apply_sts(const Tensor& biased_concat, double tau, double min_tau) {
  if (!(tau >= min_tau) || !std::isfinite(tau)) {
    fail(ErrorKind::InvalidInput, "temperature " + std::to_string(tau) + " below the clamp " + std::to_string(min_tau));
  }
  return attention_weights(biased_concat, tau);
}

double r_squared(const TemperatureModel& model, const std::vector<CalibrationSample>& samples) {
  if (samples.empty()) fail(ErrorKind::InvalidInput, "no samples");
  double mean = 0.0;
  for (const auto& s : samples) mean += s.tau_star;
  mean /= static_cast<double>(samples.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& s : samples) {
    const double r = s.tau_star - model.raw(s.delta);
    ss_res += r * r;
    ss_tot += (s.tau_star - mean) * (s.tau_star - mean);
  }
  if (ss_tot == 0.0) return 1.0;
  return 1.0 - ss_res / ss_tot;
}

PolynomialFit fit_temperature_model(const CalibrationDataset& data, int degree) {
  if (degree < 1 || degree > 4) fail(ErrorKind::InvalidInput, "polynomial degree must be 1..4");
  const auto& samples = data.samples;
  std::set<double> distinct;
  for (const auto& s : samples) {
    if (!std::isfinite(s.delta) || !std::isfinite(s.tau_star)) fail(ErrorKind::InvalidInput, "non-finite sample");
    distinct.insert(s.delta);
  }
  const auto cols = static_cast<Eigen::Index>(degree + 1);
  if (distinct.size() < static_cast<std::size_t>(cols)) {
    fail(ErrorKind::SingularFit, "need at least " + std::to_string(cols) + " distinct delta values, got " +
                                     std::to_string(distinct.size()));
  }

  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    double p = 1.0;
    for (Eigen::Index j = cols - 1; j >= 0; --j) {
      design(i, j) = p;
      p *= s.delta;
    }
    target(i) = s.tau_star;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) fail(ErrorKind::SingularFit, "rank-deficient polynomial design");
  const Eigen::VectorXd coef = qr.solve(target);

  PolynomialFit fit;
  fit.model.coefficients.assign(coef.data(), coef.data() + coef.size());
  fit.model.clamp_min = 1.0;
  fit.constant_targets = target.minCoeff() == target.maxCoeff();
  if (fit.constant_targets) {
    // SS_tot is zero; the mean above can still differ from the targets by an ulp
    std::fill(fit.model.coefficients.begin(), fit.model.coefficients.end(), 0.0);
    fit.model.coefficients.back() = target(0);
    fit.r_squared = 1.0;
  } else {
    fit.r_squared = r_squared(fit.model, samples);
  }
  fit.model.r_squared = fit.r_squared;
  return fit;
}

double mean_row_std(const Tensor& logits) {
  require_rank(logits, 2, "mean_row_std");
  double total = 0.0;
  for (std::size_t q = 0; q < logits.rows(); ++q) {
    double s = 0.0, ss = 0.0;
    std::size_t n = 0;
    for (float v : logits.row(q)) {
      if (!std::isfinite(v)) continue;
      s += v;
      ++n;
    }
    const double mean = s / static_cast<double>(n);
    for (float v : logits.row(q)) {
      if (std::isfinite(v)) ss += (v - mean) * (v - mean);
    }
    total += std::sqrt(ss / static_cast<double>(n));
  }
  return total / static_cast<double>(logits.rows());
}

double mean_row_entropy(const Tensor& logits, double temperature) {
  require_rank(logits, 2, "mean_row_entropy");
  std::vector<double> per_row(logits.rows());
#pragma omp parallel
  {
    std::vector<double> p(logits.cols());
#pragma omp for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(logits.rows()); ++qi) {
      const auto q = static_cast<std::size_t>(qi);
      rowops::scaled_softmax(logits.row(q), temperature, std::span<double>(p));
      per_row[q] = rowops::entropy(p);
    }
  }
  double total = 0.0;
  for (double h : per_row) total += h;
  return total / static_cast<double>(per_row.size());
}

}  // namespace mast
