#include "mast/reference.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "mast/error.hpp"
#include "mast/fft.hpp"

namespace mast::reference {
namespace {

double log_sum_exp_row(std::span<const float> row, double tau) {
  double m = -std::numeric_limits<double>::infinity();
  for (float v : row) m = std::max(m, tau * v);
  double s = 0.0;
  for (float v : row) s += std::exp(tau * v - m);
  return m + std::log(s);
}

}  // namespace

Tensor apply_lama(const LogitGroups& groups, const MassTargets& targets) {
  groups.validate();
  const std::size_t tq = groups.queries();
  Tensor out({tq, groups.concat_width()});
  for (std::size_t q = 0; q < tq; ++q) {
    if (!(targets.content.at(q) > 0.0)) fail(ErrorKind::InfeasibleMasks, "content target mass must be positive");
    const double log_zc = log_sum_exp_row(groups.content.row(q), 1.0);
    std::size_t col = 0;
    for (std::size_t i = 0; i < groups.n_styles(); ++i) {
      const auto row = groups.style[i].row(q);
      const double target = targets.style.at(i).at(q);
      if (target < kMassEpsilon) {
        for (std::size_t j = 0; j < row.size(); ++j) out.at(q, col++) = -std::numeric_limits<float>::infinity();
        continue;
      }
      const double b = std::log(target / targets.content[q]) + log_zc - log_sum_exp_row(row, 1.0);
      for (float v : row) out.at(q, col++) = static_cast<float>(v + b);
    }
    for (float v : groups.content.row(q)) out.at(q, col++) = v;
  }
  return out;
}

Tensor attention_output(const Tensor& logits, const Tensor& values, double temperature) {
  require_rank(logits, 2, "attention_output");
  require_rank(values, 2, "attention_output");
  if (logits.cols() != values.rows()) fail(ErrorKind::InvalidInput, "attention_output: shape mismatch");
  Tensor out({logits.rows(), values.cols()});
  for (std::size_t q = 0; q < logits.rows(); ++q) {
    const double lse = log_sum_exp_row(logits.row(q), temperature);
    for (std::size_t j = 0; j < values.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < logits.cols(); ++k) {
        acc += std::exp(temperature * logits.at(q, k) - lse) * values.at(k, j);
      }
      out.at(q, j) = static_cast<float>(acc);
    }
  }
  return out;
}

double mean_log_p_max(const Tensor& logits, double temperature) {
  require_rank(logits, 2, "mean_log_p_max");
  double total = 0.0;
  for (std::size_t q = 0; q < logits.rows(); ++q) {
    double m = -std::numeric_limits<double>::infinity();
    for (float v : logits.row(q)) m = std::max(m, static_cast<double>(v));
    total += temperature * m - log_sum_exp_row(logits.row(q), temperature);
  }
  return total / static_cast<double>(logits.rows());
}

TemperatureSolution solve_temperature(const Tensor& concat_logits, double target_sharpness,
                                      const TemperatureGrid& grid) {
  const auto n = static_cast<std::size_t>(std::llround((grid.hi - grid.lo) / grid.step));
  std::vector<double> f(n + 1);
  for (std::size_t k = 0; k <= n; ++k) f[k] = reference::mean_log_p_max(concat_logits, grid.lo + grid.step * static_cast<double>(k));
  if (f.front() == f.back()) fail(ErrorKind::DegenerateLogits, "sharpness does not depend on temperature");

  std::size_t best = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (std::abs(f[k] - target_sharpness) < std::abs(f[best] - target_sharpness)) best = k;
  }
  const auto tau_at = [&](std::size_t k) { return grid.lo + grid.step * static_cast<double>(k); };
  if (target_sharpness < f.front() || target_sharpness > f.back()) {
    return {tau_at(best), f[best], std::abs(f[best] - target_sharpness), true};
  }
  // Bracket the crossing around the best grid point and bisect.
  std::size_t k0 = best, k1 = best;
  if (f[best] <= target_sharpness) {
    k1 = std::min(best + 1, n);
  } else {
    k0 = best - 1;
  }
  double a = tau_at(k0), b = tau_at(k1);
  TemperatureSolution sol{tau_at(best), f[best], std::abs(f[best] - target_sharpness), false};
  while (b - a > grid.refine_tolerance) {
    const double mid = 0.5 * (a + b);
    const double fm = reference::mean_log_p_max(concat_logits, mid);
    if (std::abs(fm - target_sharpness) < sol.residual) sol = {mid, fm, std::abs(fm - target_sharpness), false};
    (fm <= target_sharpness ? a : b) = mid;
  }
  return sol;
}

Tensor extract_high_freq(const Tensor& phi_c, const HighPassSpec& spec) {
  require_rank(phi_c, 3, "extract_high_freq");
  spec.validate();
  const std::size_t channels = phi_c.extent(0), h = phi_c.extent(1), w = phi_c.extent(2);
  using cd = std::complex<double>;
  auto twiddle = [](std::size_t k, std::size_t n, std::size_t n_total, double sign) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * n) % n_total) /
                         static_cast<double>(n_total);
    return cd(std::cos(angle), std::sin(angle));
  };

  Tensor out(phi_c.shape());
  std::vector<cd> rows_dft(h * w), spec2d(h * w), back(h * w);
  for (std::size_t c = 0; c < channels; ++c) {
    // forward: along x then along y
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t u = 0; u < w; ++u) {
        cd acc = 0.0;
        for (std::size_t x = 0; x < w; ++x) acc += static_cast<double>(phi_c.at(c, y, x)) * twiddle(u, x, w, -1.0);
        rows_dft[y * w + u] = acc;
      }
    for (std::size_t v = 0; v < h; ++v)
      for (std::size_t u = 0; u < w; ++u) {
        cd acc = 0.0;
        for (std::size_t y = 0; y < h; ++y) acc += rows_dft[y * w + u] * twiddle(v, y, h, -1.0);
        const double d = std::hypot(signed_frequency(v, h), signed_frequency(u, w));
        spec2d[v * w + u] = acc * highpass_value(d, spec);
      }
    // inverse
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t u = 0; u < w; ++u) {
        cd acc = 0.0;
        for (std::size_t v = 0; v < h; ++v) acc += spec2d[v * w + u] * twiddle(v, y, h, 1.0);
        back[y * w + u] = acc;
      }
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        cd acc = 0.0;
        for (std::size_t u = 0; u < w; ++u) acc += back[y * w + u] * twiddle(u, x, w, 1.0);
        out.at(c, y, x) = static_cast<float>(acc.real() / static_cast<double>(h * w));
      }
  }
  return out;
}

CalibrationDataset generate_calibration_dataset(const CalibrationConfig& cfg) {
  CalibrationDataset data;
  data.provenance = {cfg.seed, cfg.samples, "synthetic-gaussian-logits-v1"};
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const auto [groups, targets] = calibration_fixture(cfg, i);
    const Tensor biased = reference::apply_lama(groups, targets);
    const double target = reference::mean_log_p_max(groups.content);
    const double delta = target - reference::mean_log_p_max(biased);
    data.samples.push_back({delta, reference::solve_temperature(biased, target, cfg.grid).tau});
  }
  return data;
}

}  // namespace mast::reference
