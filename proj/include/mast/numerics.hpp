#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mast/tensor.hpp"

namespace mast {

// Public primitives validate their input (finite entries, positive
// temperature). The rowops:: helpers below are the unchecked forms used inside
// kernels, where -inf marks a key column excluded from attention.

double logsumexp(std::span<const double> v);
double logsumexp(std::span<const float> v);

/// softmax(temperature * v), evaluated in double.
std::vector<double> softmax(std::span<const double> v, double temperature = 1.0);
std::vector<double> softmax(std::span<const float> v, double temperature = 1.0);

/// log of the largest softmax probability of temperature * v.
double log_p_max(std::span<const double> v, double temperature = 1.0);
double log_p_max(std::span<const float> v, double temperature = 1.0);

/// Cosine similarity over the flattened tensors. Throws DegenerateInput when
/// either operand has zero norm.
double cosine_similarity(const Tensor& a, const Tensor& b);

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation
};

ChannelStats channel_stats(const Tensor& x);

namespace rowops {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <typename T>
double max_value(std::span<const T> row) {
  double m = kNegInf;
  for (T x : row) m = std::max(m, static_cast<double>(x));
  return m;
}

/// log sum exp(tau * row); entries equal to -inf contribute nothing.
template <typename T>
double scaled_logsumexp(std::span<const T> row, double tau) {
  const double m = tau * max_value(row);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (T x : row) s += std::exp(tau * static_cast<double>(x) - m);
  return m + std::log(s);
}

template <typename T>
double scaled_log_p_max(std::span<const T> row, double tau) {
  return tau * max_value(row) - scaled_logsumexp(row, tau);
}

/// Writes softmax(tau * row) into out (same length).
template <typename T>
void scaled_softmax(std::span<const T> row, double tau, std::span<double> out) {
  const double m = tau * max_value(row);
  double s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = std::exp(tau * static_cast<double>(row[j]) - m);
    s += out[j];
  }
  const double inv = 1.0 / s;
  for (auto& p : out) p *= inv;
}

/// Shannon entropy in nats; zero probabilities contribute nothing.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace rowops
}  // namespace mast
