#include "mast/numerics.hpp"

#include <algorithm>

#include "mast/error.hpp"

namespace mast {
namespace {

template <typename T>
void check_row(std::span<const T> v, double temperature) {
  if (v.empty()) fail(ErrorKind::InvalidInput, "empty vector");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    fail(ErrorKind::InvalidInput, "temperature must be positive and finite");
  }
  for (T x : v) {
    if (!std::isfinite(static_cast<double>(x))) fail(ErrorKind::InvalidInput, "non-finite entry");
  }
}

template <typename T>
std::vector<double> softmax_impl(std::span<const T> v, double temperature) {
  check_row(v, temperature);
  std::vector<double> out(v.size());
  rowops::scaled_softmax(v, temperature, std::span<double>(out));
  return out;
}

}  // namespace

double logsumexp(std::span<const double> v) {
  check_row(v, 1.0);
  return rowops::scaled_logsumexp(v, 1.0);
}

double logsumexp(std::span<const float> v) {
  check_row(v, 1.0);
  return rowops::scaled_logsumexp(v, 1.0);
}

std::vector<double> softmax(std::span<const double> v, double temperature) {
  return softmax_impl(v, temperature);
}

std::vector<double> softmax(std::span<const float> v, double temperature) {
  return softmax_impl(v, temperature);
}

double log_p_max(std::span<const double> v, double temperature) {
  check_row(v, temperature);
  return std::min(0.0, rowops::scaled_log_p_max(v, temperature));
}

double log_p_max(std::span<const float> v, double temperature) {
  check_row(v, temperature);
  return std::min(0.0, rowops::scaled_log_p_max(v, temperature));
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "cosine_similarity");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) fail(ErrorKind::DegenerateInput, "cosine similarity of a zero-norm tensor");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

ChannelStats channel_stats(const Tensor& x) {
  require_rank(x, 3, "channel_stats");
  const std::size_t channels = x.extent(0);
  const double n = static_cast<double>(x.extent(1) * x.extent(2));
  ChannelStats stats{std::vector<double>(channels), std::vector<double>(channels)};
  for (std::size_t c = 0; c < channels; ++c) {
    const auto plane = x.plane(c);
    double sum = 0.0;
    for (float v : plane) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (float v : plane) ss += (v - mean) * (v - mean);
    stats.mean[c] = mean;
    stats.std[c] = std::sqrt(ss / n);
  }
  return stats;
}

}  // namespace mast
