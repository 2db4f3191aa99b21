#include "mast/lama.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mast/error.hpp"
#include "mast/numerics.hpp"

namespace mast {

std::size_t LogitGroups::concat_width() const {
  std::size_t w = content.cols();
  for (const auto& s : style) w += s.cols();
  return w;
}

std::vector<std::size_t> LogitGroups::group_offsets() const {
  std::vector<std::size_t> offsets{0};
  for (const auto& s : style) offsets.push_back(offsets.back() + s.cols());
  offsets.push_back(offsets.back() + content.cols());
  return offsets;
}

void LogitGroups::validate() const {
  require_rank(content, 2, "LogitGroups content");
  if (style.empty()) fail(ErrorKind::InvalidInput, "LogitGroups needs at least one style group");
  if (key_dim == 0) fail(ErrorKind::InvalidInput, "key dimension must be >= 1");
  auto check_finite = [](const Tensor& t) {
    for (float v : t.values()) {
      if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "LogitGroups entries must be finite");
    }
  };
  check_finite(content);
  for (const auto& s : style) {
    require_rank(s, 2, "LogitGroups style");
    if (s.rows() != content.rows()) {
      fail(ErrorKind::InvalidInput, "style group has " + std::to_string(s.rows()) + " rows, content has " +
                                        std::to_string(content.rows()));
    }
    check_finite(s);
  }
}

Tensor scaled_logits(const Tensor& queries, const Tensor& keys) {
  require_rank(queries, 2, "scaled_logits");
  require_rank(keys, 2, "scaled_logits");
  if (queries.cols() != keys.cols()) {
    fail(ErrorKind::InvalidInput, "query/key dimension mismatch " + shape_string(queries.shape()) + " vs " +
                                      shape_string(keys.shape()));
  }
  const std::size_t tq = queries.rows(), tk = keys.rows(), d = queries.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Tensor out({tq, tk});
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(tq); ++qi) {
    const auto q = queries.row(static_cast<std::size_t>(qi));
    for (std::size_t k = 0; k < tk; ++k) {
      const auto key = keys.row(k);
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += static_cast<double>(q[j]) * key[j];
      out.at(static_cast<std::size_t>(qi), k) = static_cast<float>(acc * scale);
    }
  }
  return out;
}

MassTargets make_mass_targets(const MaskSet& ms, double pi_star) {
  if (!(pi_star > 0.0) || !std::isfinite(pi_star)) fail(ErrorKind::InvalidInput, "pi_star must be positive");
  MassTargets t;
  t.pi_star = std::min(pi_star, kMaxPiStar);
  const std::size_t tq = ms.tokens();
  t.style.assign(ms.n_styles(), std::vector<double>(tq));
  t.content.assign(tq, 1.0);
  for (std::size_t i = 0; i < ms.n_styles(); ++i) {
    for (std::size_t q = 0; q < tq; ++q) {
      t.style[i][q] = t.pi_star * static_cast<double>(ms.masks[i][q]);
      t.content[q] -= t.style[i][q];
    }
  }
  return t;
}

MassTargets uniform_mass_targets(std::span<const double> style_mass, std::size_t queries) {
  MassTargets t;
  t.content.assign(queries, 1.0);
  for (double m : style_mass) {
    t.style.emplace_back(queries, m);
    for (auto& c : t.content) c -= m;
  }
  t.pi_star = std::accumulate(style_mass.begin(), style_mass.end(), 0.0);
  return t;
}

PartitionLogZ partition_log_Z(const LogitGroups& groups) {
  groups.validate();
  const std::size_t tq = groups.queries();
  PartitionLogZ z;
  z.style.assign(groups.n_styles(), std::vector<double>(tq));
  z.content.resize(tq);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(tq); ++qi) {
    const auto q = static_cast<std::size_t>(qi);
    for (std::size_t i = 0; i < groups.n_styles(); ++i) {
      z.style[i][q] = rowops::scaled_logsumexp(groups.style[i].row(q), 1.0);
    }
    z.content[q] = rowops::scaled_logsumexp(groups.content.row(q), 1.0);
  }
  return z;
}

bool StyleBiases::excluded(std::size_t style, std::size_t q) const {
  return std::isinf(values.at(style).at(q));
}

namespace {

void check_targets(const LogitGroups& groups, const MassTargets& targets) {
  if (targets.style.size() != groups.n_styles()) {
    fail(ErrorKind::InvalidInput, "mass targets cover " + std::to_string(targets.style.size()) +
                                      " styles, logits have " + std::to_string(groups.n_styles()));
  }
  if (targets.content.size() != groups.queries()) {
    fail(ErrorKind::InvalidInput, "mass targets cover " + std::to_string(targets.content.size()) +
                                      " queries, logits have " + std::to_string(groups.queries()));
  }
  for (const auto& s : targets.style) {
    if (s.size() != groups.queries()) fail(ErrorKind::InvalidInput, "ragged mass targets");
  }
  for (std::size_t q = 0; q < targets.content.size(); ++q) {
    if (!(targets.content[q] > 0.0)) {
      std::ostringstream os;
      os << "InfeasibleMasks: content target mass " << targets.content[q] << " <= 0 at token " << q;
      throw InfeasibleMasksError(q, 1.0 - targets.content[q], os.str());
    }
  }
}

inline double closed_form_bias(double style_target, double content_target, double log_z_content,
                               double log_z_style) {
  if (style_target < kMassEpsilon) return rowops::kNegInf;
  return std::log(style_target / content_target) + log_z_content - log_z_style;
}

}  // namespace

StyleBiases compute_bias(const LogitGroups& groups, const MassTargets& targets) {
  check_targets(groups, targets);
  const PartitionLogZ z = partition_log_Z(groups);
  StyleBiases b;
  b.values.assign(groups.n_styles(), std::vector<double>(groups.queries()));
  for (std::size_t i = 0; i < groups.n_styles(); ++i) {
    for (std::size_t q = 0; q < groups.queries(); ++q) {
      b.values[i][q] = closed_form_bias(targets.style[i][q], targets.content[q], z.content[q], z.style[i][q]);
    }
  }
  return b;
}

double single_style_bias(std::span<const float> style_row, std::span<const float> content_row,
                         double target_style_mass) {
  if (style_row.empty() || content_row.empty()) fail(ErrorKind::InvalidInput, "empty logit row");
  const double content_target = 1.0 - target_style_mass;
  if (!(content_target > 0.0)) fail(ErrorKind::InfeasibleMasks, "content target mass must be positive");
  return closed_form_bias(target_style_mass, content_target, rowops::scaled_logsumexp(content_row, 1.0),
                          rowops::scaled_logsumexp(style_row, 1.0));
}

Tensor apply_lama(const LogitGroups& groups, const MassTargets& targets) {
  const StyleBiases biases = compute_bias(groups, targets);
  const auto offsets = groups.group_offsets();
  const std::size_t tq = groups.queries(), n = groups.n_styles();
  Tensor out({tq, groups.concat_width()});
  const float neg_inf = -std::numeric_limits<float>::infinity();

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(tq); ++qi) {
    const auto q = static_cast<std::size_t>(qi);
    auto dst = out.row(q);
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = groups.style[i].row(q);
      const double b = biases.values[i][q];
      float* group = dst.data() + offsets[i];
      if (std::isinf(b)) {
        std::fill(group, group + src.size(), neg_inf);
      } else {
        for (std::size_t j = 0; j < src.size(); ++j) group[j] = static_cast<float>(src[j] + b);
      }
    }
    const auto content = groups.content.row(q);
    std::copy(content.begin(), content.end(), dst.data() + offsets[n]);
  }
  return out;
}

Tensor attention_weights(const Tensor& logits, double temperature) {
  require_rank(logits, 2, "attention_weights");
  if (!(temperature > 0.0)) fail(ErrorKind::InvalidInput, "temperature must be positive");
  Tensor out(logits.shape());
#pragma omp parallel
  {
    std::vector<double> p(logits.cols());
#pragma omp for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(logits.rows()); ++qi) {
      const auto q = static_cast<std::size_t>(qi);
      rowops::scaled_softmax(logits.row(q), temperature, std::span<double>(p));
      auto dst = out.row(q);
      for (std::size_t j = 0; j < p.size(); ++j) dst[j] = static_cast<float>(p[j]);
    }
  }
  return out;
}

Tensor attention_output(const Tensor& logits, const Tensor& values, double temperature) {
  require_rank(logits, 2, "attention_output");
  require_rank(values, 2, "attention_output");
  if (logits.cols() != values.rows()) {
    fail(ErrorKind::InvalidInput, "attention_output: logits " + shape_string(logits.shape()) +
                                      " do not match values " + shape_string(values.shape()));
  }
  if (!(temperature > 0.0)) fail(ErrorKind::InvalidInput, "temperature must be positive");
  const std::size_t tq = logits.rows(), tk = logits.cols(), dv = values.cols();
  Tensor out({tq, dv});
#pragma omp parallel
  {
    std::vector<double> p(tk), acc(dv);
#pragma omp for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(tq); ++qi) {
      const auto q = static_cast<std::size_t>(qi);
      rowops::scaled_softmax(logits.row(q), temperature, std::span<double>(p));
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t k = 0; k < tk; ++k) {
        if (p[k] == 0.0) continue;
        const auto v = values.row(k);
        for (std::size_t j = 0; j < dv; ++j) acc[j] += p[k] * v[j];
      }
      auto dst = out.row(q);
      for (std::size_t j = 0; j < dv; ++j) dst[j] = static_cast<float>(acc[j]);
    }
  }
  return out;
}

Tensor concat_values(const std::vector<Tensor>& style_values, const Tensor& content_values) {
  require_rank(content_values, 2, "concat_values");
  std::size_t rows = content_values.rows();
  for (const auto& v : style_values) {
    require_rank(v, 2, "concat_values");
    if (v.cols() != content_values.cols()) fail(ErrorKind::InvalidInput, "value dimension mismatch");
    rows += v.rows();
  }
  std::vector<float> data;
  data.reserve(rows * content_values.cols());
  for (const auto& v : style_values) data.insert(data.end(), v.values().begin(), v.values().end());
  data.insert(data.end(), content_values.values().begin(), content_values.values().end());
  return Tensor({rows, content_values.cols()}, std::move(data));
}

std::vector<std::vector<double>> group_masses(const Tensor& logits, std::span<const std::size_t> offsets,
                                              double temperature) {
  require_rank(logits, 2, "group_masses");
  if (offsets.size() < 2 || offsets.back() != logits.cols()) {
    fail(ErrorKind::InvalidInput, "group offsets do not cover the logit columns");
  }
  const std::size_t groups = offsets.size() - 1, tq = logits.rows();
  std::vector<std::vector<double>> masses(groups, std::vector<double>(tq));
#pragma omp parallel
  {
    std::vector<double> p(logits.cols());
#pragma omp for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(tq); ++qi) {
      const auto q = static_cast<std::size_t>(qi);
      rowops::scaled_softmax(logits.row(q), temperature, std::span<double>(p));
      for (std::size_t g = 0; g < groups; ++g) {
        double s = 0.0;
        for (std::size_t j = offsets[g]; j < offsets[g + 1]; ++j) s += p[j];
        masses[g][q] = s;
      }
    }
  }
  return masses;
}

}  // namespace mast
