#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mast/masks.hpp"
#include "mast/tensor.hpp"

namespace mast {

inline constexpr double kDefaultPiStar = 0.9;
// pi_star is clamped here so the content group always keeps a positive
// target mass inside full-coverage regions.
inline constexpr double kMaxPiStar = 1.0 - 1e-4;
// Style targets below this are treated as zero: the style group is excluded
// from the query row instead of receiving a log(0) bias.
inline constexpr double kMassEpsilon = 1e-8;

/// Per-query logits split into N style groups followed by one content group.
struct LogitGroups {
  std::vector<Tensor> style;  // N tensors, T_q x T_s_i
  Tensor content;             // T_q x T_c
  std::size_t key_dim = 1;    // d used for the 1/sqrt(d) scale

  std::size_t n_styles() const { return style.size(); }
  std::size_t queries() const { return content.rows(); }
  std::size_t concat_width() const;
  /// Column offset of each group in the concatenated layout, N + 2 entries.
  std::vector<std::size_t> group_offsets() const;

  void validate() const;
};

/// queries x keys^T / sqrt(d), with d the shared column count.
Tensor scaled_logits(const Tensor& queries, const Tensor& keys);

struct MassTargets {
  std::vector<std::vector<double>> style;  // N x T_q
  std::vector<double> content;             // T_q
  double pi_star = kDefaultPiStar;         // effective value after clamping

  std::size_t queries() const { return content.size(); }
};

/// pi_cs^(i)(q) = pi_star * M_i(q), pi_c(q) = 1 - sum_i pi_cs^(i)(q), with
/// pi_star clamped to kMaxPiStar. Masks are read in row-major token order.
MassTargets make_mass_targets(const MaskSet& ms, double pi_star);

/// Uniform-mask targets, mostly for tests: every query gets style masses
/// `style_mass[i]`.
MassTargets uniform_mass_targets(std::span<const double> style_mass, std::size_t queries);

struct PartitionLogZ {
  std::vector<std::vector<double>> style;  // N x T_q
  std::vector<double> content;             // T_q
};

PartitionLogZ partition_log_Z(const LogitGroups& groups);

/// Closed-form group biases, N x T_q. Entries are -inf where the style
/// target falls below kMassEpsilon (group excluded for that query).
struct StyleBiases {
  std::vector<std::vector<double>> values;

  bool excluded(std::size_t style, std::size_t q) const;
};

StyleBiases compute_bias(const LogitGroups& groups, const MassTargets& targets);

/// Single-style form: bias that gives the style row `target_style_mass` of
/// the softmax mass when concatenated with the content row.
double single_style_bias(std::span<const float> style_row, std::span<const float> content_row,
                         double target_style_mass);

/// [l_cs^(1) + b^(1), ..., l_cs^(N) + b^(N), l_c] per row; excluded groups
/// are written as -inf. Rows are processed in parallel.
Tensor apply_lama(const LogitGroups& groups, const MassTargets& targets);

/// softmax(tau * logits) @ values. -inf logits receive zero weight.
Tensor attention_output(const Tensor& logits, const Tensor& values, double temperature = 1.0);

/// Row-wise softmax(tau * logits), in parallel.
Tensor attention_weights(const Tensor& logits, double temperature = 1.0);

/// Stacks value matrices row-wise in group order.
Tensor concat_values(const std::vector<Tensor>& style_values, const Tensor& content_values);

/// Softmax mass of each group per query, (N + 1) x T_q with the content
/// group last. Computed in double from the stored logits.
std::vector<std::vector<double>> group_masses(const Tensor& logits, std::span<const std::size_t> offsets,
                                              double temperature = 1.0);

}  // namespace mast
