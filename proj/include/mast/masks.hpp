#pragma once

#include <filesystem>
#include <vector>

#include "mast/tensor.hpp"

namespace mast {

/// N style masks at attention-token resolution, entries in [0,1].
struct MaskSet {
  std::vector<Tensor> masks;
  std::size_t source_height = 0;
  std::size_t source_width = 0;

  std::size_t n_styles() const { return masks.size(); }
  std::size_t height() const { return masks.at(0).rows(); }
  std::size_t width() const { return masks.at(0).cols(); }
  std::size_t tokens() const { return masks.at(0).size(); }

  /// sum_i mask_i at flattened token q, in double.
  double coverage(std::size_t q) const;
};

/// Loads a P5 PGM (maxval 255) or a rank-2 tensor file as a mask in [0,1].
Tensor load_mask(const std::filesystem::path& path);

/// Separable Gaussian blur with a normalised kernel truncated at 3 sigma and
/// replicated borders. sigma == 0 returns the input.
Tensor gaussian_blur(const Tensor& m, double sigma);

/// gaussian_blur (std sigma pixels, kernel truncated at 3 sigma,
/// replicated border), clipped to [0,1]. sigma == 0 returns the input.
Tensor smooth_mask(const Tensor& m, double sigma);

/// Corner-aligned bilinear resampling to h_t x w_t.
Tensor resample_to_tokens(const Tensor& m, std::size_t h_t, std::size_t w_t);

/// Bundles masks that already share a shape. Entries must lie in [0,1].
MaskSet make_mask_set(std::vector<Tensor> masks, std::size_t source_height = 0, std::size_t source_width = 0);

struct FeasibilityOptions {
  /// Divide every mask by the pointwise sum wherever that sum exceeds 1.
  bool renormalize = false;
  double tolerance = 1e-6;
};

/// Checks pi_star * sum_i M_i(q) <= 1 + tolerance at every token q. Throws
/// InfeasibleMasksError naming the worst token otherwise.
MaskSet validate_feasibility(const MaskSet& ms, double pi_star, FeasibilityOptions options = {});

}  // namespace mast
