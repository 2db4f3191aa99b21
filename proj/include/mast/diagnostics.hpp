#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mast/masks.hpp"
#include "mast/tensor.hpp"

namespace mast {

inline constexpr std::size_t kDefaultBandPx = 3;

/// |4-neighbour Laplacian| with replicated borders. H and W must be >= 3.
Tensor laplacian_map(const Tensor& img);

struct BoundaryReport {
  Tensor laplacian_map;
  Tensor band;  // 1 inside the boundary band, 0 elsewhere
  double boundary_band_mean = 0.0;
  double interior_mean = 0.0;  // 0 when the band covers the whole image
  std::size_t band_pixels = 0;
  std::size_t interior_pixels = 0;
};

/// Pixels within band_px (Chebyshev) of a level-0.5 crossing of any mask.
/// Throws EmptyBand when no mask crosses 0.5.
Tensor boundary_band(const MaskSet& ms, std::size_t band_px);

/// Means of `map` over the boundary band and its complement. `map` must have
/// the mask resolution.
BoundaryReport boundary_band_stats(const Tensor& map, const MaskSet& ms, std::size_t band_px = kDefaultBandPx);

struct EntropyProfile {
  double mean_entropy = 0.0;  // nats
  double mean_log_p_max = 0.0;
  double q10 = 0.0, q50 = 0.0, q90 = 0.0;  // per-row entropy quantiles
  std::vector<double> row_entropy;
};

/// Rows of `weights` must be probability vectors within 1e-6.
EntropyProfile attention_entropy_profile(const Tensor& weights);

/// Linear-interpolated quantile of unsorted values, p in [0,1].
double quantile(std::vector<double> values, double p);

/// One hard and one smoothly blended composite of the same two textures
/// along a random straight boundary.
struct CompositePair {
  Tensor hard_mask;
  Tensor smooth_mask;
  Tensor image_a, image_b;
  Tensor hard, smooth;
};

struct CompositeOptions {
  std::size_t size = 64;
  double blend_sigma = 3.0;
  double texture_sigma = 4.0;
};

CompositePair make_composite_pair(std::uint64_t seed, std::uint64_t index, const CompositeOptions& options = {});

struct PairedBoundaryResult {
  BoundaryReport hard;
  BoundaryReport smooth;
};

/// Scores both composites on the band of the hard mask.
PairedBoundaryResult paired_boundary_stats(const CompositePair& pair, std::size_t band_px = kDefaultBandPx);

struct StatisticRow {
  std::string source;
  std::string statistic;
  double value = 0.0;
};

/// "source,statistic,value" CSV with 17 significant digits.
void write_statistics_csv(const std::filesystem::path& path, const std::vector<StatisticRow>& rows);

}  // namespace mast
