#include "mast/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "mast/error.hpp"
#include "mast/numerics.hpp"
#include "mast/rng.hpp"
#include "mast/tensor_io.hpp"

namespace mast {

Tensor laplacian_map(const Tensor& img) {
  require_rank(img, 2, "laplacian_map");
  const std::size_t h = img.rows(), w = img.cols();
  if (h < 3 || w < 3) fail(ErrorKind::InvalidInput, "laplacian_map needs at least 3x3, got " + shape_string(img.shape()));
  Tensor out(img.shape());
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t yu = y == 0 ? 0 : y - 1, yd = y + 1 == h ? y : y + 1;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t xl = x == 0 ? 0 : x - 1, xr = x + 1 == w ? x : x + 1;
      const double c = img.at(y, x);
      const double lap = static_cast<double>(img.at(yu, x)) + img.at(yd, x) + img.at(y, xl) + img.at(y, xr) - 4.0 * c;
      out.at(y, x) = static_cast<float>(std::abs(lap));
    }
  }
  return out;
}

Tensor boundary_band(const MaskSet& ms, std::size_t band_px) {
  if (band_px < 1) fail(ErrorKind::InvalidInput, "band_px must be >= 1");
  if (ms.n_styles() == 0) fail(ErrorKind::InvalidInput, "boundary_band needs at least one mask");
  const std::size_t h = ms.height(), w = ms.width();
  Tensor crossing({h, w});
  bool any = false;
  for (const auto& m : ms.masks) {
    auto mark = [&](std::size_t y0, std::size_t x0, std::size_t y1, std::size_t x1) {
      if ((m.at(y0, x0) >= 0.5f) != (m.at(y1, x1) >= 0.5f)) {
        crossing.at(y0, x0) = 1.0f;
        crossing.at(y1, x1) = 1.0f;
        any = true;
      }
    };
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (x + 1 < w) mark(y, x, y, x + 1);
        if (y + 1 < h) mark(y, x, y + 1, x);
      }
    }
  }
  if (!any) fail(ErrorKind::EmptyBand, "no mask crosses 0.5, boundary band is empty");

  // Chebyshev dilation is separable: dilate rows, then columns.
  const auto r = static_cast<std::ptrdiff_t>(band_px);
  const auto hh = static_cast<std::ptrdiff_t>(h), ww = static_cast<std::ptrdiff_t>(w);
  Tensor rows({h, w});
  for (std::ptrdiff_t y = 0; y < hh; ++y) {
    for (std::ptrdiff_t x = 0; x < ww; ++x) {
      for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, x - r); k <= std::min(ww - 1, x + r); ++k) {
        if (crossing.at(y, k) > 0.0f) {
          rows.at(y, x) = 1.0f;
          break;
        }
      }
    }
  }
  Tensor band({h, w});
  for (std::ptrdiff_t y = 0; y < hh; ++y) {
    for (std::ptrdiff_t x = 0; x < ww; ++x) {
      for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, y - r); k <= std::min(hh - 1, y + r); ++k) {
        if (rows.at(k, x) > 0.0f) {
          band.at(y, x) = 1.0f;
          break;
        }
      }
    }
  }
  return band;
}

BoundaryReport boundary_band_stats(const Tensor& map, const MaskSet& ms, std::size_t band_px) {
  require_rank(map, 2, "boundary_band_stats");
  if (ms.n_styles() == 0 || map.rows() != ms.height() || map.cols() != ms.width()) {
    fail(ErrorKind::InvalidInput, "map " + shape_string(map.shape()) + " does not match the mask resolution");
  }
  BoundaryReport report;
  report.band = boundary_band(ms, band_px);
  report.laplacian_map = map;
  double band_sum = 0.0, interior_sum = 0.0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (report.band[i] > 0.0f) {
      band_sum += map[i];
      ++report.band_pixels;
    } else {
      interior_sum += map[i];
      ++report.interior_pixels;
    }
  }
  report.boundary_band_mean = band_sum / static_cast<double>(report.band_pixels);
  report.interior_mean = report.interior_pixels ? interior_sum / static_cast<double>(report.interior_pixels) : 0.0;
  return report;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) fail(ErrorKind::InvalidInput, "quantile of an empty set");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidInput, "quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

EntropyProfile attention_entropy_profile(const Tensor& weights) {
  require_rank(weights, 2, "attention_entropy_profile");
  EntropyProfile profile;
  profile.row_entropy.reserve(weights.rows());
  double log_p_max_sum = 0.0;
  for (std::size_t q = 0; q < weights.rows(); ++q) {
    const auto row = weights.row(q);
    double sum = 0.0, p_max = 0.0;
    std::vector<double> p(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!(row[k] >= 0.0f) || !std::isfinite(row[k])) {
        fail(ErrorKind::InvalidInput, "attention row " + std::to_string(q) + " has a negative or non-finite entry");
      }
      p[k] = row[k];
      sum += p[k];
      p_max = std::max(p_max, p[k]);
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "attention row " << q << " sums to " << std::setprecision(10) << sum << ", not 1";
      fail(ErrorKind::InvalidInput, os.str());
    }
    profile.row_entropy.push_back(rowops::entropy(p));
    log_p_max_sum += std::log(p_max);
  }
  double total = 0.0;
  for (double e : profile.row_entropy) total += e;
  const auto n = static_cast<double>(weights.rows());
  profile.mean_entropy = total / n;
  profile.mean_log_p_max = log_p_max_sum / n;
  profile.q10 = quantile(profile.row_entropy, 0.1);
  profile.q50 = quantile(profile.row_entropy, 0.5);
  profile.q90 = quantile(profile.row_entropy, 0.9);
  return profile;
}

CompositePair make_composite_pair(std::uint64_t seed, std::uint64_t index, const CompositeOptions& options) {
  if (options.size < 8) fail(ErrorKind::InvalidInput, "composite size must be >= 8");
  const CounterRng rng = CounterRng(seed, 0xB0DE).substream(index);
  const std::size_t n = options.size;
  const double half = 0.5 * static_cast<double>(n - 1);
  const double angle = rng.uniform(0, 0.0, 2.0 * std::numbers::pi);
  const double cx = half + rng.uniform(1, -0.15, 0.15) * static_cast<double>(n);
  const double cy = half + rng.uniform(2, -0.15, 0.15) * static_cast<double>(n);

  CompositePair pair;
  pair.hard_mask = Tensor({n, n});
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double side = (static_cast<double>(x) - cx) * std::cos(angle) + (static_cast<double>(y) - cy) * std::sin(angle);
      pair.hard_mask.at(y, x) = side >= 0.0 ? 1.0f : 0.0f;
    }
  }
  pair.smooth_mask = smooth_mask(pair.hard_mask, options.blend_sigma);

  auto texture = [&](std::uint64_t tag, float offset) {
    Tensor t = gaussian_blur(random_normal(rng.substream(tag), {n, n}), options.texture_sigma);
    for (auto& v : t.values()) v = offset + 0.5f * v;
    return t;
  };
  pair.image_a = texture(10, 0.7f);
  pair.image_b = texture(11, 0.2f);

  auto blend = [&](const Tensor& m) {
    Tensor out({n, n});
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = m[i] * pair.image_a[i] + (1.0f - m[i]) * pair.image_b[i];
    return out;
  };
  pair.hard = blend(pair.hard_mask);
  pair.smooth = blend(pair.smooth_mask);
  return pair;
}

PairedBoundaryResult paired_boundary_stats(const CompositePair& pair, std::size_t band_px) {
  const MaskSet ms = make_mask_set({pair.hard_mask});
  return {boundary_band_stats(laplacian_map(pair.hard), ms, band_px),
          boundary_band_stats(laplacian_map(pair.smooth), ms, band_px)};
}

void write_statistics_csv(const std::filesystem::path& path, const std::vector<StatisticRow>& rows) {
  std::ostringstream os;
  os << "source,statistic,value\n" << std::setprecision(17);
  for (const auto& r : rows) os << r.source << ',' << r.statistic << ',' << r.value << '\n';
  write_text_file(path, os.str());
}

}  // namespace mast
