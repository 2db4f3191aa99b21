#include "mast/masks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mast/error.hpp"
#include "mast/image_io.hpp"
#include "mast/tensor_io.hpp"

namespace mast {

double MaskSet::coverage(std::size_t q) const {
  double s = 0.0;
  for (const auto& m : masks) s += m[q];
  return s;
}

Tensor load_mask(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return decode_pgm(std::string(bytes.begin(), bytes.end()));
  }
  Tensor t = decode_tensor(bytes);
  if (t.rank() != 2) fail(ErrorKind::FormatError, "mask tensor must be rank 2, got " + shape_string(t.shape()));
  for (float v : t.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) fail(ErrorKind::FormatError, "mask tensor values must lie in [0,1]");
  }
  return t;
}

Tensor gaussian_blur(const Tensor& m, double sigma) {
  require_rank(m, 2, "gaussian_blur");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorKind::InvalidInput, "blur sigma must be >= 0");
  if (sigma == 0.0) return m;

  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double norm = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = w;
    norm += w;
  }
  for (auto& w : kernel) w /= norm;

  const auto h = static_cast<std::ptrdiff_t>(m.rows());
  const auto w = static_cast<std::ptrdiff_t>(m.cols());
  auto clamp_idx = [](std::ptrdiff_t i, std::ptrdiff_t n) { return std::clamp<std::ptrdiff_t>(i, 0, n - 1); };

  std::vector<double> horiz(m.size());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * m.at(y, clamp_idx(x + k, w));
      }
      horiz[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  Tensor out(m.shape());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               horiz[static_cast<std::size_t>(clamp_idx(y + k, h) * w + x)];
      }
      out.at(y, x) = static_cast<float>(acc);
    }
  }
  return out;
}

Tensor smooth_mask(const Tensor& m, double sigma) {
  Tensor out = gaussian_blur(m, sigma);
  for (auto& v : out.values()) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

Tensor resample_to_tokens(const Tensor& m, std::size_t h_t, std::size_t w_t) {
  require_rank(m, 2, "resample_to_tokens");
  if (h_t == 0 || w_t == 0) fail(ErrorKind::InvalidInput, "token grid extents must be >= 1");
  const std::size_t h = m.rows(), w = m.cols();
  if (h == h_t && w == w_t) return m;

  // Corner-aligned: output index 0 maps to input 0, the last output index to
  // the last input index. A single output sample sits at the input centre.
  auto source = [](std::size_t i, std::size_t n_out, std::size_t n_in) {
    if (n_out == 1) return 0.5 * static_cast<double>(n_in - 1);
    return static_cast<double>(i) * static_cast<double>(n_in - 1) / static_cast<double>(n_out - 1);
  };

  Tensor out({h_t, w_t});
  for (std::size_t i = 0; i < h_t; ++i) {
    const double sy = source(i, h_t, h);
    const auto y0 = std::min(static_cast<std::size_t>(sy), h - 1);
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t j = 0; j < w_t; ++j) {
      const double sx = source(j, w_t, w);
      const auto x0 = std::min(static_cast<std::size_t>(sx), w - 1);
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = (1.0 - fx) * m.at(y0, x0) + fx * m.at(y0, x1);
      const double bottom = (1.0 - fx) * m.at(y1, x0) + fx * m.at(y1, x1);
      out.at(i, j) = static_cast<float>(std::clamp((1.0 - fy) * top + fy * bottom, 0.0, 1.0));
    }
  }
  return out;
}

MaskSet make_mask_set(std::vector<Tensor> masks, std::size_t source_height, std::size_t source_width) {
  if (masks.empty()) fail(ErrorKind::InvalidInput, "a mask set needs at least one mask");
  for (const auto& m : masks) {
    require_rank(m, 2, "make_mask_set");
    require_same_shape(m, masks.front(), "make_mask_set");
    for (float v : m.values()) {
      if (!(v >= 0.0f && v <= 1.0f)) fail(ErrorKind::InvalidInput, "mask entries must lie in [0,1]");
    }
  }
  MaskSet ms;
  ms.source_height = source_height ? source_height : masks.front().rows();
  ms.source_width = source_width ? source_width : masks.front().cols();
  ms.masks = std::move(masks);
  return ms;
}

MaskSet validate_feasibility(const MaskSet& ms, double pi_star, FeasibilityOptions options) {
  if (!(pi_star > 0.0 && pi_star <= 1.0)) fail(ErrorKind::InvalidInput, "pi_star must lie in (0, 1]");
  MaskSet checked = make_mask_set(ms.masks, ms.source_height, ms.source_width);

  if (options.renormalize) {
    for (std::size_t q = 0; q < checked.tokens(); ++q) {
      const double total = checked.coverage(q);
      if (total > 1.0) {
        for (auto& m : checked.masks) m[q] = static_cast<float>(m[q] / total);
      }
    }
  }

  std::size_t worst = 0;
  double worst_alloc = -1.0;
  for (std::size_t q = 0; q < checked.tokens(); ++q) {
    const double alloc = pi_star * checked.coverage(q);
    if (alloc > worst_alloc) {
      worst_alloc = alloc;
      worst = q;
    }
  }
  if (worst_alloc > 1.0 + options.tolerance) {
    std::ostringstream os;
    os << "InfeasibleMasks: style allocation " << worst_alloc << " exceeds 1 at token " << worst << " (row "
       << worst / checked.width() << ", col " << worst % checked.width() << ")";
    throw InfeasibleMasksError(worst, worst_alloc, os.str());
  }
  return checked;
}

}  // namespace mast
