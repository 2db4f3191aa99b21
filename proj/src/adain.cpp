#include "mast/adain.hpp"

#include "mast/error.hpp"
#include "mast/numerics.hpp"

namespace mast {

Tensor adain(const Tensor& content, const Tensor& style) {
  require_rank(content, 3, "adain");
  require_same_shape(content, style, "adain");
  const auto cs = channel_stats(content);
  const auto ss = channel_stats(style);
  Tensor out(content.shape());
  for (std::size_t c = 0; c < content.extent(0); ++c) {
    const double scale = ss.std[c] / (cs.std[c] + kAdainEpsilon);
    const auto src = content.plane(c);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = static_cast<float>((src[i] - cs.mean[c]) * scale + ss.mean[c]);
    }
  }
  return out;
}

Tensor region_adain_init(const Tensor& z_c, const std::vector<Tensor>& z_s, const MaskSet& ms) {
  require_rank(z_c, 3, "region_adain_init");
  if (z_s.size() != ms.n_styles()) {
    fail(ErrorKind::InvalidInput, "region_adain_init: " + std::to_string(z_s.size()) + " style latents for " +
                                      std::to_string(ms.n_styles()) + " masks");
  }
  if (ms.height() != z_c.extent(1) || ms.width() != z_c.extent(2)) {
    fail(ErrorKind::InvalidInput, "region_adain_init: mask grid does not match latent " + shape_string(z_c.shape()));
  }
  std::vector<Tensor> styled;
  styled.reserve(z_s.size());
  for (const auto& s : z_s) styled.push_back(adain(z_c, s));

  Tensor out = z_c;
  const std::size_t plane = ms.tokens();
  for (std::size_t q = 0; q < plane; ++q) {
    const double coverage = ms.coverage(q);
    if (coverage == 0.0) continue;
    for (std::size_t c = 0; c < z_c.extent(0); ++c) {
      const std::size_t idx = c * plane + q;
      double acc = (1.0 - coverage) * z_c[idx];
      for (std::size_t i = 0; i < styled.size(); ++i) acc += ms.masks[i][q] * static_cast<double>(styled[i][idx]);
      out[idx] = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace mast
