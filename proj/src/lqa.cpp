#include "mast/lqa.hpp"

#include <cmath>

#include "mast/error.hpp"

namespace mast {

Tensor anchor_queries(const QueryPair& p) {
  require_same_shape(p.content, p.stylized, "anchor_queries");
  if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) fail(ErrorKind::InvalidInput, "lambda must lie in [0, 1]");
  if (p.lambda == 0.0) return p.stylized;
  if (p.lambda == 1.0) return p.content;
  Tensor out(p.content.shape());
  const double keep = 1.0 - p.lambda;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(p.lambda * p.content[i] + keep * p.stylized[i]);
  }
  return out;
}

}  // namespace mast
