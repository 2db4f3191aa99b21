#include "mast/rng.hpp"

namespace mast {

Tensor random_normal(const CounterRng& rng, Shape shape, float scale) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal(i);
  return t;
}

Tensor random_uniform(const CounterRng& rng, Shape shape, float lo, float hi) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(i, lo, hi);
  return t;
}

}  // namespace mast
