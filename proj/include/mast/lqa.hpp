#pragma once

#include "mast/tensor.hpp"

namespace mast {

inline constexpr double kDefaultLambda = 0.2;

struct QueryPair {
  const Tensor& content;   // Q_c, T x d
  const Tensor& stylized;  // Q_cs, T x d
  double lambda = kDefaultLambda;
};

/// lambda * Q_c + (1 - lambda) * Q_cs. lambda == 0 and lambda == 1 return the
/// stylised and content queries exactly.
Tensor anchor_queries(const QueryPair& p);

}  // namespace mast
