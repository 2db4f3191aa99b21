#pragma once

#include <vector>

#include "mast/masks.hpp"
#include "mast/tensor.hpp"

namespace mast {

inline constexpr double kAdainEpsilon = 1e-5;

/// Per-channel AdaIN of a C x H x W content tensor onto the channel
/// statistics of a same-shaped style tensor. Statistics cover the whole
/// channel (population std); kAdainEpsilon guards the content std.
Tensor adain(const Tensor& content, const Tensor& style);

/// Region-wise initialisation of the stylisation latent:
///   z_cs = sum_i M_i * adain(z_c, z_s[i]) + (1 - sum_i M_i) * z_c
/// with masks broadcast over channels. Tokens where every mask is zero are
/// copied from z_c unchanged.
Tensor region_adain_init(const Tensor& z_c, const std::vector<Tensor>& z_s, const MaskSet& ms);

}  // namespace mast
