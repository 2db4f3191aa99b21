#pragma once

#include <optional>

#include "mast/tensor.hpp"

namespace mast {

inline constexpr double kDefaultRadius = 0.3;
inline constexpr double kDefaultHighPassEpsilon = 1e-8;

/// Gaussian high-pass 1 - exp(-D^2 / (2 r^2 + eps)), D measured from the
/// spectrum centre in normalised frequency (cycles per sample on each axis).
struct HighPassSpec {
  double radius = kDefaultRadius;
  double epsilon = kDefaultHighPassEpsilon;

  void validate() const;
};

double highpass_value(double distance, const HighPassSpec& spec);

/// The filter in centred (fftshift) layout: DC sits at (h/2, w/2).
Tensor gaussian_highpass_mask(std::size_t h, std::size_t w, const HighPassSpec& spec);

/// Per-channel FFT -> multiply by the high-pass -> inverse FFT, real part.
/// Channels are processed in parallel. Input is C x H x W.
Tensor extract_high_freq(const Tensor& phi_c, const HighPassSpec& spec);

/// Same filter with the mask applied `passes` times in the frequency domain.
Tensor extract_high_freq_powered(const Tensor& phi_c, const HighPassSpec& spec, int passes);

/// 1 - cos(phi_cs, phi_c) over flattened tensors; 1 when either is all-zero.
double discrepancy_weight(const Tensor& phi_cs, const Tensor& phi_c);

struct ResidualFeatures {
  Tensor phi_c;         // content residual-block output
  Tensor phi_cs;        // stylised residual-block output
  Tensor delta_phi_cs;  // stylised skip / residual term

  void validate() const;
};

struct DetailInjection {
  Tensor output;  // phi_cs + delta_phi_cs + omega * high_freq
  Tensor high_freq;
  double omega = 0.0;
};

/// Evaluates phi_cs + delta_phi_cs + omega * highpass(phi_c). When
/// `omega_override` is set it replaces the cosine weight.
DetailInjection inject_details_full(const ResidualFeatures& f, const HighPassSpec& spec,
                                    std::optional<double> omega_override = std::nullopt);

Tensor inject_details(const ResidualFeatures& f, const HighPassSpec& spec);

}  // namespace mast
