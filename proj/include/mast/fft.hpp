#pragma once

#include "mast/tensor.hpp"

namespace mast {

/// Unnormalized forward 2D DFT of a real H x W tensor, exact size.
ComplexTensor fft2(const Tensor& x);

/// Inverse of fft2 (scaled by 1/(H*W)), returning the complex result.
ComplexTensor ifft2_complex(const ComplexTensor& spectrum);

/// Inverse of fft2 keeping only the real part.
Tensor ifft2(const ComplexTensor& spectrum);

/// Signed frequency of bin k in an n-point DFT, in cycles per sample:
/// k/n for k <= n/2, (k-n)/n otherwise. Matches the centered (shifted)
/// spectrum layout, where the Nyquist bin of an even length maps to -1/2.
double signed_frequency(std::size_t k, std::size_t n);

}  // namespace mast
