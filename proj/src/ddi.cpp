#include "mast/ddi.hpp"

#include <cmath>

#include "mast/error.hpp"
#include "mast/fft.hpp"
#include "mast/numerics.hpp"

namespace mast {

void HighPassSpec::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorKind::InvalidInput, "high-pass radius must be > 0");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(ErrorKind::InvalidInput, "high-pass epsilon must be > 0");
}

double highpass_value(double distance, const HighPassSpec& spec) {
  return 1.0 - std::exp(-(distance * distance) / (2.0 * spec.radius * spec.radius + spec.epsilon));
}

Tensor gaussian_highpass_mask(std::size_t h, std::size_t w, const HighPassSpec& spec) {
  spec.validate();
  if (h == 0 || w == 0) fail(ErrorKind::InvalidInput, "mask extents must be >= 1");
  Tensor mask({h, w});
  for (std::size_t i = 0; i < h; ++i) {
    const double fy = (static_cast<double>(i) - static_cast<double>(h / 2)) / static_cast<double>(h);
    for (std::size_t j = 0; j < w; ++j) {
      const double fx = (static_cast<double>(j) - static_cast<double>(w / 2)) / static_cast<double>(w);
      mask.at(i, j) = static_cast<float>(highpass_value(std::hypot(fy, fx), spec));
    }
  }
  return mask;
}

Tensor extract_high_freq_powered(const Tensor& phi_c, const HighPassSpec& spec, int passes) {
  require_rank(phi_c, 3, "extract_high_freq");
  spec.validate();
  const std::size_t channels = phi_c.extent(0), h = phi_c.extent(1), w = phi_c.extent(2);

  // Filter in unshifted DFT order; computed in double.
  std::vector<double> filter(h * w);
  for (std::size_t i = 0; i < h; ++i) {
    const double fy = signed_frequency(i, h);
    for (std::size_t j = 0; j < w; ++j) {
      filter[i * w + j] = std::pow(highpass_value(std::hypot(fy, signed_frequency(j, w)), spec), passes);
    }
  }

  Tensor out(phi_c.shape());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(channels); ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    const auto src = phi_c.plane(c);
    ComplexTensor spectrum = fft2(Tensor({h, w}, std::vector<float>(src.begin(), src.end())));
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      spectrum.re[k] *= filter[k];
      spectrum.im[k] *= filter[k];
    }
    const Tensor filtered = ifft2(spectrum);
    std::copy(filtered.values().begin(), filtered.values().end(), out.plane(c).begin());
  }
  return out;
}

Tensor extract_high_freq(const Tensor& phi_c, const HighPassSpec& spec) {
  return extract_high_freq_powered(phi_c, spec, 1);
}

double discrepancy_weight(const Tensor& phi_cs, const Tensor& phi_c) {
  require_same_shape(phi_cs, phi_c, "discrepancy_weight");
  try {
    return 1.0 - cosine_similarity(phi_cs, phi_c);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateInput) throw;
    return 1.0;
  }
}

void ResidualFeatures::validate() const {
  require_rank(phi_c, 3, "ResidualFeatures");
  require_same_shape(phi_c, phi_cs, "ResidualFeatures phi_cs");
  require_same_shape(phi_c, delta_phi_cs, "ResidualFeatures delta_phi_cs");
}

DetailInjection inject_details_full(const ResidualFeatures& f, const HighPassSpec& spec,
                                    std::optional<double> omega_override) {
  f.validate();
  DetailInjection result;
  result.omega = omega_override.value_or(discrepancy_weight(f.phi_cs, f.phi_c));
  result.high_freq = extract_high_freq(f.phi_c, spec);
  result.output = Tensor(f.phi_c.shape());
  for (std::size_t i = 0; i < result.output.size(); ++i) {
    result.output[i] = static_cast<float>(static_cast<double>(f.phi_cs[i]) + f.delta_phi_cs[i] +
                                          result.omega * result.high_freq[i]);
  }
  return result;
}

Tensor inject_details(const ResidualFeatures& f, const HighPassSpec& spec) {
  return inject_details_full(f, spec).output;
}

}  // namespace mast
