#pragma once

// Serial reference implementations of the parallel kernels. They favour the
// most direct evaluation of each formula over speed and are kept for parity
// tests and benchmarks; production code paths call the kernels in the
// per-module headers.

#include "mast/calibration.hpp"
#include "mast/ddi.hpp"
#include "mast/lama.hpp"
#include "mast/sts.hpp"

namespace mast::reference {

Tensor apply_lama(const LogitGroups& groups, const MassTargets& targets);

Tensor attention_output(const Tensor& logits, const Tensor& values, double temperature = 1.0);

double mean_log_p_max(const Tensor& logits, double temperature = 1.0);

/// Exhaustive scan of every grid temperature, then the same bisection
/// refinement as the fast solver.
TemperatureSolution solve_temperature(const Tensor& concat_logits, double target_sharpness,
                                      const TemperatureGrid& grid = {});

/// High-pass through a direct separable DFT instead of FFTW.
Tensor extract_high_freq(const Tensor& phi_c, const HighPassSpec& spec);

CalibrationDataset generate_calibration_dataset(const CalibrationConfig& cfg);

}  // namespace mast::reference
