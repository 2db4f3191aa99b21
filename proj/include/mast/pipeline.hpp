#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mast/ddi.hpp"
#include "mast/lama.hpp"
#include "mast/masks.hpp"
#include "mast/sts.hpp"
#include "mast/tensor.hpp"

namespace mast {

enum class TauMode { PaperPoly, Fit, Fixed, Oracle };

/// "paper-poly" | "fit" | "fixed:<value>" | "oracle"
struct TauSetting {
  TauMode mode = TauMode::PaperPoly;
  double fixed_value = 1.0;

  static TauSetting parse(const std::string& text);
  std::string to_string() const;
};

enum class MaskLayout { Stripes, Full, Empty };

MaskLayout parse_mask_layout(const std::string& text);
std::string to_string(MaskLayout layout);

struct PipelineConfig {
  double lambda = 0.2;
  double pi_star = 0.9;
  double r = kDefaultRadius;
  double epsilon_hp = kDefaultHighPassEpsilon;
  double mask_sigma = 2.0;
  TauSetting tau_mode{};
  std::uint64_t seed = 0;
  std::size_t token_h = 16;
  std::size_t token_w = 16;
  std::size_t d = 32;
  std::size_t d_v = 32;
  std::size_t n_heads = 4;
  std::size_t n_styles = 2;
  std::size_t feature_channels = 8;
  std::size_t latent_channels = 4;
  MaskLayout mask_layout = MaskLayout::Stripes;

  std::size_t tokens() const { return token_h * token_w; }
  void validate() const;
};

/// Synthetic inputs of one attention head.
struct HeadInputs {
  Tensor q_c;                       // T x d, content-path queries
  Tensor q_cs;                      // T x d, stylisation-path queries
  Tensor k_c;                       // T x d
  Tensor v_c;                       // T x d_v
  std::vector<Tensor> style_keys;   // N x (T x d)
  std::vector<Tensor> style_values; // N x (T x d_v)
};

/// Deterministic stand-in for inverted diffusion features.
struct SyntheticScene {
  std::vector<HeadInputs> heads;
  MaskSet masks;
  Tensor phi_c, phi_cs, delta_phi_cs;  // feature_channels x H_t x W_t
  Tensor z_c;                          // latent_channels x H_t x W_t
  std::vector<Tensor> z_s;             // N latents
};

/// Masks for a layout at token resolution, smoothed by cfg.mask_sigma.
MaskSet layout_masks(const PipelineConfig& cfg);

SyntheticScene generate_fixture(const PipelineConfig& cfg);

struct StepOptions {
  /// Coefficients used by TauMode::Fit.
  std::optional<TemperatureModel> fitted_model;
  /// Forces omega = 0 in detail injection.
  bool disable_ddi = false;
  /// Masks replacing the scene's (already at token resolution).
  std::optional<MaskSet> masks;
  FeasibilityOptions feasibility{};
};

struct HeadReport {
  Tensor anchored_queries;
  Tensor biased_logits;
  Tensor attention_weights;  // softmax(tau * biased_logits)
  Tensor output;             // T x d_v
  std::vector<double> target_mass_mean;    // N + 1 groups, content last
  std::vector<double> achieved_mass_mean;  // at tau = 1
  std::vector<std::vector<double>> achieved_mass;  // (N + 1) x T at tau = 1
  double max_mass_error = 0.0;
  SharpnessGap gap;
  double tau = 1.0;
  std::optional<TemperatureSolution> oracle;
  double post_sharpness = 0.0;  // mean log p_max at tau
  double entropy_tau1 = 0.0;    // mean row entropy before scaling
  double entropy_tau = 0.0;     // after scaling
  double std_sharpness_content = 0.0;  // diagnostic comparator only
  double std_sharpness_concat = 0.0;
};

struct StepReport {
  double pi_star_requested = 0.0;
  double pi_star_effective = 0.0;
  std::string tau_mode;
  std::vector<HeadReport> heads;
  Tensor adain_init;        // latent_channels x H x W
  Tensor attention_output;  // T x (n_heads * d_v)
  Tensor ddi_output;        // feature_channels x H x W
  Tensor ddi_high_freq;
  double omega = 0.0;
  std::map<std::string, std::string> checksums;  // stage -> sha256 of tensor bytes
  std::vector<std::string> warnings;
};

/// One attention-control step: anchoring, LAMA, STS, attention and detail
/// injection for every head. Heads run in parallel.
StepReport run_step(const SyntheticScene& scene, const PipelineConfig& cfg, const StepOptions& options = {});

struct SweepRow {
  double pi_star_requested = 0.0;
  double pi_star_effective = 0.0;
  double mean_style_mass = 0.0;      // achieved, tau = 1
  double expected_style_mass = 0.0;  // pi_star_effective * mean(sum_i M_i)
  double mean_entropy = 0.0;         // tau = 1
  bool clamped = false;
};

std::vector<SweepRow> sweep_pi_star(const SyntheticScene& scene, const PipelineConfig& cfg,
                                    const std::vector<double>& values);

inline const std::vector<double>& paper_pi_star_grid() {
  static const std::vector<double> grid{0.30, 0.45, 0.60, 0.75, 0.90, 1.00};
  return grid;
}

}  // namespace mast
