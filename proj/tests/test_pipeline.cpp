#include <doctest.h>

#include <cmath>

#include "mast/lama.hpp"
#include "mast/lqa.hpp"
#include "mast/pipeline.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using doctest::Approx;
using mast::PipelineConfig;
using mast::Tensor;

namespace {

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.token_h = 8;
  cfg.token_w = 8;
  cfg.d = 16;
  cfg.d_v = 8;
  cfg.n_heads = 2;
  cfg.feature_channels = 3;
  cfg.latent_channels = 2;
  return cfg;
}

bool scenes_equal(const mast::SyntheticScene& a, const mast::SyntheticScene& b) {
  if (a.heads.size() != b.heads.size()) return false;
  for (std::size_t h = 0; h < a.heads.size(); ++h) {
    const auto &x = a.heads[h], &y = b.heads[h];
    if (!(x.q_c == y.q_c && x.q_cs == y.q_cs && x.k_c == y.k_c && x.v_c == y.v_c &&
          x.style_keys == y.style_keys && x.style_values == y.style_values))
      return false;
  }
  return a.masks.masks == b.masks.masks && a.phi_c == b.phi_c && a.phi_cs == b.phi_cs &&
         a.delta_phi_cs == b.delta_phi_cs && a.z_c == b.z_c && a.z_s == b.z_s;
}

}  // namespace

TEST_CASE("tau setting parsing") {
  CHECK(mast::TauSetting::parse("paper-poly").mode == mast::TauMode::PaperPoly);
  CHECK(mast::TauSetting::parse("oracle").mode == mast::TauMode::Oracle);
  CHECK(mast::TauSetting::parse("fit").mode == mast::TauMode::Fit);
  const auto fixed = mast::TauSetting::parse("fixed:1.5");
  CHECK(fixed.mode == mast::TauMode::Fixed);
  CHECK(fixed.fixed_value == 1.5);
  CHECK(mast::TauSetting::parse(fixed.to_string()).fixed_value == 1.5);
  for (const char* bad : {"fixed:", "fixed:abc", "fixed:0", "sharp", ""}) {
    CHECK(testutil::kind_of([&] { mast::TauSetting::parse(bad); }) == mast::ErrorKind::InvalidInput);
  }
}

TEST_CASE("config defaults and validation") {
  const PipelineConfig cfg;
  CHECK(cfg.lambda == 0.2);
  CHECK(cfg.pi_star == 0.9);
  CHECK(cfg.r == 0.3);
  CHECK(cfg.mask_sigma == 2.0);
  cfg.validate();
  PipelineConfig bad = cfg;
  bad.lambda = 1.5;
  CHECK(testutil::kind_of([&] { bad.validate(); }) == mast::ErrorKind::InvalidInput);
  bad = cfg;
  bad.pi_star = 0.0;
  CHECK(testutil::kind_of([&] { bad.validate(); }) == mast::ErrorKind::InvalidInput);
  bad = cfg;
  bad.n_heads = 0;
  CHECK(testutil::kind_of([&] { bad.validate(); }) == mast::ErrorKind::InvalidInput);
}

TEST_CASE("fixture determinism") {
  const PipelineConfig cfg = small_config();
  CHECK(scenes_equal(mast::generate_fixture(cfg), mast::generate_fixture(cfg)));
  PipelineConfig other = cfg;
  other.seed = 1;
  CHECK_FALSE(scenes_equal(mast::generate_fixture(cfg), mast::generate_fixture(other)));
}

TEST_CASE("two disjoint half masks are feasible at the default ratio") {
  PipelineConfig cfg = small_config();
  cfg.mask_sigma = 0.0;
  const auto scene = mast::generate_fixture(cfg);
  for (std::size_t q = 0; q < scene.masks.tokens(); ++q) CHECK(scene.masks.coverage(q) == 1.0);
  CHECK_NOTHROW(mast::validate_feasibility(scene.masks, 0.9));

  cfg.mask_sigma = 2.0;
  const auto smooth = mast::generate_fixture(cfg);
  CHECK_NOTHROW(mast::validate_feasibility(smooth.masks, 0.9));
}

TEST_CASE("single full mask with unit temperature gives the target style mass") {
  PipelineConfig cfg = small_config();
  cfg.n_styles = 1;
  cfg.mask_layout = mast::MaskLayout::Full;
  cfg.tau_mode = mast::TauSetting::parse("fixed:1");
  const auto scene = mast::generate_fixture(cfg);
  const auto report = mast::run_step(scene, cfg);
  for (const auto& head : report.heads) {
    CHECK(head.tau == 1.0);
    for (std::size_t q = 0; q < cfg.tokens(); ++q) {
      // direct softmax over the stored biased row
      const auto row = oracle::to_row(head.biased_logits.row(q));
      const auto p = oracle::softmax(row);
      oracle::ld style = 0;
      for (std::size_t j = 0; j < cfg.tokens(); ++j) style += p[j];
      CHECK(std::abs(style - 0.9L) < 1e-6);
      CHECK(std::abs(head.achieved_mass[0][q] - 0.9) < 1e-6);
    }
    CHECK(head.max_mass_error < 1e-6);
  }
}

TEST_CASE("achieved masses match targets for the default layout") {
  const PipelineConfig cfg = small_config();
  const auto report = mast::run_step(mast::generate_fixture(cfg), cfg);
  REQUIRE(report.heads.size() == 2);
  for (const auto& head : report.heads) {
    CHECK(head.max_mass_error < 1e-6);
    CHECK(head.target_mass_mean.size() == cfg.n_styles + 1);
    double total = 0;
    for (double m : head.achieved_mass_mean) total += m;
    CHECK(total == Approx(1.0).epsilon(1e-9));
    CHECK(head.tau >= 1.0);
    CHECK(head.gap.delta > 0.0);
  }
  CHECK(report.attention_output.shape() == mast::Shape{cfg.tokens(), cfg.n_heads * cfg.d_v});
  CHECK(report.ddi_output.shape() == mast::Shape{cfg.feature_channels, cfg.token_h, cfg.token_w});
  CHECK(report.adain_init.shape() == mast::Shape{cfg.latent_channels, cfg.token_h, cfg.token_w});
  CHECK(report.checksums.size() == 7);
  CHECK(report.warnings.empty());
}

TEST_CASE("empty masks reduce to content attention") {
  PipelineConfig cfg = small_config();
  cfg.mask_layout = mast::MaskLayout::Empty;
  cfg.tau_mode = mast::TauSetting::parse("fixed:1");
  const auto scene = mast::generate_fixture(cfg);
  const auto report = mast::run_step(scene, cfg);
  for (std::size_t h = 0; h < cfg.n_heads; ++h) {
    const auto& in = scene.heads[h];
    const Tensor content = mast::scaled_logits(in.q_c, in.k_c);
    const auto want = oracle::attention(content, in.v_c);
    CHECK(oracle::max_abs_diff(want, report.heads[h].output) < 1e-6);
  }
}

TEST_CASE("oracle temperature restores content sharpness") {
  PipelineConfig cfg = small_config();
  cfg.tau_mode = mast::TauSetting::parse("oracle");
  const auto report = mast::run_step(mast::generate_fixture(cfg), cfg);
  for (const auto& head : report.heads) {
    REQUIRE(head.oracle.has_value());
    CHECK(std::abs(head.post_sharpness - head.gap.content_sharpness) <= 0.02);
    CHECK(head.entropy_tau <= head.entropy_tau1);
  }
}

TEST_CASE("fit mode needs a model") {
  PipelineConfig cfg = small_config();
  cfg.tau_mode = mast::TauSetting::parse("fit");
  const auto scene = mast::generate_fixture(cfg);
  CHECK(testutil::kind_of([&] { mast::run_step(scene, cfg); }) == mast::ErrorKind::InvalidInput);
  mast::StepOptions options;
  options.fitted_model = mast::TemperatureModel{{0.0, 0.5, 1.0}, 1.0, 1.0};
  const auto report = mast::run_step(scene, cfg, options);
  for (const auto& head : report.heads) CHECK(head.tau == Approx(std::max(1.0, 0.5 * head.gap.delta + 1.0)));
}

TEST_CASE("disjoint binary masks do not leak") {
  PipelineConfig cfg = small_config();
  cfg.mask_sigma = 0.0;
  cfg.tau_mode = mast::TauSetting::parse("fixed:1");
  const auto scene = mast::generate_fixture(cfg);
  const auto report = mast::run_step(scene, cfg);
  for (const auto& head : report.heads) {
    for (std::size_t q = 0; q < cfg.tokens(); ++q) {
      const std::size_t owner = scene.masks.masks[0][q] > 0.5f ? 0 : 1;
      CHECK(head.achieved_mass[1 - owner][q] < 1e-6);
      CHECK(std::abs(head.achieved_mass[owner][q] - 0.9) < 1e-6);
      CHECK(std::abs(head.achieved_mass[2][q] - 0.1) < 1e-6);
    }
  }
}

TEST_CASE("run_step determinism and stage isolation") {
  const PipelineConfig cfg = small_config();
  const auto scene = mast::generate_fixture(cfg);
  const auto a = mast::run_step(scene, cfg);
  const auto b = mast::run_step(mast::generate_fixture(cfg), cfg);
  CHECK(a.checksums == b.checksums);

  mast::StepOptions no_ddi;
  no_ddi.disable_ddi = true;
  const auto c = mast::run_step(scene, cfg, no_ddi);
  CHECK(c.omega == 0.0);
  for (const auto& [stage, digest] : a.checksums) {
    if (stage == "ddi_output") CHECK(c.checksums.at(stage) != digest);
    else CHECK(c.checksums.at(stage) == digest);
  }
}

TEST_CASE("mask validation in run_step") {
  PipelineConfig cfg = small_config();
  const auto scene = mast::generate_fixture(cfg);

  mast::StepOptions options;
  options.masks = mast::make_mask_set({Tensor({8, 8}, 1.0f), Tensor({8, 8}, 1.0f)});
  try {
    mast::run_step(scene, cfg, options);
    FAIL("expected infeasible masks");
  } catch (const mast::InfeasibleMasksError& e) {
    CHECK(e.kind() == mast::ErrorKind::InfeasibleMasks);
    CHECK(e.worst_allocation() == Approx(1.8));
  }

  options.feasibility.renormalize = true;
  const auto report = mast::run_step(scene, cfg, options);
  for (const auto& head : report.heads) CHECK(head.max_mass_error < 1e-6);

  options.masks = mast::make_mask_set({Tensor({4, 4}), Tensor({4, 4})});
  CHECK(testutil::kind_of([&] { mast::run_step(scene, cfg, options); }) == mast::ErrorKind::InvalidInput);
}

TEST_CASE("pi_star sweep") {
  const PipelineConfig cfg = small_config();
  const auto scene = mast::generate_fixture(cfg);
  double coverage = 0;
  for (std::size_t q = 0; q < scene.masks.tokens(); ++q) coverage += scene.masks.coverage(q);
  coverage /= static_cast<double>(scene.masks.tokens());

  const auto rows = mast::sweep_pi_star(scene, cfg, mast::paper_pi_star_grid());
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(std::abs(rows[i].mean_style_mass - rows[i].pi_star_effective * coverage) < 1e-6);
    CHECK(rows[i].expected_style_mass == Approx(rows[i].pi_star_effective * coverage));
    if (i > 0) CHECK(rows[i].mean_style_mass > rows[i - 1].mean_style_mass);
  }
  CHECK(rows.back().clamped);
  CHECK(rows.back().pi_star_effective == mast::kMaxPiStar);
  CHECK_FALSE(rows.front().clamped);

  const auto two = mast::sweep_pi_star(scene, cfg, {0.3, 0.9});
  CHECK(two[1].mean_style_mass > two[0].mean_style_mass);
  CHECK(mast::sweep_pi_star(scene, cfg, {0.5}).size() == 1);
  CHECK(testutil::kind_of([&] { mast::sweep_pi_star(scene, cfg, {-0.1}); }) == mast::ErrorKind::InvalidInput);
}

TEST_CASE("clamped pi_star is reported") {
  PipelineConfig cfg = small_config();
  cfg.pi_star = 1.0;
  const auto report = mast::run_step(mast::generate_fixture(cfg), cfg);
  CHECK(report.pi_star_effective == mast::kMaxPiStar);
  CHECK(report.warnings.size() == 1);
}
