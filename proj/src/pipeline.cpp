#include "mast/pipeline.hpp"

#include <cmath>
#include <sstream>

#include "mast/adain.hpp"
#include "mast/digest.hpp"
#include "mast/error.hpp"
#include "mast/lqa.hpp"
#include "mast/parallel.hpp"
#include "mast/rng.hpp"
#include "mast/tensor_io.hpp"

namespace mast {

TauSetting TauSetting::parse(const std::string& text) {
  if (text == "paper-poly") return {TauMode::PaperPoly, 1.0};
  if (text == "fit") return {TauMode::Fit, 1.0};
  if (text == "oracle") return {TauMode::Oracle, 1.0};
  if (text.rfind("fixed:", 0) == 0) {
    const std::string value = text.substr(6);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size() || !(v > 0.0) || !std::isfinite(v)) {
      fail(ErrorKind::InvalidInput, "bad fixed temperature '" + text + "'");
    }
    return {TauMode::Fixed, v};
  }
  fail(ErrorKind::InvalidInput, "unknown tau mode '" + text + "' (expected paper-poly, fit, fixed:<v>, oracle)");
}

std::string TauSetting::to_string() const {
  switch (mode) {
    case TauMode::PaperPoly: return "paper-poly";
    case TauMode::Fit: return "fit";
    case TauMode::Oracle: return "oracle";
    case TauMode::Fixed: {
      std::ostringstream os;
      os << "fixed:" << fixed_value;
      return os.str();
    }
  }
  return "paper-poly";
}

MaskLayout parse_mask_layout(const std::string& text) {
  if (text == "stripes") return MaskLayout::Stripes;
  if (text == "full") return MaskLayout::Full;
  if (text == "empty") return MaskLayout::Empty;
  fail(ErrorKind::InvalidInput, "unknown mask layout '" + text + "' (expected stripes, full, empty)");
}

std::string to_string(MaskLayout layout) {
  switch (layout) {
    case MaskLayout::Stripes: return "stripes";
    case MaskLayout::Full: return "full";
    case MaskLayout::Empty: return "empty";
  }
  return "stripes";
}

void PipelineConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::InvalidInput, what);
  };
  check(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  check(pi_star > 0.0 && pi_star <= 1.0, "pi_star must lie in (0, 1]");
  check(r > 0.0 && std::isfinite(r), "r must be > 0");
  check(epsilon_hp > 0.0 && std::isfinite(epsilon_hp), "epsilon_hp must be > 0");
  check(mask_sigma >= 0.0 && std::isfinite(mask_sigma), "mask_sigma must be >= 0");
  check(token_h >= 1 && token_w >= 1, "token_grid extents must be >= 1");
  check(d >= 1 && d_v >= 1, "d and d_v must be >= 1");
  check(n_heads >= 1, "n_heads must be >= 1");
  check(n_styles >= 1, "n_styles must be >= 1");
  check(feature_channels >= 1 && latent_channels >= 1, "channel counts must be >= 1");
}

MaskSet layout_masks(const PipelineConfig& cfg) {
  const std::size_t h = cfg.token_h, w = cfg.token_w, n = cfg.n_styles;
  std::vector<Tensor> masks;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor m({h, w});
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        switch (cfg.mask_layout) {
          case MaskLayout::Stripes: m.at(y, x) = (x * n / w == i) ? 1.0f : 0.0f; break;
          case MaskLayout::Full: m.at(y, x) = 1.0f / static_cast<float>(n); break;
          case MaskLayout::Empty: m.at(y, x) = 0.0f; break;
        }
      }
    }
    masks.push_back(smooth_mask(m, cfg.mask_sigma));
  }
  return make_mask_set(std::move(masks), h, w);
}

namespace {

Tensor add_scaled(const Tensor& a, float sa, const Tensor& b, float sb) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sa * a[i] + sb * b[i];
  return out;
}

std::string tensor_digest(const std::vector<const Tensor*>& parts) {
  std::vector<std::uint8_t> bytes;
  for (const Tensor* t : parts) {
    const auto enc = encode_tensor(*t);
    bytes.insert(bytes.end(), enc.begin(), enc.end());
  }
  return sha256_hex(bytes);
}

}  // namespace

SyntheticScene generate_fixture(const PipelineConfig& cfg) {
  cfg.validate();
  const CounterRng root(cfg.seed, 0x5CE7E);
  const std::size_t t = cfg.tokens();
  SyntheticScene scene;
  for (std::size_t h = 0; h < cfg.n_heads; ++h) {
    const CounterRng r = root.substream(1000 + h);
    const Tensor x_c = random_normal(r.substream(1), {t, cfg.d});
    HeadInputs head;
    // Content queries and keys share the content features, so content-content
    // logits carry a strong self-match; style keys are unrelated to the
    // queries and give flatter logits.
    head.q_c = add_scaled(x_c, 1.0f, random_normal(r.substream(2), {t, cfg.d}), 0.5f);
    head.k_c = add_scaled(x_c, 1.0f, random_normal(r.substream(3), {t, cfg.d}), 0.5f);
    head.v_c = random_normal(r.substream(4), {t, cfg.d_v});
    head.q_cs = add_scaled(x_c, 0.3f, random_normal(r.substream(5), {t, cfg.d}), 0.9f);
    for (std::size_t i = 0; i < cfg.n_styles; ++i) {
      head.style_keys.push_back(random_normal(r.substream(10 + i), {t, cfg.d}, 0.8f));
      Tensor v = random_normal(r.substream(100 + i), {t, cfg.d_v});
      for (auto& x : v.values()) x += static_cast<float>(i + 1);
      head.style_values.push_back(std::move(v));
    }
    scene.heads.push_back(std::move(head));
  }

  scene.masks = layout_masks(cfg);

  const Shape feat{cfg.feature_channels, cfg.token_h, cfg.token_w};
  const CounterRng fr = root.substream(2000);
  scene.phi_c = random_normal(fr.substream(1), feat);
  scene.phi_cs = add_scaled(scene.phi_c, 0.6f, random_normal(fr.substream(2), feat), 0.8f);
  scene.delta_phi_cs = random_normal(fr.substream(3), feat, 0.1f);

  const Shape lat{cfg.latent_channels, cfg.token_h, cfg.token_w};
  const CounterRng lr = root.substream(3000);
  scene.z_c = random_normal(lr.substream(1), lat);
  for (std::size_t i = 0; i < cfg.n_styles; ++i) {
    Tensor z = random_normal(lr.substream(10 + i), lat, 0.5f + 0.5f * static_cast<float>(i));
    for (auto& x : z.values()) x += 0.3f * static_cast<float>(i + 1);
    scene.z_s.push_back(std::move(z));
  }
  return scene;
}

namespace {

LogitGroups head_logits(const HeadInputs& head, const Tensor& anchored) {
  LogitGroups g;
  g.key_dim = anchored.cols();
  for (const auto& k : head.style_keys) g.style.push_back(scaled_logits(anchored, k));
  g.content = scaled_logits(head.q_c, head.k_c);
  return g;
}

HeadReport run_head(const HeadInputs& head, const MassTargets& targets, const PipelineConfig& cfg,
                    const StepOptions& options) {
  HeadReport rep;
  rep.anchored_queries = anchor_queries({head.q_c, head.q_cs, cfg.lambda});
  const LogitGroups groups = head_logits(head, rep.anchored_queries);
  rep.biased_logits = apply_lama(groups, targets);

  const auto offsets = groups.group_offsets();
  rep.achieved_mass = group_masses(rep.biased_logits, offsets, 1.0);
  const std::size_t n = groups.n_styles(), t = groups.queries();
  rep.target_mass_mean.assign(n + 1, 0.0);
  rep.achieved_mass_mean.assign(n + 1, 0.0);
  for (std::size_t g = 0; g <= n; ++g) {
    const auto& target = g < n ? targets.style[g] : targets.content;
    for (std::size_t q = 0; q < t; ++q) {
      rep.target_mass_mean[g] += target[q];
      rep.achieved_mass_mean[g] += rep.achieved_mass[g][q];
      rep.max_mass_error = std::max(rep.max_mass_error, std::abs(rep.achieved_mass[g][q] - target[q]));
    }
    rep.target_mass_mean[g] /= static_cast<double>(t);
    rep.achieved_mass_mean[g] /= static_cast<double>(t);
  }

  rep.gap = sharpness_gap(groups, rep.biased_logits);
  double min_tau = 1.0;
  switch (cfg.tau_mode.mode) {
    case TauMode::PaperPoly:
      rep.tau = predict_temperature(TemperatureModel::paper_default(), rep.gap.delta);
      break;
    case TauMode::Fit:
      if (!options.fitted_model) fail(ErrorKind::InvalidInput, "tau mode 'fit' needs a fitted temperature model");
      rep.tau = predict_temperature(*options.fitted_model, rep.gap.delta);
      min_tau = options.fitted_model->clamp_min;
      break;
    case TauMode::Fixed:
      rep.tau = cfg.tau_mode.fixed_value;
      min_tau = rep.tau;
      break;
    case TauMode::Oracle:
      rep.oracle = solve_temperature(rep.biased_logits, rep.gap.content_sharpness);
      rep.tau = rep.oracle->tau;
      min_tau = rep.tau;
      break;
  }

  rep.attention_weights = apply_sts(rep.biased_logits, rep.tau, min_tau);
  rep.output = attention_output(rep.biased_logits, concat_values(head.style_values, head.v_c), rep.tau);
  rep.post_sharpness = mean_log_p_max(rep.biased_logits, rep.tau);
  rep.entropy_tau1 = mean_row_entropy(rep.biased_logits, 1.0);
  rep.entropy_tau = mean_row_entropy(rep.biased_logits, rep.tau);
  rep.std_sharpness_content = mean_row_std(groups.content);
  rep.std_sharpness_concat = mean_row_std(rep.biased_logits);
  return rep;
}

MaskSet step_masks(const SyntheticScene& scene, const PipelineConfig& cfg, const StepOptions& options) {
  const MaskSet& ms = options.masks ? *options.masks : scene.masks;
  if (ms.n_styles() != cfg.n_styles) {
    fail(ErrorKind::InvalidInput, std::to_string(ms.n_styles()) + " masks for " + std::to_string(cfg.n_styles) +
                                      " styles");
  }
  if (ms.height() != cfg.token_h || ms.width() != cfg.token_w) {
    fail(ErrorKind::InvalidInput, "masks must be at token resolution " + std::to_string(cfg.token_h) + "x" +
                                      std::to_string(cfg.token_w));
  }
  return validate_feasibility(ms, cfg.pi_star, options.feasibility);
}

}  // namespace

StepReport run_step(const SyntheticScene& scene, const PipelineConfig& cfg, const StepOptions& options) {
  cfg.validate();
  if (scene.heads.size() != cfg.n_heads) fail(ErrorKind::InvalidInput, "scene does not match n_heads");
  const MaskSet masks = step_masks(scene, cfg, options);

  StepReport report;
  report.pi_star_requested = cfg.pi_star;
  report.tau_mode = cfg.tau_mode.to_string();
  const MassTargets targets = make_mass_targets(masks, cfg.pi_star);
  report.pi_star_effective = targets.pi_star;
  if (targets.pi_star != cfg.pi_star) {
    std::ostringstream os;
    os << "pi_star " << cfg.pi_star << " clamped to " << targets.pi_star << " to keep a positive content mass";
    report.warnings.push_back(os.str());
  }

  report.adain_init = region_adain_init(scene.z_c, scene.z_s, masks);

  report.heads.resize(cfg.n_heads);
  parallel_for(cfg.n_heads, [&](std::size_t h) { report.heads[h] = run_head(scene.heads[h], targets, cfg, options); });

  const std::size_t t = cfg.tokens(), dv = cfg.d_v;
  report.attention_output = Tensor({t, cfg.n_heads * dv});
  for (std::size_t h = 0; h < cfg.n_heads; ++h) {
    for (std::size_t q = 0; q < t; ++q) {
      const auto src = report.heads[h].output.row(q);
      std::copy(src.begin(), src.end(), report.attention_output.row(q).begin() + static_cast<std::ptrdiff_t>(h * dv));
    }
  }

  const ResidualFeatures features{scene.phi_c, scene.phi_cs, scene.delta_phi_cs};
  const HighPassSpec spec{cfg.r, cfg.epsilon_hp};
  DetailInjection ddi = inject_details_full(features, spec, options.disable_ddi ? std::optional<double>(0.0) : std::nullopt);
  report.omega = ddi.omega;
  report.ddi_output = std::move(ddi.output);
  report.ddi_high_freq = std::move(ddi.high_freq);

  std::vector<const Tensor*> anchored, biased, weights;
  for (const auto& h : report.heads) {
    anchored.push_back(&h.anchored_queries);
    biased.push_back(&h.biased_logits);
    weights.push_back(&h.attention_weights);
  }
  report.checksums["adain_init"] = tensor_digest({&report.adain_init});
  report.checksums["anchored_queries"] = tensor_digest(anchored);
  report.checksums["biased_logits"] = tensor_digest(biased);
  report.checksums["attention_weights"] = tensor_digest(weights);
  report.checksums["attention_output"] = tensor_digest({&report.attention_output});
  report.checksums["ddi_high_freq"] = tensor_digest({&report.ddi_high_freq});
  report.checksums["ddi_output"] = tensor_digest({&report.ddi_output});
  return report;
}

std::vector<SweepRow> sweep_pi_star(const SyntheticScene& scene, const PipelineConfig& cfg,
                                    const std::vector<double>& values) {
  cfg.validate();
  if (values.empty()) fail(ErrorKind::InvalidInput, "empty pi_star sweep");
  const MaskSet& ms = scene.masks;
  double coverage = 0.0;
  for (std::size_t q = 0; q < ms.tokens(); ++q) coverage += ms.coverage(q);
  coverage /= static_cast<double>(ms.tokens());

  std::vector<LogitGroups> groups;
  for (const auto& head : scene.heads) {
    groups.push_back(head_logits(head, anchor_queries({head.q_c, head.q_cs, cfg.lambda})));
  }

  std::vector<SweepRow> rows;
  for (double requested : values) {
    if (!(requested > 0.0) || !std::isfinite(requested)) fail(ErrorKind::InvalidInput, "pi_star values must be > 0");
    SweepRow row;
    row.pi_star_requested = requested;
    row.pi_star_effective = std::min(requested, kMaxPiStar);
    row.clamped = row.pi_star_effective != requested;
    const MaskSet checked = validate_feasibility(ms, row.pi_star_effective);
    const MassTargets targets = make_mass_targets(checked, row.pi_star_effective);
    row.expected_style_mass = row.pi_star_effective * coverage;
    for (const auto& g : groups) {
      const Tensor biased = apply_lama(g, targets);
      const auto masses = group_masses(biased, g.group_offsets(), 1.0);
      double style = 0.0;
      for (std::size_t i = 0; i + 1 < masses.size(); ++i) {
        for (double m : masses[i]) style += m;
      }
      row.mean_style_mass += style / static_cast<double>(g.queries());
      row.mean_entropy += mean_row_entropy(biased, 1.0);
    }
    row.mean_style_mass /= static_cast<double>(groups.size());
    row.mean_entropy /= static_cast<double>(groups.size());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mast
