// Acceptance suite. Each criterion prints one PASS/FAIL line with its
// measured quantities; the exit status is non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "mast/c_api.h"
#include "mast/calibration.hpp"
#include "mast/cli.hpp"
#include "mast/ddi.hpp"
#include "mast/diagnostics.hpp"
#include "mast/fft.hpp"
#include "mast/lama.hpp"
#include "mast/numerics.hpp"
#include "mast/pipeline.hpp"
#include "mast/sts.hpp"
#include "mast/tensor_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using mast::Tensor;
using oracle::ld;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

struct Criterion {
  std::string name;
  double time_limit_s;  // 0 = none
  std::function<void(Outcome&)> body;
};

mast::LogitGroups random_groups(oracle::Random& rng, std::size_t n, std::size_t tq, std::size_t max_t, double scale) {
  mast::LogitGroups g;
  for (std::size_t i = 0; i < n; ++i) g.style.push_back(rng.tensor({tq, rng.index(1, max_t)}, scale));
  g.content = rng.tensor({tq, rng.index(1, max_t)}, scale);
  return g;
}

// ------------------------------------------------------------------ LAMA

void mass_conservation(Outcome& o) {
  oracle::Random rng(1001);
  const std::size_t ns[] = {1, 2, 3, 5};
  double worst_target = 0, worst_total = 0;
  std::size_t rows = 0, max_width = 0;
  for (int fixture = 0; fixture < 1000; ++fixture) {
    const std::size_t n = ns[fixture % 4];
    const std::size_t tq = rng.index(1, 16);
    const std::size_t max_t = fixture % 10 == 0 ? 1024 : rng.index(1, 256);
    const auto g = random_groups(rng, n, tq, max_t, rng.uniform(0.1, 6.0));
    std::vector<Tensor> masks(n, Tensor({tq, 1}));
    for (std::size_t q = 0; q < tq; ++q) {
      double left = 1.0;
      for (auto& m : masks) {
        const double v = rng.uniform() < 0.15 ? 0.0 : rng.uniform(0.0, left);
        m[q] = static_cast<float>(v);
        left -= v;
      }
    }
    const auto targets = mast::make_mass_targets(mast::make_mask_set(masks), rng.uniform(0.05, 1.0));
    const Tensor biased = mast::apply_lama(g, targets);
    const auto offsets = g.group_offsets();
    max_width = std::max(max_width, g.concat_width());
    for (std::size_t q = 0; q < tq; ++q) {
      // masses recomputed from the stored row with the long-double oracle
      const auto masses = oracle::group_masses(biased.row(q), offsets);
      ld total = 0;
      for (std::size_t i = 0; i <= n; ++i) {
        const double want = i < n ? targets.style[i][q] : targets.content[q];
        worst_target = std::max(worst_target, static_cast<double>(std::abs(masses[i] - want)));
        total += masses[i];
      }
      worst_total = std::max(worst_total, static_cast<double>(std::abs(total - 1)));
      ++rows;
    }
  }
  o.detail << "fixtures=1000 rows=" << rows << " max_concat_width=" << max_width << " max|mass-target|=" << worst_target
           << " max|sum-1|=" << worst_total;
  o.require(worst_target < 1e-6, "mass within 1e-6 of target");
  o.require(worst_total < 1e-9, "masses sum to 1 within 1e-9");
}

void closed_form_cases(Outcome& o) {
  struct Case {
    const char* name;
    Tensor style, content;
    double target, bias;
  };
  const Case cases[] = {
      {"symmetric", Tensor::from_rows({{0, 0}}), Tensor::from_rows({{0, 0}}), 0.5, 0.0},
      {"equal-partitions", Tensor::from_rows({{0, 0}}), Tensor::from_rows({{0, 0}}), 0.9, 2.197225},
      {"asymmetric", Tensor::from_rows({{1, 0}}), Tensor::from_rows({{0}}), 0.75, std::log(3.0) - std::log(std::exp(1.0) + 1.0)},
  };
  for (const auto& c : cases) {
    mast::LogitGroups g;
    g.style = {c.style};
    g.content = c.content;
    const std::vector<double> t{c.target};
    const double b = mast::compute_bias(g, mast::uniform_mass_targets(t, 1)).values[0][0];
    oracle::Row row;
    for (float v : c.style.row(0)) row.push_back(v + static_cast<ld>(b));
    for (float v : c.content.row(0)) row.push_back(v);
    const auto p = oracle::softmax(row);
    ld mass = 0;
    for (std::size_t j = 0; j < c.style.cols(); ++j) mass += p[j];
    const double err = static_cast<double>(std::abs(mass - c.target));
    o.detail << c.name << ": b=" << std::setprecision(9) << b << " |mass-target|=" << std::setprecision(3) << err << "  ";
    o.require(err < 1e-9, std::string(c.name) + " mass within 1e-9");
    o.require(std::abs(b - c.bias) < 5e-7, std::string(c.name) + " bias value");
  }
}

void single_style_reduction(Outcome& o) {
  oracle::Random rng(1003);
  std::size_t compared = 0, mismatched = 0;
  for (int fixture = 0; fixture < 100; ++fixture) {
    const std::size_t tq = rng.index(1, 8);
    const auto g = random_groups(rng, 1, tq, 128, rng.uniform(0.1, 5.0));
    const std::vector<double> t{rng.uniform(0.01, 0.99)};
    const auto b = mast::compute_bias(g, mast::uniform_mass_targets(t, tq));
    for (std::size_t q = 0; q < tq; ++q) {
      const double single = mast::single_style_bias(g.style[0].row(q), g.content.row(q), t[0]);
      if (std::memcmp(&single, &b.values[0][q], sizeof(double)) != 0) ++mismatched;
      ++compared;
    }
  }
  o.detail << "fixtures=100 rows=" << compared << " bitwise mismatches=" << mismatched;
  o.require(mismatched == 0, "bitwise equality");
}

// ------------------------------------------------------------------- STS

void monotonicity(Outcome& o) {
  oracle::Random rng(1004);
  double worst_lpm = 0, worst_entropy = 0;
  std::size_t evaluations = 0;
  for (int r = 0; r < 1000; ++r) {
    const Tensor row = rng.tensor({1, rng.index(2, 256)}, rng.uniform(0.05, 5.0));
    const auto span = row.row(0);
    double prev_lpm = mast::log_p_max(span, 0.5);
    double prev_h = mast::mean_row_entropy(row, 0.5);
    for (int k = 1; k <= 750; ++k) {
      const double tau = 0.5 + 0.01 * k;
      const double lpm = mast::log_p_max(span, tau);
      const double h = mast::mean_row_entropy(row, tau);
      worst_lpm = std::min(worst_lpm, lpm - prev_lpm);
      worst_entropy = std::max(worst_entropy, h - prev_h);
      prev_lpm = lpm;
      prev_h = h;
      ++evaluations;
    }
  }
  o.detail << "rows=1000 steps=" << evaluations << " min d(log p_max)=" << worst_lpm << " max d(entropy)=" << worst_entropy;
  o.require(worst_lpm >= -1e-7, "log p_max non-decreasing");
  o.require(worst_entropy <= 1e-7, "entropy non-increasing");
}

void temperature_oracle(Outcome& o) {
  const auto two = mast::solve_temperature(Tensor::from_rows({{1, 0}}), std::log(0.9));
  o.detail << "two-token tau*=" << std::setprecision(6) << two.tau << " (ln 9=" << std::log(9.0) << ")";
  o.require(std::abs(two.tau - std::log(9.0)) <= 0.01, "two-token tau within 0.01 of ln 9");

  oracle::Random rng(1005);
  double worst_excess = 0;
  int fixtures = 0;
  for (int f = 0; f < 200; ++f) {
    const Tensor logits = rng.tensor({rng.index(1, 32), rng.index(2, 200)}, rng.uniform(0.2, 3.0));
    const double target = mast::mean_log_p_max(logits, 1.0) + rng.uniform(-0.3, 1.0);
    if (target >= 0.0) continue;
    const auto sol = mast::solve_temperature(logits, target);
    const double achieved = static_cast<double>(oracle::mean_log_p_max(logits, sol.tau));
    worst_excess = std::max(worst_excess, std::abs(achieved - target) - sol.residual);
    ++fixtures;
  }
  o.detail << " general fixtures=" << fixtures << " max(|achieved-target|-residual)=" << worst_excess;
  o.require(worst_excess <= 1e-9, "achieved sharpness within the reported residual");
}

void calibration_regression(Outcome& o) {
  const auto truth = mast::TemperatureModel::paper_default();
  mast::CalibrationDataset exact;
  for (int i = 0; i <= 400; ++i) {
    const double d = -0.5 + 0.01 * i;
    exact.samples.push_back({d, truth.raw(d)});
  }
  const auto fit = mast::fit_temperature_model(exact, 2);
  double coeff_err = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    coeff_err = std::max(coeff_err, std::abs(fit.model.coefficients[k] - truth.coefficients[k]));
  }
  o.detail << "noiseless: max|coef err|=" << coeff_err << " R2=" << std::setprecision(15) << fit.r_squared
           << std::setprecision(6);
  o.require(coeff_err < 1e-6, "coefficients recovered within 1e-6");
  o.require(std::abs(fit.r_squared - 1.0) < 1e-12, "R2 = 1 on exact data");

  mast::CalibrationConfig cfg;
  cfg.samples = 10000;
  cfg.seed = 2024;
  const auto data = mast::generate_calibration_dataset(cfg);
  const auto [train, holdout] = mast::split_holdout(data);
  double prev = -1;
  bool nondecreasing = true;
  double r2_deg2 = 0, holdout_deg2 = 0;
  o.detail << "; synthetic n=" << cfg.samples << " R2(train/holdout) by degree:";
  for (int degree = 1; degree <= 4; ++degree) {
    const auto f = mast::fit_temperature_model(train, degree);
    const double h = mast::r_squared(f.model, holdout.samples);
    o.detail << " d" << degree << "=" << std::setprecision(4) << f.r_squared << "/" << h;
    if (f.r_squared < prev - 1e-12) nondecreasing = false;
    prev = f.r_squared;
    if (degree == 2) {
      r2_deg2 = f.r_squared;
      holdout_deg2 = h;
    }
  }
  o.require(r2_deg2 >= 0.9 && holdout_deg2 >= 0.9, "degree-2 R2 >= 0.9");
  o.require(nondecreasing, "R2 non-decreasing in degree");
}

void clamp_behaviour(Outcome& o) {
  const auto m = mast::TemperatureModel::paper_default();
  const double at0 = mast::predict_temperature(m, 0.0);
  const double at_neg = mast::predict_temperature(m, -5.0);
  o.detail << "tau(0)=" << std::setprecision(10) << at0 << " tau(-5)=" << at_neg << " raw(-5)=" << m.raw(-5.0);
  o.require(std::abs(at0 - 1.00998) < 1e-12, "tau(0) = 1.00998");
  o.require(at_neg == 1.0, "tau(-5) clamps to exactly 1");
}

// ------------------------------------------------------------------- DDI

void ddi_suite(Outcome& o) {
  const mast::HighPassSpec spec{};
  const double mask_val = mast::highpass_value(spec.radius * std::sqrt(2.0), spec);
  o.detail << "mask(r*sqrt2)=" << std::setprecision(8) << mask_val;
  o.require(std::abs(mask_val - (1.0 - std::exp(-1.0))) < 1e-6, "mask value 1 - e^-1");

  double const_max = 0;
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{16, 16}, {31, 20}, {64, 64}}) {
    const Tensor x({2, h, w}, -3.75f);
    const Tensor hp = mast::extract_high_freq(x, spec);
    for (float v : hp.values()) const_max = std::max(const_max, static_cast<double>(std::abs(v)));
  }
  o.detail << " constant max-abs=" << std::setprecision(3) << const_max;
  o.require(const_max < 1e-4, "constant channel high-frequency output");

  oracle::Random rng(1008);
  const Tensor a = rng.tensor({3, 8, 8});
  Tensor neg = a;
  for (auto& v : neg.values()) v = -v;
  Tensor e1({1, 4, 4}), e2({1, 4, 4});
  for (std::size_t i = 0; i < 16; ++i) (i % 2 == 0 ? e1 : e2)[i] = static_cast<float>(rng.normal());
  const double w_same = mast::discrepancy_weight(a, a), w_neg = mast::discrepancy_weight(neg, a),
               w_orth = mast::discrepancy_weight(e1, e2);
  o.detail << " omega(same/neg/orth)=" << std::setprecision(9) << w_same << "/" << w_neg << "/" << w_orth;
  o.require(std::abs(w_same) < 1e-6 && std::abs(w_neg - 2) < 1e-6 && std::abs(w_orth - 1) < 1e-6, "omega cases");

  double worst_rt = 0, worst_dft = 0;
  for (std::size_t n : {2, 5, 8, 17, 32, 64}) {
    const Tensor x = rng.tensor({n, n});
    const auto spec2 = mast::fft2(x);
    worst_rt = std::max(worst_rt, mast::max_abs_diff(mast::ifft2(spec2), x));
    const auto direct = oracle::dft2_real(x);
    for (std::size_t k = 0; k < direct.size(); ++k) {
      worst_dft = std::max(worst_dft, static_cast<double>(std::abs(direct[k] - oracle::cld(spec2.re[k], spec2.im[k]))));
    }
  }
  o.detail << " fft roundtrip=" << std::setprecision(3) << worst_rt << " fft-vs-dft=" << worst_dft;
  o.require(worst_rt < 1e-5 && worst_dft < 1e-5, "fft agrees with the direct DFT");
}

// -------------------------------------------------------------- pipeline

void end_to_end_leakage(Outcome& o) {
  mast::PipelineConfig cfg;
  cfg.mask_sigma = 0.0;
  cfg.tau_mode = mast::TauSetting::parse("fixed:1");
  const auto scene = mast::generate_fixture(cfg);
  const auto report = mast::run_step(scene, cfg);
  double cross = 0, own = 0, content = 0;
  for (const auto& head : report.heads) {
    for (std::size_t q = 0; q < cfg.tokens(); ++q) {
      const std::size_t owner = scene.masks.masks[0][q] > 0.5f ? 0 : 1;
      cross = std::max(cross, head.achieved_mass[1 - owner][q]);
      own = std::max(own, std::abs(head.achieved_mass[owner][q] - 0.9));
      content = std::max(content, std::abs(head.achieved_mass[2][q] - 0.1));
    }
  }
  o.detail << "tokens=" << cfg.tokens() << " heads=" << cfg.n_heads << " max cross=" << cross << " max|own-0.9|=" << own
           << " max|content-0.1|=" << content;
  o.require(cross < 1e-6, "cross-style mass < 1e-6");
  o.require(own < 1e-6, "own-style mass 0.9");
  o.require(content < 1e-6, "content mass 0.1");
}

void pi_star_sweep(Outcome& o) {
  const mast::PipelineConfig cfg;
  const auto scene = mast::generate_fixture(cfg);
  double coverage = 0;
  for (std::size_t q = 0; q < scene.masks.tokens(); ++q) coverage += scene.masks.coverage(q);
  coverage /= static_cast<double>(scene.masks.tokens());
  const auto rows = mast::sweep_pi_star(scene, cfg, mast::paper_pi_star_grid());
  bool increasing = true;
  double worst = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    worst = std::max(worst, std::abs(rows[i].mean_style_mass - rows[i].pi_star_effective * coverage));
    if (i > 0 && !(rows[i].mean_style_mass > rows[i - 1].mean_style_mass)) increasing = false;
    o.detail << std::setprecision(4) << rows[i].pi_star_requested << (rows[i].clamped ? "*" : "") << ":"
             << std::setprecision(6) << rows[i].mean_style_mass << " ";
  }
  o.detail << "max|mass-pi*mean(M)|=" << std::setprecision(3) << worst;
  o.require(rows.size() == 6, "six rows");
  o.require(increasing, "strictly increasing");
  o.require(worst < 1e-6, "matches pi* * mean(M)");
  o.require(rows.back().clamped, "1.00 is clamped");
}

// ------------------------------------------------------------ diagnostics

void boundary_diagnostic(Outcome& o) {
  std::size_t lower = 0;
  double worst_ratio = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto stats = mast::paired_boundary_stats(mast::make_composite_pair(7, i));
    if (stats.smooth.boundary_band_mean < stats.hard.boundary_band_mean) ++lower;
    worst_ratio = std::max(worst_ratio, stats.smooth.boundary_band_mean / stats.hard.boundary_band_mean);
  }
  o.detail << "pairs=20 smooth<hard in " << lower << " max(smooth/hard)=" << std::setprecision(4) << worst_ratio;
  o.require(lower == 20, "smooth band mean lower in every pair");
}

// -------------------------------------------------------------------- CLI

void cli_determinism(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / ("mast_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::ostringstream sink;
  const std::vector<std::string> common{"run", "--seed", "99", "--steps", "2", "--tau-mode", "oracle"};
  for (const char* sub : {"a", "b"}) {
    auto args = common;
    args.insert(args.end(), {"--out", (root / sub).string()});
    const int code = mast::run_cli(args, sink, sink);
    o.require(code == 0, std::string("run ") + sub + " exit code");
  }
  std::size_t files = 0, differing = 0;
  if (fs::exists(root / "a" / "tensors")) {
    for (const auto& entry : fs::recursive_directory_iterator(root / "a" / "tensors")) {
      if (!entry.is_regular_file()) continue;
      const fs::path other = root / "b" / fs::relative(entry.path(), root / "a");
      if (!fs::exists(other) || mast::read_file_bytes(entry.path()) != mast::read_file_bytes(other)) ++differing;
      ++files;
    }
  }
  o.detail << "tensor files=" << files << " differing=" << differing;
  o.require(files > 0 && differing == 0, "byte-identical tensor outputs");
  fs::remove_all(root);
}

// -------------------------------------------------------------- secondary

mast_buffer_view push(std::vector<float>& pool, const Tensor& t) {
  mast_buffer_view v{};
  v.offset = pool.size();
  v.rank = static_cast<std::uint32_t>(t.rank());
  for (std::size_t i = 0; i < t.rank(); ++i) v.shape[i] = t.extent(i);
  pool.insert(pool.end(), t.values().begin(), t.values().end());
  return v;
}

void binding_parity(Outcome& o) {
  oracle::Random rng(1012);
  double worst = 0;
  for (int f = 0; f < 20; ++f) {
    const std::size_t tq = rng.index(1, 24);
    const auto g = random_groups(rng, 2, tq, 64, 2.0);
    Tensor m0({tq}), m1({tq});
    for (std::size_t q = 0; q < tq; ++q) {
      m0[q] = static_cast<float>(rng.uniform(0.0, 0.5));
      m1[q] = static_cast<float>(rng.uniform(0.0, 0.5));
    }
    std::vector<float> pool;
    const mast_buffer_view styles[2] = {push(pool, g.style[0]), push(pool, g.style[1])};
    const auto content = push(pool, g.content);
    const mast_buffer_view masks[2] = {push(pool, m0), push(pool, m1)};
    std::vector<float> out(tq * g.concat_width());
    mast_buffer_view ov{};
    ov.rank = 2;
    ov.shape[0] = tq;
    ov.shape[1] = g.concat_width();
    mast_status st{};
    if (mast_apply_lama(pool.data(), styles, 2, content, masks, 0.9, out.data(), ov, &st) != MAST_OK) {
      o.require(false, st.message);
      return;
    }
    const Tensor native = mast::apply_lama(
        g, mast::make_mass_targets(mast::make_mask_set({m0.reshaped({tq, 1}), m1.reshaped({tq, 1})}), 0.9));
    for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, static_cast<double>(std::abs(out[i] - native[i])));
  }
  o.detail << "fixtures=20 max|binding-native|=" << worst;
  o.require(worst < 1e-6, "binding within 1e-6 of native");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"[PRIMARY] mass conservation and target matching", 30.0, mass_conservation},
      {"[PRIMARY] closed-form bias vs direct softmax", 0.0, closed_form_cases},
      {"[PRIMARY] N=1 reduction to the single-style bias", 0.0, single_style_reduction},
      {"[PRIMARY] sharpness and entropy monotonicity in tau", 0.0, monotonicity},
      {"[PRIMARY] temperature oracle", 0.0, temperature_oracle},
      {"[PRIMARY] calibration regression", 0.0, calibration_regression},
      {"[PRIMARY] temperature clamp", 0.0, clamp_behaviour},
      {"[PRIMARY] detail-injection suite", 0.0, ddi_suite},
      {"[PRIMARY] end-to-end leakage", 10.0, end_to_end_leakage},
      {"[PRIMARY] pi_star sweep", 0.0, pi_star_sweep},
      {"[PRIMARY] boundary diagnostic on paired composites", 0.0, boundary_diagnostic},
      {"[PRIMARY] run determinism", 0.0, cli_determinism},
      {"[SECONDARY] binding parity", 0.0, binding_parity},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      std::ostringstream os;
      os << "runtime " << secs << " s >= " << c.time_limit_s << " s";
      o.require(false, os.str());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << "  (" << std::fixed << std::setprecision(2) << secs << " s)  ";
    std::cout.unsetf(std::ios::floatfield);
    std::cout << o.detail.str() << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
