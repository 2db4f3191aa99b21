#include "mast/c_api.h"

#include <cstring>
#include <sstream>
#include <string>

#include "mast/ddi.hpp"
#include "mast/error.hpp"
#include "mast/json_io.hpp"
#include "mast/lama.hpp"
#include "mast/lqa.hpp"
#include "mast/pipeline.hpp"
#include "mast/sts.hpp"

namespace {

using mast::ErrorKind;
using mast::Tensor;

int code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return MAST_INVALID_INPUT;
    case ErrorKind::DegenerateInput: return MAST_DEGENERATE_INPUT;
    case ErrorKind::DegenerateLogits: return MAST_DEGENERATE_LOGITS;
    case ErrorKind::FormatError: return MAST_FORMAT_ERROR;
    case ErrorKind::InfeasibleMasks: return MAST_INFEASIBLE_MASKS;
    case ErrorKind::SingularFit: return MAST_SINGULAR_FIT;
    case ErrorKind::EmptyBand: return MAST_EMPTY_BAND;
    case ErrorKind::Io: return MAST_IO_ERROR;
  }
  return MAST_INTERNAL_ERROR;
}

void set_status(mast_status* status, int code, const char* message) {
  if (!status) return;
  status->code = code;
  std::strncpy(status->message, message, MAST_MESSAGE_CAPACITY - 1);
  status->message[MAST_MESSAGE_CAPACITY - 1] = '\0';
}

template <typename Fn>
int guarded(mast_status* status, Fn&& fn) {
  try {
    fn();
    set_status(status, MAST_OK, "ok");
    return MAST_OK;
  } catch (const mast::Error& e) {
    const int code = code_for(e.kind());
    set_status(status, code, e.what());
    return code;
  } catch (const std::exception& e) {
    set_status(status, MAST_INTERNAL_ERROR, e.what());
    return MAST_INTERNAL_ERROR;
  } catch (...) {
    set_status(status, MAST_INTERNAL_ERROR, "unknown error");
    return MAST_INTERNAL_ERROR;
  }
}

mast::Shape view_shape(const mast_buffer_view& v, const char* name) {
  if (v.dtype != MAST_FLOAT32) mast::fail(ErrorKind::InvalidInput, std::string(name) + ": element type must be float32");
  if (v.rank < 1 || v.rank > MAST_MAX_RANK) {
    mast::fail(ErrorKind::InvalidInput, std::string(name) + ": rank must lie in 1..4");
  }
  return mast::Shape(v.shape, v.shape + v.rank);
}

Tensor read_view(const float* base, const mast_buffer_view& v, const char* name) {
  if (!base) mast::fail(ErrorKind::InvalidInput, std::string(name) + ": null input buffer");
  mast::Shape shape = view_shape(v, name);
  const std::size_t n = mast::shape_size(shape);
  return Tensor(std::move(shape), std::vector<float>(base + v.offset, base + v.offset + n));
}

void write_view(float* base, const mast_buffer_view& v, const Tensor& t, const char* name) {
  if (!base) mast::fail(ErrorKind::InvalidInput, std::string(name) + ": null output buffer");
  const mast::Shape shape = view_shape(v, name);
  if (shape != t.shape()) {
    mast::fail(ErrorKind::InvalidInput, std::string(name) + ": output view has shape " + mast::shape_string(shape) +
                                            " but the result has shape " + mast::shape_string(t.shape()));
  }
  std::memcpy(base + v.offset, t.data(), t.size() * sizeof(float));
}

void require_rows(const Tensor& a, const char* an, const Tensor& b, const char* bn) {
  if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows()) {
    mast::fail(ErrorKind::InvalidInput, std::string("row count mismatch: ") + an + " " + mast::shape_string(a.shape()) +
                                            " vs " + bn + " " + mast::shape_string(b.shape()));
  }
}

}  // namespace

extern "C" {

uint32_t mast_api_version(void) { return MAST_API_VERSION; }

int mast_anchor_queries(const float* in, mast_buffer_view q_c, mast_buffer_view q_cs, double lambda, float* out,
                        mast_buffer_view result, mast_status* status) {
  return guarded(status, [&] {
    const Tensor qc = read_view(in, q_c, "q_c");
    const Tensor qcs = read_view(in, q_cs, "q_cs");
    write_view(out, result, mast::anchor_queries({qc, qcs, lambda}), "result");
  });
}

int mast_apply_lama(const float* in, const mast_buffer_view* style_logits, size_t n_styles,
                    mast_buffer_view content_logits, const mast_buffer_view* masks, double pi_star, float* out,
                    mast_buffer_view result, mast_status* status) {
  return guarded(status, [&] {
    if (n_styles > 0 && (!style_logits || !masks)) mast::fail(ErrorKind::InvalidInput, "null style or mask views");
    mast::LogitGroups groups;
    groups.content = read_view(in, content_logits, "content_logits");
    if (groups.content.rank() != 2) mast::fail(ErrorKind::InvalidInput, "content_logits must be rank 2");
    const std::size_t tq = groups.content.rows();
    std::vector<Tensor> mask_tensors;
    for (std::size_t i = 0; i < n_styles; ++i) {
      groups.style.push_back(read_view(in, style_logits[i], "style_logits"));
      require_rows(groups.style.back(), "style_logits", groups.content, "content_logits");
      Tensor m = read_view(in, masks[i], "mask");
      if (m.size() != tq) {
        mast::fail(ErrorKind::InvalidInput, "mask " + mast::shape_string(m.shape()) + " does not have one entry per query of content_logits " +
                                                mast::shape_string(groups.content.shape()));
      }
      mask_tensors.push_back(m.reshaped({tq, 1}));
    }
    groups.validate();
    mast::MaskSet ms = n_styles > 0 ? mast::make_mask_set(std::move(mask_tensors)) : mast::MaskSet{};
    mast::MassTargets targets;
    if (n_styles > 0) {
      ms = mast::validate_feasibility(ms, pi_star);
      targets = mast::make_mass_targets(ms, pi_star);
    } else {
      targets = mast::uniform_mass_targets({}, tq);
    }
    write_view(out, result, mast::apply_lama(groups, targets), "result");
  });
}

int mast_sharpness_gap(const float* in, mast_buffer_view content_logits, mast_buffer_view biased_logits,
                       double* delta, double* content_sharpness, double* concat_sharpness, mast_status* status) {
  return guarded(status, [&] {
    mast::LogitGroups groups;
    groups.content = read_view(in, content_logits, "content_logits");
    const Tensor biased = read_view(in, biased_logits, "biased_logits");
    require_rows(groups.content, "content_logits", biased, "biased_logits");
    const mast::SharpnessGap gap = mast::sharpness_gap(groups, biased);
    if (delta) *delta = gap.delta;
    if (content_sharpness) *content_sharpness = gap.content_sharpness;
    if (concat_sharpness) *concat_sharpness = gap.concat_sharpness;
  });
}

int mast_predict_temperature(double delta, const double* coefficients, size_t n_coefficients, double clamp_min,
                             double* tau, mast_status* status) {
  return guarded(status, [&] {
    if (!tau) mast::fail(ErrorKind::InvalidInput, "null tau output");
    mast::TemperatureModel model = mast::TemperatureModel::paper_default();
    if (coefficients) {
      if (n_coefficients == 0) mast::fail(ErrorKind::InvalidInput, "empty coefficient list");
      model.coefficients.assign(coefficients, coefficients + n_coefficients);
      model.clamp_min = clamp_min;
    }
    *tau = mast::predict_temperature(model, delta);
  });
}

int mast_apply_sts(const float* in, mast_buffer_view biased_logits, double tau, float* out, mast_buffer_view result,
                   mast_status* status) {
  return guarded(status, [&] {
    write_view(out, result, mast::apply_sts(read_view(in, biased_logits, "biased_logits"), tau), "result");
  });
}

int mast_inject_details(const float* in, mast_buffer_view phi_c, mast_buffer_view phi_cs,
                        mast_buffer_view delta_phi_cs, double radius, double epsilon, float* out,
                        mast_buffer_view result, double* omega, mast_status* status) {
  return guarded(status, [&] {
    const mast::ResidualFeatures f{read_view(in, phi_c, "phi_c"), read_view(in, phi_cs, "phi_cs"),
                                   read_view(in, delta_phi_cs, "delta_phi_cs")};
    const mast::DetailInjection d = mast::inject_details_full(f, mast::HighPassSpec{radius, epsilon});
    write_view(out, result, d.output, "result");
    if (omega) *omega = d.omega;
  });
}

int mast_hook_demo(const char* config_json, char* report, size_t capacity, size_t* needed, mast_status* status) {
  return guarded(status, [&] {
    const mast::PipelineConfig cfg =
        mast::config_from_json(mast::parse_json(config_json ? config_json : "{}", "hook config"));
    const mast::StepReport rep = mast::run_step(mast::generate_fixture(cfg), cfg);
    const std::string text = mast::report_to_json(rep).dump();
    if (needed) *needed = text.size() + 1;
    if (!report || capacity < text.size() + 1) {
      mast::fail(ErrorKind::InvalidInput, "report buffer too small, need " + std::to_string(text.size() + 1) + " bytes");
    }
    std::memcpy(report, text.c_str(), text.size() + 1);
  });
}

}  // extern "C"
