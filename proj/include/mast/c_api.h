/*
 * C-compatible entry points for language bindings.
 *
 * Buffers are described by mast_buffer_view: an element offset into a
 * caller-owned contiguous float32 array plus a row-major shape. Every call
 * takes one input base pointer (all input views index into it) and one output
 * base pointer (all output views index into it). Inputs are never written.
 * The library keeps no state between calls; calls on disjoint output buffers
 * may run concurrently.
 *
 * Every function returns the status code and, when `status` is not NULL,
 * fills it with the code and a message.
 */
#ifndef MAST_C_API_H
#define MAST_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Bumped together with the tensor file format version. */
#define MAST_API_VERSION 1u
#define MAST_MAX_RANK 4
#define MAST_MESSAGE_CAPACITY 512

typedef enum mast_code {
  MAST_OK = 0,
  MAST_INVALID_INPUT = 1,
  MAST_DEGENERATE_INPUT = 2,
  MAST_DEGENERATE_LOGITS = 3,
  MAST_FORMAT_ERROR = 4,
  MAST_INFEASIBLE_MASKS = 5,
  MAST_SINGULAR_FIT = 6,
  MAST_EMPTY_BAND = 7,
  MAST_IO_ERROR = 8,
  MAST_INTERNAL_ERROR = 9
} mast_code;

typedef enum mast_dtype { MAST_FLOAT32 = 0 } mast_dtype;

typedef struct mast_buffer_view {
  size_t offset; /* in elements from the base pointer */
  uint32_t rank; /* 1..MAST_MAX_RANK */
  size_t shape[MAST_MAX_RANK];
  uint32_t dtype; /* MAST_FLOAT32 */
} mast_buffer_view;

typedef struct mast_status {
  int code;
  char message[MAST_MESSAGE_CAPACITY];
} mast_status;

uint32_t mast_api_version(void);

/* out = lambda * q_c + (1 - lambda) * q_cs; all views T x d. */
int mast_anchor_queries(const float* in, mast_buffer_view q_c, mast_buffer_view q_cs, double lambda, float* out,
                        mast_buffer_view result, mast_status* status);

/* Biased concatenated logits T_q x (sum_i T_s_i + T_c).
 * style_logits: n_styles views of T_q x T_s_i; content_logits: T_q x T_c;
 * masks: n_styles views with T_q elements each (any rank). */
int mast_apply_lama(const float* in, const mast_buffer_view* style_logits, size_t n_styles,
                    mast_buffer_view content_logits, const mast_buffer_view* masks, double pi_star, float* out,
                    mast_buffer_view result, mast_status* status);

/* Sharpness gap between the content logits and the biased concat. Any of the
 * output pointers may be NULL. */
int mast_sharpness_gap(const float* in, mast_buffer_view content_logits, mast_buffer_view biased_logits,
                       double* delta, double* content_sharpness, double* concat_sharpness, mast_status* status);

/* tau = max(poly(delta), clamp_min). coefficients are highest degree first;
 * NULL selects the built-in quadratic and clamp 1. */
int mast_predict_temperature(double delta, const double* coefficients, size_t n_coefficients, double clamp_min,
                             double* tau, mast_status* status);

/* Row-wise softmax(tau * logits); tau >= 1. */
int mast_apply_sts(const float* in, mast_buffer_view biased_logits, double tau, float* out, mast_buffer_view result,
                   mast_status* status);

/* phi_cs + delta_phi_cs + omega * highpass(phi_c), views C x H x W. omega may
 * be NULL. */
int mast_inject_details(const float* in, mast_buffer_view phi_c, mast_buffer_view phi_cs,
                        mast_buffer_view delta_phi_cs, double radius, double epsilon, float* out,
                        mast_buffer_view result, double* omega, mast_status* status);

/* Runs one pipeline step on the synthetic fixture described by a JSON
 * config and writes the report JSON (NUL-terminated) into `report`. When the
 * capacity is too small, *needed receives the required size including the
 * terminator and MAST_INVALID_INPUT is returned. */
int mast_hook_demo(const char* config_json, char* report, size_t capacity, size_t* needed, mast_status* status);

#ifdef __cplusplus
}
#endif

#endif /* MAST_C_API_H */
