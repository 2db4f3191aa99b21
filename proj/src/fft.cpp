#include "mast/fft.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>

#include "mast/error.hpp"

namespace mast {
namespace {

// FFTW's planner is not reentrant; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

class Plan {
 public:
  Plan(std::size_t h, std::size_t w, fftw_complex* in, fftw_complex* out, int sign) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), in, out, sign, FFTW_ESTIMATE);
    if (!plan_) fail(ErrorKind::InvalidInput, "FFTW could not plan a transform");
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

void transform(const Shape& shape, const double* re, const double* im, int sign, ComplexTensor& out) {
  const std::size_t h = shape[0], w = shape[1], n = h * w;
  FftwBuffer in(n), res(n);
  Plan plan(h, w, in.ptr, res.ptr, sign);
  for (std::size_t i = 0; i < n; ++i) {
    in.ptr[i][0] = re[i];
    in.ptr[i][1] = im ? im[i] : 0.0;
  }
  plan.execute();
  for (std::size_t i = 0; i < n; ++i) {
    out.re[i] = res.ptr[i][0];
    out.im[i] = res.ptr[i][1];
  }
}

}  // namespace

ComplexTensor fft2(const Tensor& x) {
  require_rank(x, 2, "fft2");
  ComplexTensor out(x.shape());
  std::vector<double> re(x.values().begin(), x.values().end());
  transform(x.shape(), re.data(), nullptr, FFTW_FORWARD, out);
  return out;
}

ComplexTensor ifft2_complex(const ComplexTensor& spectrum) {
  if (spectrum.shape.size() != 2 || spectrum.re.size() != shape_size(spectrum.shape) ||
      spectrum.im.size() != spectrum.re.size()) {
    fail(ErrorKind::InvalidInput, "ifft2: expected a consistent rank-2 spectrum");
  }
  ComplexTensor out(spectrum.shape);
  transform(spectrum.shape, spectrum.re.data(), spectrum.im.data(), FFTW_BACKWARD, out);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.re[i] *= scale;
    out.im[i] *= scale;
  }
  return out;
}

Tensor ifft2(const ComplexTensor& spectrum) {
  const ComplexTensor c = ifft2_complex(spectrum);
  Tensor out(spectrum.shape);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(c.re[i]);
  return out;
}

double signed_frequency(std::size_t k, std::size_t n) {
  const auto kk = static_cast<double>(k), nn = static_cast<double>(n);
  return (2 * k < n) ? kk / nn : (kk - nn) / nn;
}

}  // namespace mast
