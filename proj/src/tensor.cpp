#include "mast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mast/error.hpp"

namespace mast {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return shape.empty() ? 0 : n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

static void check_shape(const Shape& shape) {
  if (shape.empty()) fail(ErrorKind::InvalidInput, "tensor shape must have rank >= 1");
  for (auto e : shape) {
    if (e == 0) fail(ErrorKind::InvalidInput, "tensor extents must be >= 1, got " + shape_string(shape));
  }
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (shape_size(shape_) != data_.size()) {
    fail(ErrorKind::InvalidInput, "data length " + std::to_string(data_.size()) +
                                      " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<float> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) fail(ErrorKind::InvalidInput, "ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::vector<float> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

std::span<const float> Tensor::plane(std::size_t c) const {
  const std::size_t n = shape_.at(1) * shape_.at(2);
  return {data_.data() + c * n, n};
}

std::span<float> Tensor::plane(std::size_t c) {
  const std::size_t n = shape_.at(1) * shape_.at(2);
  return {data_.data() + c * n, n};
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    fail(ErrorKind::InvalidInput, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* context) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::InvalidInput, std::string(context) + ": shape mismatch " + shape_string(a.shape()) +
                                      " vs " + shape_string(b.shape()));
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* context) {
  if (t.rank() != rank) {
    fail(ErrorKind::InvalidInput, std::string(context) + ": expected rank " + std::to_string(rank) +
                                      ", got " + shape_string(t.shape()));
  }
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

}  // namespace mast
