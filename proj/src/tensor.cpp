#include "stagnn/tensor.hpp"

#include <cmath>
#include <sstream>

namespace stagnn {

std::int64_t shape_numel(const Shape& s) {
  std::int64_t n = 1;
  for (std::int64_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) os << 'x';
    os << s[i];
  }
  os << ')';
  return os.str();
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  for (std::int64_t d : shape) {
    if (d <= 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = shape;
  node->data.assign(static_cast<std::size_t>(shape_numel(shape)), 0.0);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->data.size(), 0.0);
  return Tensor(std::move(node));
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
  Tensor t = zeros(shape, requires_grad);
  for (auto& x : t.node_->data) x = value;
  return t;
}

Tensor Tensor::from_data(const Shape& shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
    throw DimensionError("data size " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
  }
  Tensor t = zeros(shape, requires_grad);
  t.node_->data = std::move(data);
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const std::vector<double>& Tensor::grad() const {
  if (!node_->requires_grad) {
    throw UsageError("grad() called on a tensor that does not require gradients");
  }
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_->requires_grad) {
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
  }
}

double Tensor::item() const {
  if (numel() != 1) {
    throw UsageError("item() requires a scalar tensor, shape is " + shape_str(node_->shape));
  }
  return node_->data[0];
}

double Tensor::at(std::int64_t i) const { return node_->data[static_cast<std::size_t>(i)]; }

double Tensor::at2(std::int64_t r, std::int64_t c) const {
  if (ndim() != 2) throw DimensionError("at2() requires a 2-d tensor");
  return node_->data[static_cast<std::size_t>(r * dim(1) + c)];
}

bool Tensor::all_finite() const {
  for (double v : node_->data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tape::record(std::function<void()> step) {
  if (spent_) {
    throw UsageError("recording onto a spent tape; call reset() before reuse");
  }
  steps_.push_back(std::move(step));
}

void Tape::backward(const Tensor& loss) {
  if (spent_) {
    throw UsageError("backward() called twice on the same tape; call reset() between passes");
  }
  if (!loss.defined() || loss.numel() != 1) {
    throw UsageError("backward() requires a scalar loss");
  }
  if (loss.requires_grad()) {
    loss.node()->grad[0] += 1.0;
  }
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    (*it)();
  }
  spent_ = true;
}

void Tape::reset() {
  steps_.clear();
  spent_ = false;
}

}  // namespace stagnn
