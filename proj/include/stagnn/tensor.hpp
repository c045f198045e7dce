#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stagnn/errors.hpp"

namespace stagnn {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// Storage node shared by tensor handles. Data is written once when the node
// is produced; only grad accumulates afterwards. Parameters are leaves whose
// data an optimizer may rewrite between tapes.
struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // allocated (zeroed) iff requires_grad
  bool requires_grad = false;
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, double value, bool requires_grad = false);
  static Tensor from_data(const Shape& shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t ndim() const { return static_cast<std::int64_t>(node_->shape.size()); }
  std::int64_t dim(std::int64_t i) const { return node_->shape[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(node_->data.size()); }
  bool requires_grad() const { return node_->requires_grad; }

  const double* data() const { return node_->data.data(); }
  double* mutable_data() { return node_->data.data(); }
  const std::vector<double>& data_vec() const { return node_->data; }

  const std::vector<double>& grad() const;
  void zero_grad();

  double item() const;                       // scalar tensors only
  double at(std::int64_t i) const;           // flat index
  double at2(std::int64_t r, std::int64_t c) const;  // 2-d convenience

  bool all_finite() const;

  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;
};

// Ordered record of executed primitive ops. Ops append their backward step
// while the forward pass runs, so replaying the record in reverse is already
// a valid topological order. A tape is single owner and runs backward once;
// reset() clears it for reuse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::function<void()> step);
  void backward(const Tensor& loss);
  void reset();
  std::size_t recorded() const { return steps_.size(); }
  bool spent() const { return spent_; }

 private:
  std::vector<std::function<void()>> steps_;
  bool spent_ = false;
};

}  // namespace stagnn
