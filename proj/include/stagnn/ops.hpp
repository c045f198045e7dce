#pragma once

#include <optional>
#include <random>

#include "stagnn/tensor.hpp"

namespace stagnn {

// Differentiable primitives. Each op computes its result eagerly and, when
// any input requires gradients, records its backward step on the tape.
// Gradients accumulate (+=) into node grad buffers.

// c = a * b for 2-d operands
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

// elementwise with trailing-dimension broadcasting
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);

Tensor add_scalar(Tape& tape, const Tensor& a, double c);
Tensor mul_scalar(Tape& tape, const Tensor& a, double c);

Tensor relu(Tape& tape, const Tensor& x);
Tensor leaky_relu(Tape& tape, const Tensor& x, double slope);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor exp(Tape& tape, const Tensor& x);

// softmax along one axis, stabilised by max subtraction
Tensor softmax(Tape& tape, const Tensor& x, std::int64_t axis);

// axis = nullopt reduces over all elements to a scalar; otherwise the axis
// is removed from the shape (keepdims keeps it with extent 1)
Tensor reduce_sum(Tape& tape, const Tensor& x, std::optional<std::int64_t> axis = std::nullopt,
                  bool keepdims = false);
Tensor reduce_mean(Tape& tape, const Tensor& x, std::optional<std::int64_t> axis = std::nullopt,
                   bool keepdims = false);

Tensor concat(Tape& tape, const Tensor& a, const Tensor& b, std::int64_t axis);
Tensor transpose(Tape& tape, const Tensor& x);  // 2-d
Tensor reshape(Tape& tape, const Tensor& x, const Shape& shape);
Tensor slice_rows(Tape& tape, const Tensor& x, std::int64_t begin, std::int64_t end);  // 2-d

// inverted dropout: kept values are scaled by 1/(1-p) so eval needs no
// rescaling; identity when training is false
Tensor dropout(Tape& tape, const Tensor& x, double p, bool training, std::mt19937_64* rng);

// causal dilated 1-d convolution; x is c_in x len, w is c_out x c_in x k,
// output c_out x len (implicit left zero padding of (k-1)*dilation)
Tensor conv1d_causal(Tape& tape, const Tensor& x, const Tensor& w, std::int64_t dilation);

}  // namespace stagnn
