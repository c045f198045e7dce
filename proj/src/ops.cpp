#include "stagnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "stagnn/kernels.hpp"

namespace stagnn {
namespace {

void require_defined(const Tensor& t, const char* who) {
  if (!t.defined()) throw UsageError(std::string(who) + ": undefined tensor operand");
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t na = a.size(), nb = b.size();
  const std::size_t n = std::max(na, nb);
  Shape out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t da = i < n - na ? 1 : a[i - (n - na)];
    const std::int64_t db = i < n - nb ? 1 : b[i - (n - nb)];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError("shapes " + shape_str(a) + " and " + shape_str(b) +
                           " are not broadcastable");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

// strides of `in` aligned right against `out`, zero on broadcast dims
std::vector<std::int64_t> aligned_strides(const Shape& in, const Shape& out) {
  std::vector<std::int64_t> nat(in.size());
  std::int64_t acc = 1;
  for (std::size_t i = in.size(); i-- > 0;) {
    nat[i] = acc;
    acc *= in[i];
  }
  std::vector<std::int64_t> strides(out.size(), 0);
  const std::size_t off = out.size() - in.size();
  for (std::size_t i = 0; i < in.size(); ++i) {
    strides[off + i] = (in[i] == 1 && out[off + i] != 1) ? 0 : nat[i];
  }
  return strides;
}

// visits every flat output index along with the mapped flat indices into the
// two (possibly broadcast) operands
template <class F>
void broadcast_walk(const Shape& out, const std::vector<std::int64_t>& sa,
                    const std::vector<std::int64_t>& sb, F&& f) {
  const std::size_t nd = out.size();
  std::vector<std::int64_t> idx(nd, 0);
  std::int64_t ia = 0, ib = 0;
  const std::int64_t total = shape_numel(out);
  for (std::int64_t flat = 0; flat < total; ++flat) {
    f(flat, ia, ib);
    for (std::size_t d = nd; d-- > 0;) {
      ++idx[d];
      ia += sa[d];
      ib += sb[d];
      if (idx[d] < out[d]) break;
      ia -= sa[d] * out[d];
      ib -= sb[d] * out[d];
      idx[d] = 0;
    }
  }
}

void transpose_copy(const double* src, double* dst, std::int64_t rows, std::int64_t cols) {
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) {
      dst[j * rows + i] = src[i * cols + j];
    }
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// axis decomposition used by softmax and the axis reductions
struct AxisView {
  std::int64_t outer, len, inner;
};

AxisView axis_view(const Shape& s, std::int64_t axis, const char* who) {
  if (axis < 0 || axis >= static_cast<std::int64_t>(s.size())) {
    throw DimensionError(std::string(who) + ": axis " + std::to_string(axis) +
                         " out of range for shape " + shape_str(s));
  }
  AxisView v{1, s[static_cast<std::size_t>(axis)], 1};
  for (std::int64_t i = 0; i < axis; ++i) v.outer *= s[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

enum class BinKind { kAdd, kSub, kMul };

Tensor binary_op(Tape& tape, const Tensor& a, const Tensor& b, BinKind kind, const char* who) {
  require_defined(a, who);
  require_defined(b, who);
  const bool same = a.shape() == b.shape();
  const Shape oshape = same ? a.shape() : broadcast_shape(a.shape(), b.shape());
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = Tensor::zeros(oshape, rg);
  const std::size_t n = static_cast<std::size_t>(out.numel());

  if (same) {
    const auto& K = kernels::active();
    switch (kind) {
      case BinKind::kAdd: K.add(a.data(), b.data(), out.mutable_data(), n); break;
      case BinKind::kSub: K.sub(a.data(), b.data(), out.mutable_data(), n); break;
      case BinKind::kMul: K.mul(a.data(), b.data(), out.mutable_data(), n); break;
    }
  } else {
    const auto sa = aligned_strides(a.shape(), oshape);
    const auto sb = aligned_strides(b.shape(), oshape);
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.mutable_data();
    switch (kind) {
      case BinKind::kAdd:
        broadcast_walk(oshape, sa, sb, [&](std::int64_t f, std::int64_t ia, std::int64_t ib) {
          po[f] = pa[ia] + pb[ib];
        });
        break;
      case BinKind::kSub:
        broadcast_walk(oshape, sa, sb, [&](std::int64_t f, std::int64_t ia, std::int64_t ib) {
          po[f] = pa[ia] - pb[ib];
        });
        break;
      case BinKind::kMul:
        broadcast_walk(oshape, sa, sb, [&](std::int64_t f, std::int64_t ia, std::int64_t ib) {
          po[f] = pa[ia] * pb[ib];
        });
        break;
    }
  }

  if (rg) {
    auto an = a.node(), bn = b.node(), on = out.node();
    const bool a_rg = a.requires_grad(), b_rg = b.requires_grad();
    if (same) {
      tape.record([an, bn, on, a_rg, b_rg, kind, n]() {
        const auto& K = kernels::active();
        const double* go = on->grad.data();
        switch (kind) {
          case BinKind::kAdd:
            if (a_rg) K.axpy(1.0, go, an->grad.data(), n);
            if (b_rg) K.axpy(1.0, go, bn->grad.data(), n);
            break;
          case BinKind::kSub:
            if (a_rg) K.axpy(1.0, go, an->grad.data(), n);
            if (b_rg) K.axpy(-1.0, go, bn->grad.data(), n);
            break;
          case BinKind::kMul:
            if (a_rg) {
              double* ga = an->grad.data();
              const double* pb = bn->data.data();
              for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * pb[i];
            }
            if (b_rg) {
              double* gb = bn->grad.data();
              const double* pa = an->data.data();
              for (std::size_t i = 0; i < n; ++i) gb[i] += go[i] * pa[i];
            }
            break;
        }
      });
    } else {
      const auto sa = aligned_strides(a.shape(), oshape);
      const auto sb = aligned_strides(b.shape(), oshape);
      tape.record([an, bn, on, a_rg, b_rg, kind, oshape, sa, sb]() {
        const double* go = on->grad.data();
        double* ga = a_rg ? an->grad.data() : nullptr;
        double* gb = b_rg ? bn->grad.data() : nullptr;
        const double* pa = an->data.data();
        const double* pb = bn->data.data();
        switch (kind) {
          case BinKind::kAdd:
            broadcast_walk(oshape, sa, sb, [&](std::int64_t f, std::int64_t ia, std::int64_t ib) {
              if (ga) ga[ia] += go[f];
              if (gb) gb[ib] += go[f];
            });
            break;
          case BinKind::kSub:
            broadcast_walk(oshape, sa, sb, [&](std::int64_t f, std::int64_t ia, std::int64_t ib) {
              if (ga) ga[ia] += go[f];
              if (gb) gb[ib] -= go[f];
            });
            break;
          case BinKind::kMul:
            broadcast_walk(oshape, sa, sb, [&](std::int64_t f, std::int64_t ia, std::int64_t ib) {
              if (ga) ga[ia] += go[f] * pb[ib];
              if (gb) gb[ib] += go[f] * pa[ia];
            });
            break;
        }
      });
    }
  }
  return out;
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.ndim() != 2 || b.ndim() != 2) {
    throw DimensionError("matmul requires 2-d operands, got " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul inner dimensions differ: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = Tensor::zeros({m, n}, rg);
  kernels::active().matmul(a.data(), b.data(), out.mutable_data(),
                           static_cast<std::size_t>(m), static_cast<std::size_t>(k),
                           static_cast<std::size_t>(n));
  if (rg) {
    auto an = a.node(), bn = b.node(), on = out.node();
    const bool a_rg = a.requires_grad(), b_rg = b.requires_grad();
    tape.record([an, bn, on, a_rg, b_rg, m, k, n]() {
      const auto& K = kernels::active();
      const double* go = on->grad.data();
      if (a_rg) {
        // ga += g * b^T
        std::vector<double> bt(static_cast<std::size_t>(n * k));
        transpose_copy(bn->data.data(), bt.data(), k, n);
        std::vector<double> tmp(static_cast<std::size_t>(m * k));
        K.matmul(go, bt.data(), tmp.data(), static_cast<std::size_t>(m),
                 static_cast<std::size_t>(n), static_cast<std::size_t>(k));
        K.axpy(1.0, tmp.data(), an->grad.data(), tmp.size());
      }
      if (b_rg) {
        // gb += a^T * g
        std::vector<double> at(static_cast<std::size_t>(k * m));
        transpose_copy(an->data.data(), at.data(), m, k);
        std::vector<double> tmp(static_cast<std::size_t>(k * n));
        K.matmul(at.data(), go, tmp.data(), static_cast<std::size_t>(k),
                 static_cast<std::size_t>(m), static_cast<std::size_t>(n));
        K.axpy(1.0, tmp.data(), bn->grad.data(), tmp.size());
      }
    });
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) { return binary_op(tape, a, b, BinKind::kAdd, "add"); }
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) { return binary_op(tape, a, b, BinKind::kSub, "sub"); }
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) { return binary_op(tape, a, b, BinKind::kMul, "mul"); }

Tensor add_scalar(Tape& tape, const Tensor& a, double c) {
  require_defined(a, "add_scalar");
  const bool rg = a.requires_grad();
  Tensor out = Tensor::zeros(a.shape(), rg);
  const std::size_t n = static_cast<std::size_t>(a.numel());
  const double* pa = a.data();
  double* po = out.mutable_data();
  for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + c;
  if (rg) {
    auto an = a.node(), on = out.node();
    tape.record([an, on, n]() { kernels::active().axpy(1.0, on->grad.data(), an->grad.data(), n); });
  }
  return out;
}

Tensor mul_scalar(Tape& tape, const Tensor& a, double c) {
  require_defined(a, "mul_scalar");
  const bool rg = a.requires_grad();
  Tensor out = Tensor::zeros(a.shape(), rg);
  const std::size_t n = static_cast<std::size_t>(a.numel());
  kernels::active().scale(a.data(), c, out.mutable_data(), n);
  if (rg) {
    auto an = a.node(), on = out.node();
    tape.record([an, on, c, n]() { kernels::active().axpy(c, on->grad.data(), an->grad.data(), n); });
  }
  return out;
}

Tensor relu(Tape& tape, const Tensor& x) {
  require_defined(x, "relu");
  const bool rg = x.requires_grad();
  Tensor out = Tensor::zeros(x.shape(), rg);
  const std::size_t n = static_cast<std::size_t>(x.numel());
  kernels::active().relu(x.data(), out.mutable_data(), n);
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, n]() {
      const auto& K = kernels::active();
      std::vector<double> tmp(n);
      K.relu_grad(xn->data.data(), on->grad.data(), tmp.data(), n);
      K.axpy(1.0, tmp.data(), xn->grad.data(), n);
    });
  }
  return out;
}

Tensor leaky_relu(Tape& tape, const Tensor& x, double slope) {
  require_defined(x, "leaky_relu");
  const bool rg = x.requires_grad();
  Tensor out = Tensor::zeros(x.shape(), rg);
  const std::size_t n = static_cast<std::size_t>(x.numel());
  kernels::active().leaky_relu(x.data(), slope, out.mutable_data(), n);
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, slope, n]() {
      const auto& K = kernels::active();
      std::vector<double> tmp(n);
      K.leaky_relu_grad(xn->data.data(), on->grad.data(), slope, tmp.data(), n);
      K.axpy(1.0, tmp.data(), xn->grad.data(), n);
    });
  }
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  require_defined(x, "sigmoid");
  const bool rg = x.requires_grad();
  Tensor out = Tensor::zeros(x.shape(), rg);
  const std::size_t n = static_cast<std::size_t>(x.numel());
  const double* px = x.data();
  double* po = out.mutable_data();
  for (std::size_t i = 0; i < n; ++i) po[i] = sigmoid_scalar(px[i]);
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, n]() {
      const double* go = on->grad.data();
      const double* y = on->data.data();
      double* gx = xn->grad.data();
      for (std::size_t i = 0; i < n; ++i) gx[i] += go[i] * y[i] * (1.0 - y[i]);
    });
  }
  return out;
}

Tensor exp(Tape& tape, const Tensor& x) {
  require_defined(x, "exp");
  const bool rg = x.requires_grad();
  Tensor out = Tensor::zeros(x.shape(), rg);
  const std::size_t n = static_cast<std::size_t>(x.numel());
  const double* px = x.data();
  double* po = out.mutable_data();
  for (std::size_t i = 0; i < n; ++i) po[i] = std::exp(px[i]);
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, n]() {
      const double* go = on->grad.data();
      const double* y = on->data.data();
      double* gx = xn->grad.data();
      for (std::size_t i = 0; i < n; ++i) gx[i] += go[i] * y[i];
    });
  }
  return out;
}

Tensor softmax(Tape& tape, const Tensor& x, std::int64_t axis) {
  require_defined(x, "softmax");
  const AxisView v = axis_view(x.shape(), axis, "softmax");
  const bool rg = x.requires_grad();
  Tensor out = Tensor::zeros(x.shape(), rg);
  const double* px = x.data();
  double* po = out.mutable_data();
  for (std::int64_t o = 0; o < v.outer; ++o) {
    for (std::int64_t in = 0; in < v.inner; ++in) {
      const std::int64_t base = o * v.len * v.inner + in;
      double mx = px[base];
      for (std::int64_t i = 1; i < v.len; ++i) mx = std::max(mx, px[base + i * v.inner]);
      double sum = 0.0;
      for (std::int64_t i = 0; i < v.len; ++i) {
        const double e = std::exp(px[base + i * v.inner] - mx);
        po[base + i * v.inner] = e;
        sum += e;
      }
      for (std::int64_t i = 0; i < v.len; ++i) po[base + i * v.inner] /= sum;
    }
  }
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, v]() {
      const double* go = on->grad.data();
      const double* y = on->data.data();
      double* gx = xn->grad.data();
      for (std::int64_t o = 0; o < v.outer; ++o) {
        for (std::int64_t in = 0; in < v.inner; ++in) {
          const std::int64_t base = o * v.len * v.inner + in;
          double dot = 0.0;
          for (std::int64_t i = 0; i < v.len; ++i) {
            const std::int64_t p = base + i * v.inner;
            dot += go[p] * y[p];
          }
          for (std::int64_t i = 0; i < v.len; ++i) {
            const std::int64_t p = base + i * v.inner;
            gx[p] += y[p] * (go[p] - dot);
          }
        }
      }
    });
  }
  return out;
}

namespace {

Tensor reduce_impl(Tape& tape, const Tensor& x, std::optional<std::int64_t> axis, bool keepdims,
                   bool mean, const char* who) {
  require_defined(x, who);
  const bool rg = x.requires_grad();
  if (!axis.has_value()) {
    const std::size_t n = static_cast<std::size_t>(x.numel());
    const double denom = mean ? static_cast<double>(n) : 1.0;
    double acc = 0.0;
    const double* px = x.data();
    for (std::size_t i = 0; i < n; ++i) acc += px[i];
    Tensor out = Tensor::from_data({1}, {acc / denom}, rg);
    if (rg) {
      auto xn = x.node(), on = out.node();
      tape.record([xn, on, n, denom]() {
        const double g = on->grad[0] / denom;
        double* gx = xn->grad.data();
        for (std::size_t i = 0; i < n; ++i) gx[i] += g;
      });
    }
    return out;
  }

  const AxisView v = axis_view(x.shape(), *axis, who);
  Shape oshape;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(x.shape().size()); ++i) {
    if (i == *axis) {
      if (keepdims) oshape.push_back(1);
    } else {
      oshape.push_back(x.shape()[static_cast<std::size_t>(i)]);
    }
  }
  if (oshape.empty()) oshape.push_back(1);
  const double denom = mean ? static_cast<double>(v.len) : 1.0;
  Tensor out = Tensor::zeros(oshape, rg);
  const double* px = x.data();
  double* po = out.mutable_data();
  for (std::int64_t o = 0; o < v.outer; ++o) {
    for (std::int64_t in = 0; in < v.inner; ++in) {
      double acc = 0.0;
      const std::int64_t base = o * v.len * v.inner + in;
      for (std::int64_t i = 0; i < v.len; ++i) acc += px[base + i * v.inner];
      po[o * v.inner + in] = acc / denom;
    }
  }
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, v, denom]() {
      const double* go = on->grad.data();
      double* gx = xn->grad.data();
      for (std::int64_t o = 0; o < v.outer; ++o) {
        for (std::int64_t in = 0; in < v.inner; ++in) {
          const double g = go[o * v.inner + in] / denom;
          const std::int64_t base = o * v.len * v.inner + in;
          for (std::int64_t i = 0; i < v.len; ++i) gx[base + i * v.inner] += g;
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor reduce_sum(Tape& tape, const Tensor& x, std::optional<std::int64_t> axis, bool keepdims) {
  return reduce_impl(tape, x, axis, keepdims, false, "reduce_sum");
}

Tensor reduce_mean(Tape& tape, const Tensor& x, std::optional<std::int64_t> axis, bool keepdims) {
  return reduce_impl(tape, x, axis, keepdims, true, "reduce_mean");
}

Tensor concat(Tape& tape, const Tensor& a, const Tensor& b, std::int64_t axis) {
  require_defined(a, "concat");
  require_defined(b, "concat");
  if (a.ndim() != b.ndim()) {
    throw DimensionError("concat operands must have the same rank");
  }
  if (axis < 0 || axis >= a.ndim()) {
    throw DimensionError("concat axis " + std::to_string(axis) + " out of range");
  }
  for (std::int64_t i = 0; i < a.ndim(); ++i) {
    if (i != axis && a.dim(i) != b.dim(i)) {
      throw DimensionError("concat shapes differ off-axis: " + shape_str(a.shape()) + " vs " +
                           shape_str(b.shape()));
    }
  }
  Shape oshape = a.shape();
  oshape[static_cast<std::size_t>(axis)] += b.dim(axis);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = Tensor::zeros(oshape, rg);

  std::int64_t outer = 1;
  for (std::int64_t i = 0; i < axis; ++i) outer *= a.dim(i);
  std::int64_t inner = 1;
  for (std::int64_t i = axis + 1; i < a.ndim(); ++i) inner *= a.dim(i);
  const std::int64_t ablock = a.dim(axis) * inner;
  const std::int64_t bblock = b.dim(axis) * inner;
  double* po = out.mutable_data();
  for (std::int64_t o = 0; o < outer; ++o) {
    std::copy_n(a.data() + o * ablock, ablock, po + o * (ablock + bblock));
    std::copy_n(b.data() + o * bblock, bblock, po + o * (ablock + bblock) + ablock);
  }
  if (rg) {
    auto an = a.node(), bn = b.node(), on = out.node();
    const bool a_rg = a.requires_grad(), b_rg = b.requires_grad();
    tape.record([an, bn, on, a_rg, b_rg, outer, ablock, bblock]() {
      const double* go = on->grad.data();
      for (std::int64_t o = 0; o < outer; ++o) {
        const double* src = go + o * (ablock + bblock);
        if (a_rg) {
          double* ga = an->grad.data() + o * ablock;
          for (std::int64_t i = 0; i < ablock; ++i) ga[i] += src[i];
        }
        if (b_rg) {
          double* gb = bn->grad.data() + o * bblock;
          for (std::int64_t i = 0; i < bblock; ++i) gb[i] += src[ablock + i];
        }
      }
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& x) {
  require_defined(x, "transpose");
  if (x.ndim() != 2) {
    throw DimensionError("transpose requires a 2-d tensor, got " + shape_str(x.shape()));
  }
  const std::int64_t r = x.dim(0), c = x.dim(1);
  const bool rg = x.requires_grad();
  Tensor out = Tensor::zeros({c, r}, rg);
  transpose_copy(x.data(), out.mutable_data(), r, c);
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, r, c]() {
      const double* go = on->grad.data();
      double* gx = xn->grad.data();
      for (std::int64_t i = 0; i < r; ++i) {
        for (std::int64_t j = 0; j < c; ++j) {
          gx[i * c + j] += go[j * r + i];
        }
      }
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& x, const Shape& shape) {
  require_defined(x, "reshape");
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape from " + shape_str(x.shape()) + " to " + shape_str(shape) +
                         " changes the element count");
  }
  const bool rg = x.requires_grad();
  Tensor out = Tensor::from_data(shape, x.data_vec(), rg);
  if (rg) {
    auto xn = x.node(), on = out.node();
    const std::size_t n = static_cast<std::size_t>(x.numel());
    tape.record([xn, on, n]() { kernels::active().axpy(1.0, on->grad.data(), xn->grad.data(), n); });
  }
  return out;
}

Tensor slice_rows(Tape& tape, const Tensor& x, std::int64_t begin, std::int64_t end) {
  require_defined(x, "slice_rows");
  if (x.ndim() != 2) {
    throw DimensionError("slice_rows requires a 2-d tensor, got " + shape_str(x.shape()));
  }
  if (begin < 0 || end > x.dim(0) || begin >= end) {
    throw DimensionError("slice_rows range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for " + shape_str(x.shape()));
  }
  const std::int64_t cols = x.dim(1);
  const std::int64_t rows = end - begin;
  const bool rg = x.requires_grad();
  Tensor out = Tensor::zeros({rows, cols}, rg);
  std::copy_n(x.data() + begin * cols, rows * cols, out.mutable_data());
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, begin, rows, cols]() {
      kernels::active().axpy(1.0, on->grad.data(), xn->grad.data() + begin * cols,
                             static_cast<std::size_t>(rows * cols));
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double p, bool training, std::mt19937_64* rng) {
  require_defined(x, "dropout");
  if (p < 0.0 || p >= 1.0) {
    throw ParameterError("dropout probability must be in [0, 1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) return x;
  if (rng == nullptr) throw UsageError("dropout in training mode needs an rng");

  const std::size_t n = static_cast<std::size_t>(x.numel());
  auto mask = std::make_shared<std::vector<double>>(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < n; ++i) {
    (*mask)[i] = u(*rng) < p ? 0.0 : keep_scale;
  }
  const bool rg = x.requires_grad();
  Tensor out = Tensor::zeros(x.shape(), rg);
  kernels::active().mul(x.data(), mask->data(), out.mutable_data(), n);
  if (rg) {
    auto xn = x.node(), on = out.node();
    tape.record([xn, on, mask, n]() {
      const double* go = on->grad.data();
      double* gx = xn->grad.data();
      const double* pm = mask->data();
      for (std::size_t i = 0; i < n; ++i) gx[i] += go[i] * pm[i];
    });
  }
  return out;
}

Tensor conv1d_causal(Tape& tape, const Tensor& x, const Tensor& w, std::int64_t dilation) {
  require_defined(x, "conv1d_causal");
  require_defined(w, "conv1d_causal");
  if (x.ndim() != 2) {
    throw DimensionError("conv1d_causal input must be c_in x len, got " + shape_str(x.shape()));
  }
  if (w.ndim() != 3) {
    throw DimensionError("conv1d_causal weight must be c_out x c_in x k, got " + shape_str(w.shape()));
  }
  if (w.dim(1) != x.dim(0)) {
    throw DimensionError("conv1d_causal channel mismatch: input " + shape_str(x.shape()) +
                         ", weight " + shape_str(w.shape()));
  }
  if (dilation < 1) {
    throw ParameterError("conv1d_causal dilation must be >= 1, got " + std::to_string(dilation));
  }
  const std::size_t c_in = static_cast<std::size_t>(x.dim(0));
  const std::size_t len = static_cast<std::size_t>(x.dim(1));
  const std::size_t c_out = static_cast<std::size_t>(w.dim(0));
  const std::size_t k = static_cast<std::size_t>(w.dim(2));
  const std::size_t dil = static_cast<std::size_t>(dilation);
  const bool rg = x.requires_grad() || w.requires_grad();
  Tensor out = Tensor::zeros({w.dim(0), x.dim(1)}, rg);
  kernels::active().conv1d(x.data(), w.data(), out.mutable_data(), c_in, c_out, len, k, dil);
  if (rg) {
    auto xn = x.node(), wn = w.node(), on = out.node();
    const bool x_rg = x.requires_grad(), w_rg = w.requires_grad();
    tape.record([xn, wn, on, x_rg, w_rg, c_in, c_out, len, k, dil]() {
      const auto& K = kernels::active();
      const double* go = on->grad.data();
      if (x_rg) {
        std::vector<double> dx(c_in * len);
        K.conv1d_grad_input(go, wn->data.data(), dx.data(), c_in, c_out, len, k, dil);
        K.axpy(1.0, dx.data(), xn->grad.data(), dx.size());
      }
      if (w_rg) {
        std::vector<double> dw(c_out * c_in * k);
        kernels::conv1d_grad_weights(xn->data.data(), go, dw.data(), c_in, c_out, len, k, dil);
        K.axpy(1.0, dw.data(), wn->grad.data(), dw.size());
      }
    });
  }
  return out;
}

}  // namespace stagnn
