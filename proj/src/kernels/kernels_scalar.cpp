#include "stagnn/kernels.hpp"

#include <algorithm>
#include <cmath>

// Reference kernels. The loop orders here define the accumulation order that
// every other backend has to reproduce exactly.

namespace stagnn::kernels {
namespace {

void matmul_scalar(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    std::fill(crow, crow + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] += aip * brow[j];
      }
    }
  }
}

void add_scalar_k(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar_k(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar_k(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(const double* x, double alpha, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void relu_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_scalar(const double* x, const double* g, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? g[i] : 0.0;
}

void leaky_relu_scalar(const double* x, double slope, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_grad_scalar(const double* x, const double* g, double slope,
                            double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? g[i] : slope * g[i];
}

void conv1d_scalar(const double* x, const double* w, double* out,
                   std::size_t c_in, std::size_t c_out, std::size_t len,
                   std::size_t k, std::size_t dilation) {
  for (std::size_t co = 0; co < c_out; ++co) {
    double* orow = out + co * len;
    std::fill(orow, orow + len, 0.0);
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const double* xrow = x + ci * len;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const std::size_t off = (k - 1 - kk) * dilation;
        if (off >= len) continue;
        const double wv = w[(co * c_in + ci) * k + kk];
        for (std::size_t t = off; t < len; ++t) {
          orow[t] += wv * xrow[t - off];
        }
      }
    }
  }
}

void conv1d_grad_input_scalar(const double* g, const double* w, double* dx,
                              std::size_t c_in, std::size_t c_out, std::size_t len,
                              std::size_t k, std::size_t dilation) {
  for (std::size_t ci = 0; ci < c_in; ++ci) {
    double* drow = dx + ci * len;
    std::fill(drow, drow + len, 0.0);
    for (std::size_t co = 0; co < c_out; ++co) {
      const double* grow = g + co * len;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const std::size_t off = (k - 1 - kk) * dilation;
        if (off >= len) continue;
        const double wv = w[(co * c_in + ci) * k + kk];
        for (std::size_t t = 0; t < len - off; ++t) {
          drow[t] += wv * grow[t + off];
        }
      }
    }
  }
}

void adam_update_scalar(double* p, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bias_corr1, double bias_corr2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i];
    const double mi = beta1 * m[i] + (1.0 - beta1) * gi;
    const double vi = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
    m[i] = mi;
    v[i] = vi;
    const double mhat = mi * bias_corr1;
    const double vhat = vi * bias_corr2;
    p[i] -= (lr * mhat) / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      "scalar",
      matmul_scalar,
      add_scalar_k,
      sub_scalar_k,
      mul_scalar_k,
      axpy_scalar,
      scale_scalar,
      relu_scalar,
      relu_grad_scalar,
      leaky_relu_scalar,
      leaky_relu_grad_scalar,
      conv1d_scalar,
      conv1d_grad_input_scalar,
      adam_update_scalar,
  };
  return table;
}

void conv1d_grad_weights(const double* x, const double* g, double* dw,
                         std::size_t c_in, std::size_t c_out, std::size_t len,
                         std::size_t k, std::size_t dilation) {
  for (std::size_t co = 0; co < c_out; ++co) {
    const double* grow = g + co * len;
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const double* xrow = x + ci * len;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const std::size_t off = (k - 1 - kk) * dilation;
        double acc = 0.0;
        if (off < len) {
          for (std::size_t t = off; t < len; ++t) {
            acc += grow[t] * xrow[t - off];
          }
        }
        dw[(co * c_in + ci) * k + kk] = acc;
      }
    }
  }
}

}  // namespace stagnn::kernels
