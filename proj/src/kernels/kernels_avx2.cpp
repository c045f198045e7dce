#include "stagnn/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

// AVX2 backend. Every kernel vectorises across independent output elements
// and keeps the scalar accumulation order per element, so results match the
// scalar backend bit for bit. Multiplies and adds stay separate instructions;
// this file is compiled with -mavx2 but without -mfma.

namespace stagnn::kernels {
namespace {

void matmul_avx2(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    std::fill(crow, crow + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const __m256d va = _mm256_set1_pd(aip);
      const double* brow = b + p * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        const __m256d vb = _mm256_loadu_pd(brow + j);
        const __m256d vc = _mm256_loadu_pd(crow + j);
        _mm256_storeu_pd(crow + j, _mm256_add_pd(vc, _mm256_mul_pd(va, vb)));
      }
      for (; j < n; ++j) {
        crow[j] += aip * brow[j];
      }
    }
  }
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(const double* x, double alpha, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void relu_avx2(const double* x, double* out, std::size_t n) {
  const __m256d vzero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d mask = _mm256_cmp_pd(vx, vzero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(vzero, vx, mask));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_avx2(const double* x, const double* g, double* out, std::size_t n) {
  const __m256d vzero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d mask = _mm256_cmp_pd(vx, vzero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(vzero, vg, mask));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? g[i] : 0.0;
}

void leaky_relu_avx2(const double* x, double slope, double* out, std::size_t n) {
  const __m256d vzero = _mm256_setzero_pd();
  const __m256d vslope = _mm256_set1_pd(slope);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d mask = _mm256_cmp_pd(vx, vzero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(_mm256_mul_pd(vslope, vx), vx, mask));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_grad_avx2(const double* x, const double* g, double slope,
                          double* out, std::size_t n) {
  const __m256d vzero = _mm256_setzero_pd();
  const __m256d vslope = _mm256_set1_pd(slope);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d mask = _mm256_cmp_pd(vx, vzero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(_mm256_mul_pd(vslope, vg), vg, mask));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? g[i] : slope * g[i];
}

void conv1d_avx2(const double* x, const double* w, double* out,
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
        const __m256d vw = _mm256_set1_pd(wv);
        std::size_t t = off;
        for (; t + 4 <= len; t += 4) {
          const __m256d vo = _mm256_loadu_pd(orow + t);
          const __m256d vx = _mm256_loadu_pd(xrow + t - off);
          _mm256_storeu_pd(orow + t, _mm256_add_pd(vo, _mm256_mul_pd(vw, vx)));
        }
        for (; t < len; ++t) {
          orow[t] += wv * xrow[t - off];
        }
      }
    }
  }
}

void conv1d_grad_input_avx2(const double* g, const double* w, double* dx,
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
        const __m256d vw = _mm256_set1_pd(wv);
        const std::size_t stop = len - off;
        std::size_t t = 0;
        for (; t + 4 <= stop; t += 4) {
          const __m256d vd = _mm256_loadu_pd(drow + t);
          const __m256d vg = _mm256_loadu_pd(grow + t + off);
          _mm256_storeu_pd(drow + t, _mm256_add_pd(vd, _mm256_mul_pd(vw, vg)));
        }
        for (; t < stop; ++t) {
          drow[t] += wv * grow[t + off];
        }
      }
    }
  }
}

void adam_update_avx2(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bias_corr1, double bias_corr2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vonemb1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vonemb2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vbc1 = _mm256_set1_pd(bias_corr1);
  const __m256d vbc2 = _mm256_set1_pd(bias_corr2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d vm = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(vonemb1, vg));
    const __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(vonemb2, _mm256_mul_pd(vg, vg)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d vmhat = _mm256_mul_pd(vm, vbc1);
    const __m256d vvhat = _mm256_mul_pd(vv, vbc2);
    const __m256d vstep = _mm256_div_pd(_mm256_mul_pd(vlr, vmhat),
                                        _mm256_add_pd(_mm256_sqrt_pd(vvhat), veps));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), vstep));
  }
  for (; i < n; ++i) {
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

const KernelTable& avx2_table_impl() {
  static const KernelTable table = {
      "avx2",
      matmul_avx2,
      add_avx2,
      sub_avx2,
      mul_avx2,
      axpy_avx2,
      scale_avx2,
      relu_avx2,
      relu_grad_avx2,
      leaky_relu_avx2,
      leaky_relu_grad_avx2,
      conv1d_avx2,
      conv1d_grad_input_avx2,
      adam_update_avx2,
  };
  return table;
}

}  // namespace stagnn::kernels
