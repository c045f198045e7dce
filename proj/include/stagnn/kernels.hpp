#pragma once

#include <cstddef>
#include <string>

namespace stagnn::kernels {

// Low level numeric kernels on raw row-major buffers. Two backends exist:
// a scalar reference implementation and an AVX2 variant picked at runtime.
//
// Every backend is required to produce bitwise identical results. The vector
// kernels therefore parallelise across independent output elements only and
// keep the per-element accumulation order of the scalar code. No FMA is used
// (the kernel translation units are built with -ffp-contract=off).
//
// Order-sensitive reductions (dot products, softmax sums, conv weight grads)
// are deliberately not part of the dispatch table; they have one shared
// scalar implementation.
struct KernelTable {
  const char* name;

  // c[m x n] = a[m x k] * b[k x n], c is overwritten
  void (*matmul)(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n);

  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = alpha * x
  void (*scale)(const double* x, double alpha, double* out, std::size_t n);

  void (*relu)(const double* x, double* out, std::size_t n);
  // out = g where x > 0, 0 otherwise (left branch at the kink)
  void (*relu_grad)(const double* x, const double* g, double* out, std::size_t n);
  void (*leaky_relu)(const double* x, double slope, double* out, std::size_t n);
  void (*leaky_relu_grad)(const double* x, const double* g, double slope,
                          double* out, std::size_t n);

  // Causal dilated 1-d convolution. x is c_in x len, w is c_out x c_in x k,
  // out is c_out x len (overwritten). The input is implicitly zero padded on
  // the left by (k - 1) * dilation, so tap k-1 reads the current sample and
  // tap 0 reads the oldest one.
  void (*conv1d)(const double* x, const double* w, double* out,
                 std::size_t c_in, std::size_t c_out, std::size_t len,
                 std::size_t k, std::size_t dilation);
  // dx (c_in x len, overwritten) from upstream gradient g (c_out x len)
  void (*conv1d_grad_input)(const double* g, const double* w, double* dx,
                            std::size_t c_in, std::size_t c_out, std::size_t len,
                            std::size_t k, std::size_t dilation);

  // One fused Adam step. bias_corr1/2 are the precomputed 1/(1-beta^t) terms.
  void (*adam_update)(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bias_corr1, double bias_corr2);
};

const KernelTable& scalar_table();
// nullptr when the binary was built without AVX2 support or the CPU lacks it
const KernelTable* avx2_table();

enum class Backend { kAuto, kScalar, kAvx2 };

Backend parse_backend(const std::string& name);  // "auto" | "scalar" | "avx2"
void select_backend(Backend b);                  // throws ParameterError if unavailable
const KernelTable& active();
const char* active_name();

// dw (c_out x c_in x k, overwritten) from upstream gradient g; shared scalar
// implementation, see note above
void conv1d_grad_weights(const double* x, const double* g, double* dw,
                         std::size_t c_in, std::size_t c_out, std::size_t len,
                         std::size_t k, std::size_t dilation);

}  // namespace stagnn::kernels
