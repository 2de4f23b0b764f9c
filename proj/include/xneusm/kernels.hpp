#pragma once

#include <cstddef>

namespace xneusm::kern {

// Dense double-precision kernels behind the tensor engine. Every kernel has a
// scalar reference implementation and an AVX2 variant selected at runtime;
// the two are required to produce bit-identical results. To make that hold,
// the reference implementations pin the floating-point evaluation order:
//
//   * gemm_nn / gemm_tn accumulate each output cell along ascending k with a
//     single dependency chain (no FMA, no reassociation),
//   * gemm_nt splits each dot product into four interleaved partial sums
//     (lane l sums indices k = l mod 4) combined as (s0+s2) + (s1+s3), with
//     any remainder added last in ascending order — the natural shape of a
//     4-wide vector reduction.
//
// The build disables FP contraction so neither variant drifts into FMA.

enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_supported(Backend b);
void set_backend(Backend b);  // throws Error(domain_error) if unsupported
const char* backend_name(Backend b);

// C(m×n) = A(m×k) · B(k×n); accumulates into C when acc is set.
void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n,
             bool acc = false);
// C(m×n) = A(m×k) · B(n×k)ᵀ.
void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n,
             bool acc = false);
// C(m×n) = A(k×m)ᵀ · B(k×n).
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n,
             bool acc = false);

void ew_add(const double* a, const double* b, double* out, std::size_t n);
void ew_sub(const double* a, const double* b, double* out, std::size_t n);
void ew_mul(const double* a, const double* b, double* out, std::size_t n);
void ew_axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void ew_scale(double alpha, const double* x, double* out, std::size_t n);

// out[r][c] = v[r] * m[r][c]; accumulates when acc is set.
void row_scale(const double* v, const double* m, double* out, int rows, int cols,
               bool acc = false);

// Kernel function table; one instance per backend.
struct Vtbl {
  void (*gemm_nn)(const double*, const double*, double*, int, int, int, bool);
  void (*gemm_nt)(const double*, const double*, double*, int, int, int, bool);
  void (*gemm_tn)(const double*, const double*, double*, int, int, int, bool);
  void (*ew_add)(const double*, const double*, double*, std::size_t);
  void (*ew_sub)(const double*, const double*, double*, std::size_t);
  void (*ew_mul)(const double*, const double*, double*, std::size_t);
  void (*ew_axpy)(double, const double*, double*, std::size_t);
  void (*ew_scale)(double, const double*, double*, std::size_t);
  void (*row_scale)(const double*, const double*, double*, int, int, bool);
};

}  // namespace xneusm::kern
