// AVX2 variants of the dense kernels. Evaluation order matches the scalar
// reference exactly (see kernels.hpp): mul followed by add, never FMA, and
// dot products reduced through four k-strided lanes.

#include "xneusm/kernels.hpp"

#if (defined(__x86_64__) || defined(__amd64__)) && defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>

namespace xneusm::kern {
namespace avx2 {

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  const int nv = n & ~3;
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    if (!acc) std::fill(ci, ci + n, 0.0);
    const double* ai = a + static_cast<std::size_t>(i) * k;
    int t = 0;
    for (; t + 4 <= k; t += 4) {
      const __m256d a0 = _mm256_set1_pd(ai[t]);
      const __m256d a1 = _mm256_set1_pd(ai[t + 1]);
      const __m256d a2 = _mm256_set1_pd(ai[t + 2]);
      const __m256d a3 = _mm256_set1_pd(ai[t + 3]);
      const double* b0 = b + static_cast<std::size_t>(t) * n;
      const double* b1 = b0 + n;
      const double* b2 = b1 + n;
      const double* b3 = b2 + n;
      int j = 0;
      for (; j < nv; j += 4) {
        __m256d cj = _mm256_loadu_pd(ci + j);
        cj = _mm256_add_pd(cj, _mm256_mul_pd(a0, _mm256_loadu_pd(b0 + j)));
        cj = _mm256_add_pd(cj, _mm256_mul_pd(a1, _mm256_loadu_pd(b1 + j)));
        cj = _mm256_add_pd(cj, _mm256_mul_pd(a2, _mm256_loadu_pd(b2 + j)));
        cj = _mm256_add_pd(cj, _mm256_mul_pd(a3, _mm256_loadu_pd(b3 + j)));
        _mm256_storeu_pd(ci + j, cj);
      }
      for (; j < n; ++j) {
        double cj = ci[j];
        cj += ai[t] * b0[j];
        cj += ai[t + 1] * b1[j];
        cj += ai[t + 2] * b2[j];
        cj += ai[t + 3] * b3[j];
        ci[j] = cj;
      }
    }
    for (; t < k; ++t) {
      const __m256d at = _mm256_set1_pd(ai[t]);
      const double* bt = b + static_cast<std::size_t>(t) * n;
      int j = 0;
      for (; j < nv; j += 4) {
        __m256d cj = _mm256_loadu_pd(ci + j);
        cj = _mm256_add_pd(cj, _mm256_mul_pd(at, _mm256_loadu_pd(bt + j)));
        _mm256_storeu_pd(ci + j, cj);
      }
      for (; j < n; ++j) ci[j] += ai[t] * bt[j];
    }
  }
}

// Combines the four k-strided lanes as (s0+s2) + (s1+s3).
static inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);                       // [s0+s2, s1+s3]
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  const int kv = k & ~3;
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    int j = 0;
    for (; j + 2 <= n; j += 2) {
      const double* bj0 = b + static_cast<std::size_t>(j) * k;
      const double* bj1 = bj0 + k;
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (int t = 0; t < kv; t += 4) {
        const __m256d av = _mm256_loadu_pd(ai + t);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(av, _mm256_loadu_pd(bj0 + t)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(av, _mm256_loadu_pd(bj1 + t)));
      }
      double s0 = hsum(acc0);
      double s1 = hsum(acc1);
      for (int t = kv; t < k; ++t) {
        s0 += ai[t] * bj0[t];
        s1 += ai[t] * bj1[t];
      }
      ci[j] = acc ? ci[j] + s0 : s0;
      ci[j + 1] = acc ? ci[j + 1] + s1 : s1;
    }
    for (; j < n; ++j) {
      const double* bj = b + static_cast<std::size_t>(j) * k;
      __m256d accv = _mm256_setzero_pd();
      for (int t = 0; t < kv; t += 4) {
        accv = _mm256_add_pd(accv, _mm256_mul_pd(_mm256_loadu_pd(ai + t),
                                                 _mm256_loadu_pd(bj + t)));
      }
      double s = hsum(accv);
      for (int t = kv; t < k; ++t) s += ai[t] * bj[t];
      ci[j] = acc ? ci[j] + s : s;
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  const int nv = n & ~3;
  for (int r = 0; r < m; ++r) {
    double* cr = c + static_cast<std::size_t>(r) * n;
    if (!acc) std::fill(cr, cr + n, 0.0);
    int t = 0;
    for (; t + 4 <= k; t += 4) {
      const double a0s = a[static_cast<std::size_t>(t) * m + r];
      const double a1s = a[static_cast<std::size_t>(t + 1) * m + r];
      const double a2s = a[static_cast<std::size_t>(t + 2) * m + r];
      const double a3s = a[static_cast<std::size_t>(t + 3) * m + r];
      const __m256d a0 = _mm256_set1_pd(a0s);
      const __m256d a1 = _mm256_set1_pd(a1s);
      const __m256d a2 = _mm256_set1_pd(a2s);
      const __m256d a3 = _mm256_set1_pd(a3s);
      const double* b0 = b + static_cast<std::size_t>(t) * n;
      const double* b1 = b0 + n;
      const double* b2 = b1 + n;
      const double* b3 = b2 + n;
      int j = 0;
      for (; j < nv; j += 4) {
        __m256d cj = _mm256_loadu_pd(cr + j);
        cj = _mm256_add_pd(cj, _mm256_mul_pd(a0, _mm256_loadu_pd(b0 + j)));
        cj = _mm256_add_pd(cj, _mm256_mul_pd(a1, _mm256_loadu_pd(b1 + j)));
        cj = _mm256_add_pd(cj, _mm256_mul_pd(a2, _mm256_loadu_pd(b2 + j)));
        cj = _mm256_add_pd(cj, _mm256_mul_pd(a3, _mm256_loadu_pd(b3 + j)));
        _mm256_storeu_pd(cr + j, cj);
      }
      for (; j < n; ++j) {
        double cj = cr[j];
        cj += a0s * b0[j];
        cj += a1s * b1[j];
        cj += a2s * b2[j];
        cj += a3s * b3[j];
        cr[j] = cj;
      }
    }
    for (; t < k; ++t) {
      const double ats = a[static_cast<std::size_t>(t) * m + r];
      const __m256d at = _mm256_set1_pd(ats);
      const double* bt = b + static_cast<std::size_t>(t) * n;
      int j = 0;
      for (; j < nv; j += 4) {
        __m256d cj = _mm256_loadu_pd(cr + j);
        cj = _mm256_add_pd(cj, _mm256_mul_pd(at, _mm256_loadu_pd(bt + j)));
        _mm256_storeu_pd(cr + j, cj);
      }
      for (; j < n; ++j) cr[j] += ats * bt[j];
    }
  }
}

void ew_add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void ew_sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void ew_mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void ew_axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yi = _mm256_add_pd(_mm256_loadu_pd(y + i),
                                     _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yi);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void ew_scale(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void row_scale(const double* v, const double* m, double* out, int rows, int cols, bool acc) {
  const int cv = cols & ~3;
  for (int r = 0; r < rows; ++r) {
    const __m256d vr = _mm256_set1_pd(v[r]);
    const double* mr = m + static_cast<std::size_t>(r) * cols;
    double* or_ = out + static_cast<std::size_t>(r) * cols;
    int j = 0;
    if (acc) {
      for (; j < cv; j += 4) {
        const __m256d o = _mm256_add_pd(_mm256_loadu_pd(or_ + j),
                                        _mm256_mul_pd(vr, _mm256_loadu_pd(mr + j)));
        _mm256_storeu_pd(or_ + j, o);
      }
      for (; j < cols; ++j) or_[j] += v[r] * mr[j];
    } else {
      for (; j < cv; j += 4)
        _mm256_storeu_pd(or_ + j, _mm256_mul_pd(vr, _mm256_loadu_pd(mr + j)));
      for (; j < cols; ++j) or_[j] = v[r] * mr[j];
    }
  }
}

}  // namespace avx2

static const Vtbl avx2_table = {
    avx2::gemm_nn, avx2::gemm_nt, avx2::gemm_tn, avx2::ew_add, avx2::ew_sub,
    avx2::ew_mul,  avx2::ew_axpy, avx2::ew_scale, avx2::row_scale,
};

const Vtbl* avx2_vtbl_impl() { return &avx2_table; }

}  // namespace xneusm::kern

#else

namespace xneusm::kern {
const Vtbl* avx2_vtbl_impl() { return nullptr; }
}  // namespace xneusm::kern

#endif
