#include "xneusm/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>

#include "xneusm/error.hpp"

namespace xneusm::kern {

// ---------------------------------------------------------------------------
// Scalar reference kernels. These define the arithmetic semantics; the SIMD
// variants must reproduce them bit for bit.
// ---------------------------------------------------------------------------

namespace scalar {

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    if (!acc) std::fill(ci, ci + n, 0.0);
    const double* ai = a + static_cast<std::size_t>(i) * k;
    int t = 0;
    for (; t + 4 <= k; t += 4) {
      const double a0 = ai[t], a1 = ai[t + 1], a2 = ai[t + 2], a3 = ai[t + 3];
      const double* b0 = b + static_cast<std::size_t>(t) * n;
      const double* b1 = b0 + n;
      const double* b2 = b1 + n;
      const double* b3 = b2 + n;
      for (int j = 0; j < n; ++j) {
        double cj = ci[j];
        cj += a0 * b0[j];
        cj += a1 * b1[j];
        cj += a2 * b2[j];
        cj += a3 * b3[j];
        ci[j] = cj;
      }
    }
    for (; t < k; ++t) {
      const double at = ai[t];
      const double* bt = b + static_cast<std::size_t>(t) * n;
      for (int j = 0; j < n; ++j) ci[j] += at * bt[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<std::size_t>(j) * k;
      double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
      int t = 0;
      for (; t + 4 <= k; t += 4) {
        l0 += ai[t] * bj[t];
        l1 += ai[t + 1] * bj[t + 1];
        l2 += ai[t + 2] * bj[t + 2];
        l3 += ai[t + 3] * bj[t + 3];
      }
      double s = (l0 + l2) + (l1 + l3);
      for (; t < k; ++t) s += ai[t] * bj[t];
      ci[j] = acc ? ci[j] + s : s;
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  for (int r = 0; r < m; ++r) {
    double* cr = c + static_cast<std::size_t>(r) * n;
    if (!acc) std::fill(cr, cr + n, 0.0);
    int t = 0;
    for (; t + 4 <= k; t += 4) {
      const double a0 = a[static_cast<std::size_t>(t) * m + r];
      const double a1 = a[static_cast<std::size_t>(t + 1) * m + r];
      const double a2 = a[static_cast<std::size_t>(t + 2) * m + r];
      const double a3 = a[static_cast<std::size_t>(t + 3) * m + r];
      const double* b0 = b + static_cast<std::size_t>(t) * n;
      const double* b1 = b0 + n;
      const double* b2 = b1 + n;
      const double* b3 = b2 + n;
      for (int j = 0; j < n; ++j) {
        double cj = cr[j];
        cj += a0 * b0[j];
        cj += a1 * b1[j];
        cj += a2 * b2[j];
        cj += a3 * b3[j];
        cr[j] = cj;
      }
    }
    for (; t < k; ++t) {
      const double at = a[static_cast<std::size_t>(t) * m + r];
      const double* bt = b + static_cast<std::size_t>(t) * n;
      for (int j = 0; j < n; ++j) cr[j] += at * bt[j];
    }
  }
}

void ew_add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void ew_sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void ew_mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void ew_axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void ew_scale(double alpha, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void row_scale(const double* v, const double* m, double* out, int rows, int cols, bool acc) {
  for (int r = 0; r < rows; ++r) {
    const double vr = v[r];
    const double* mr = m + static_cast<std::size_t>(r) * cols;
    double* or_ = out + static_cast<std::size_t>(r) * cols;
    if (acc) {
      for (int j = 0; j < cols; ++j) or_[j] += vr * mr[j];
    } else {
      for (int j = 0; j < cols; ++j) or_[j] = vr * mr[j];
    }
  }
}

}  // namespace scalar

static const Vtbl scalar_vtbl = {
    scalar::gemm_nn, scalar::gemm_nt, scalar::gemm_tn, scalar::ew_add, scalar::ew_sub,
    scalar::ew_mul,  scalar::ew_axpy, scalar::ew_scale, scalar::row_scale,
};

// Defined in kernels_avx2.cpp; null on platforms without the AVX2 build.
const Vtbl* avx2_vtbl_impl();

static const Vtbl* avx2_vtbl_ptr() {
#if defined(__x86_64__) || defined(__amd64__)
  if (__builtin_cpu_supports("avx2")) return avx2_vtbl_impl();
#endif
  return nullptr;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

namespace {

struct Dispatch {
  const Vtbl* vtbl;
  Backend backend;

  Dispatch() {
    backend = avx2_vtbl_ptr() ? Backend::avx2 : Backend::scalar;
    if (const char* env = std::getenv("XNEUSM_BACKEND")) {
      if (std::strcmp(env, "scalar") == 0) backend = Backend::scalar;
      else if (std::strcmp(env, "avx2") == 0 && avx2_vtbl_ptr()) backend = Backend::avx2;
    }
    vtbl = backend == Backend::avx2 ? avx2_vtbl_ptr() : &scalar_vtbl;
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

bool backend_supported(Backend b) {
  return b == Backend::scalar || avx2_vtbl_ptr() != nullptr;
}

void set_backend(Backend b) {
  if (!backend_supported(b))
    fail(Errc::domain_error, std::string(backend_name(b)) + " backend not available");
  dispatch().backend = b;
  dispatch().vtbl = b == Backend::avx2 ? avx2_vtbl_ptr() : &scalar_vtbl;
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  dispatch().vtbl->gemm_nn(a, b, c, m, k, n, acc);
}
void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  dispatch().vtbl->gemm_nt(a, b, c, m, k, n, acc);
}
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  dispatch().vtbl->gemm_tn(a, b, c, m, k, n, acc);
}
void ew_add(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().vtbl->ew_add(a, b, out, n);
}
void ew_sub(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().vtbl->ew_sub(a, b, out, n);
}
void ew_mul(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().vtbl->ew_mul(a, b, out, n);
}
void ew_axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().vtbl->ew_axpy(alpha, x, y, n);
}
void ew_scale(double alpha, const double* x, double* out, std::size_t n) {
  dispatch().vtbl->ew_scale(alpha, x, out, n);
}
void row_scale(const double* v, const double* m, double* out, int rows, int cols, bool acc) {
  dispatch().vtbl->row_scale(v, m, out, rows, cols, acc);
}

}  // namespace xneusm::kern
