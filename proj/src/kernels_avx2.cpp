#include "evoflow/kernels.hpp"

// AVX2 kernel variants. This file is the only TU compiled with
// -mavx2 -mfma; nothing here runs unless the dispatcher confirmed CPU
// support. Reductions keep four lane-parallel accumulators, so results
// differ from the scalar reference only by summation order.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace evoflow::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot3_avx2(const double* u, const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ux = _mm256_mul_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(x + i));
    acc = _mm256_fmadd_pd(ux, _mm256_loadu_pd(y + i), acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += u[i] * x[i] * y[i];
  return r;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double* x, double c, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(cv, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= c;
}

void add_scaled_product_avx2(double* out, double c, const double* x, const double* y,
                             std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d cx = _mm256_mul_pd(cv, _mm256_loadu_pd(x + i));
    __m256d r = _mm256_fmadd_pd(cx, _mm256_loadu_pd(y + i), _mm256_loadu_pd(out + i));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] += c * x[i] * y[i];
}

void payoff_quadratic_avx2(const double* s, double q, double bmu, double* out,
                           std::size_t n) {
  const __m256d qv = _mm256_set1_pd(q);
  const __m256d bv = _mm256_set1_pd(bmu);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d sv = _mm256_loadu_pd(s + i);
    // bmu - q*s, then multiply by s
    __m256d t = _mm256_fnmadd_pd(qv, sv, bv);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(sv, t));
  }
  for (; i < n; ++i) out[i] = s[i] * (bmu - q * s[i]);
}

void replicator_update_avx2(const double* w, const double* payoff, double mean_payoff,
                            double* out, std::size_t n) {
  const __m256d mv = _mm256_set1_pd(mean_payoff);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(payoff + i), mv);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), diff));
  }
  for (; i < n; ++i) out[i] = w[i] * (payoff[i] - mean_payoff);
}

void rk4_combine_avx2(const double* w, const double* k1, const double* k2,
                      const double* k3, const double* k4, double h, double* out,
                      std::size_t n) {
  const double c = h / 6.0;
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d k = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
    k = _mm256_fmadd_pd(two, _mm256_loadu_pd(k2 + i), k);
    k = _mm256_fmadd_pd(two, _mm256_loadu_pd(k3 + i), k);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(cv, k, _mm256_loadu_pd(w + i)));
  }
  for (; i < n; ++i)
    out[i] = w[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void central_moments_avx2(const double* w, const double* s, double mu, double* m2,
                          double* m3, double* m4, std::size_t n) {
  const __m256d muv = _mm256_set1_pd(mu);
  __m256d a2 = _mm256_setzero_pd();
  __m256d a3 = _mm256_setzero_pd();
  __m256d a4 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(s + i), muv);
    __m256d wv = _mm256_loadu_pd(w + i);
    __m256d d2 = _mm256_mul_pd(d, d);
    __m256d wd2 = _mm256_mul_pd(wv, d2);
    a2 = _mm256_add_pd(a2, wd2);
    a3 = _mm256_fmadd_pd(wd2, d, a3);
    a4 = _mm256_fmadd_pd(wd2, d2, a4);
  }
  double r2 = hsum(a2), r3 = hsum(a3), r4 = hsum(a4);
  for (; i < n; ++i) {
    const double d = s[i] - mu;
    const double d2 = d * d;
    r2 += w[i] * d2;
    r3 += w[i] * d2 * d;
    r4 += w[i] * d2 * d2;
  }
  *m2 = r2;
  *m3 = r3;
  *m4 = r4;
}

}  // namespace

const KernelTable* avx2_table() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
  static const KernelTable table = {
      sum_avx2,
      dot_avx2,
      dot3_avx2,
      axpy_avx2,
      scale_avx2,
      add_scaled_product_avx2,
      payoff_quadratic_avx2,
      replicator_update_avx2,
      rk4_combine_avx2,
      central_moments_avx2,
  };
  return &table;
}

}  // namespace evoflow::kernels

#else  // built without AVX2 support

namespace evoflow::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace evoflow::kernels

#endif
