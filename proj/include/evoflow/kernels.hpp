#pragma once

#include <cstddef>
#include <span>
#include <string>

// Data-parallel inner loops shared by the grid-density oracle and the
// Monte Carlo batch reductions. Every kernel has a scalar reference
// implementation and, on x86-64, an AVX2 variant. The active variant is
// chosen once at runtime from cpuid; tests compare the two paths on the
// same inputs.
//
// Conventions:
//  - all spans are contiguous doubles, no alignment requirement;
//  - output spans must not overlap any input span;
//  - reductions accumulate in lane-parallel partial sums, so the SIMD
//    result may differ from the scalar one by roundoff (summation
//    order), never by more than a few ulps per element.

namespace evoflow::kernels {

enum class SimdMode {
  Auto,    // pick the widest variant the CPU supports
  Scalar,  // force the reference implementation
  Avx2,    // force AVX2 (error if unsupported)
};

struct KernelTable {
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i u[i]*x[i]*y[i]
  double (*dot3)(const double* u, const double* x, const double* y, std::size_t n);
  // y[i] += a*x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double* x, double c, std::size_t n);
  // out[i] += c*x[i]*y[i]
  void (*add_scaled_product)(double* out, double c, const double* x, const double* y,
                             std::size_t n);
  // out[k] = s[k]*(bmu - q*s[k])   (per-node payoff -q s^2 + (b mu) s)
  void (*payoff_quadratic)(const double* s, double q, double bmu, double* out,
                           std::size_t n);
  // out[k] = w[k]*(payoff[k] - mean_payoff)
  void (*replicator_update)(const double* w, const double* payoff, double mean_payoff,
                            double* out, std::size_t n);
  // out = w + (h/6)*(k1 + 2 k2 + 2 k3 + k4)
  void (*rk4_combine)(const double* w, const double* k1, const double* k2,
                      const double* k3, const double* k4, double h, double* out,
                      std::size_t n);
  // weighted central sums about mu: m2 = sum w (s-mu)^2, m3, m4
  void (*central_moments)(const double* w, const double* s, double mu, double* m2,
                          double* m3, double* m4, std::size_t n);
};

/// Reference implementation; always available.
const KernelTable& scalar_table();

/// AVX2 implementation, or nullptr when the binary was built without
/// AVX2 support or the CPU lacks it.
const KernelTable* avx2_table();

/// Force or reset the dispatch choice. Thread-unsafe by design: call it
/// during setup, not concurrently with kernel use.
void set_simd_mode(SimdMode mode);
SimdMode simd_mode();

/// Name of the variant calls are currently routed to ("scalar", "avx2").
std::string active_variant();

const KernelTable& active_table();

// Span-based entry points used throughout the library.
inline double sum(std::span<const double> x) {
  return active_table().sum(x.data(), x.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) {
  return active_table().dot(x.data(), y.data(), x.size());
}
inline double dot3(std::span<const double> u, std::span<const double> x,
                   std::span<const double> y) {
  return active_table().dot3(u.data(), x.data(), y.data(), u.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active_table().axpy(a, x.data(), y.data(), x.size());
}
inline void scale(std::span<double> x, double c) {
  active_table().scale(x.data(), c, x.size());
}
inline void add_scaled_product(std::span<double> out, double c,
                               std::span<const double> x, std::span<const double> y) {
  active_table().add_scaled_product(out.data(), c, x.data(), y.data(), out.size());
}
inline void payoff_quadratic(std::span<const double> s, double q, double bmu,
                             std::span<double> out) {
  active_table().payoff_quadratic(s.data(), q, bmu, out.data(), s.size());
}
inline void replicator_update(std::span<const double> w, std::span<const double> payoff,
                              double mean_payoff, std::span<double> out) {
  active_table().replicator_update(w.data(), payoff.data(), mean_payoff, out.data(),
                                   w.size());
}
inline void rk4_combine(std::span<const double> w, std::span<const double> k1,
                        std::span<const double> k2, std::span<const double> k3,
                        std::span<const double> k4, double h, std::span<double> out) {
  active_table().rk4_combine(w.data(), k1.data(), k2.data(), k3.data(), k4.data(), h,
                             out.data(), w.size());
}
inline void central_moments(std::span<const double> w, std::span<const double> s,
                            double mu, double& m2, double& m3, double& m4) {
  active_table().central_moments(w.data(), s.data(), mu, &m2, &m3, &m4, w.size());
}

}  // namespace evoflow::kernels
