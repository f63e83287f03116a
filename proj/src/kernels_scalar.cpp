#include "evoflow/kernels.hpp"

// Reference kernels. Plain loops, no tricks: these define the semantics
// the SIMD variants are tested against.

namespace evoflow::kernels {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot3_scalar(const double* u, const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += u[i] * x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* x, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= c;
}

void add_scaled_product_scalar(double* out, double c, const double* x, const double* y,
                               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += c * x[i] * y[i];
}

void payoff_quadratic_scalar(const double* s, double q, double bmu, double* out,
                             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s[i] * (bmu - q * s[i]);
}

void replicator_update_scalar(const double* w, const double* payoff, double mean_payoff,
                              double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * (payoff[i] - mean_payoff);
}

void rk4_combine_scalar(const double* w, const double* k1, const double* k2,
                        const double* k3, const double* k4, double h, double* out,
                        std::size_t n) {
  const double c = h / 6.0;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = w[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void central_moments_scalar(const double* w, const double* s, double mu, double* m2,
                            double* m3, double* m4, std::size_t n) {
  double a2 = 0.0, a3 = 0.0, a4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = s[i] - mu;
    const double d2 = d * d;
    a2 += w[i] * d2;
    a3 += w[i] * d2 * d;
    a4 += w[i] * d2 * d2;
  }
  *m2 = a2;
  *m3 = a3;
  *m4 = a4;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      sum_scalar,
      dot_scalar,
      dot3_scalar,
      axpy_scalar,
      scale_scalar,
      add_scaled_product_scalar,
      payoff_quadratic_scalar,
      replicator_update_scalar,
      rk4_combine_scalar,
      central_moments_scalar,
  };
  return table;
}

}  // namespace evoflow::kernels
