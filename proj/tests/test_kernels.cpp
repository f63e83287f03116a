#include <doctest.h>

#include <cmath>
#include <vector>

#include "evoflow/kernels.hpp"
#include "evoflow/rng.hpp"

using namespace evoflow;
using kernels::KernelTable;

namespace {

std::vector<double> random_array(std::size_t n, std::uint64_t stream, double scale = 1.0) {
  CounterRng rng(20240811, stream);
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.next_normal();
  return v;
}

// Tolerance for reductions: the SIMD path reorders the summation, so
// compare against the absolute-value scale of the terms.
double reduction_tol(const std::vector<double>& terms) {
  double scale = 1.0;
  for (double t : terms) scale += std::abs(t);
  return 1e-14 * scale;
}

const std::vector<std::size_t> kLengths = {0, 1, 2, 3, 4, 5, 7, 8, 15, 64, 1001, 2051};

}  // namespace

TEST_CASE("kernel dispatch reports a valid variant") {
  kernels::set_simd_mode(kernels::SimdMode::Auto);
  CHECK((kernels::active_variant() == "scalar" || kernels::active_variant() == "avx2"));
  kernels::set_simd_mode(kernels::SimdMode::Scalar);
  CHECK(kernels::active_variant() == "scalar");
  kernels::set_simd_mode(kernels::SimdMode::Auto);
}

TEST_CASE("scalar kernels: reference semantics on small cases") {
  const KernelTable& k = kernels::scalar_table();
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> y = {4.0, -5.0, 6.0};
  const std::vector<double> u = {0.5, 0.25, 0.25};
  CHECK(k.sum(x.data(), 3) == doctest::Approx(6.0));
  CHECK(k.dot(x.data(), y.data(), 3) == doctest::Approx(4.0 - 10.0 + 18.0));
  CHECK(k.dot3(u.data(), x.data(), y.data(), 3) ==
        doctest::Approx(0.5 * 4.0 + 0.25 * -10.0 + 0.25 * 18.0));

  std::vector<double> z = y;
  k.axpy(2.0, x.data(), z.data(), 3);
  CHECK(z[0] == doctest::Approx(6.0));
  CHECK(z[2] == doctest::Approx(12.0));

  // payoff s (bmu - q s) at q=1, bmu=0 is -s^2
  std::vector<double> payoff(3);
  k.payoff_quadratic(x.data(), 1.0, 0.0, payoff.data(), 3);
  CHECK(payoff[0] == doctest::Approx(-1.0));
  CHECK(payoff[2] == doctest::Approx(-9.0));

  std::vector<double> wdot(3);
  k.replicator_update(u.data(), payoff.data(), -0.5, wdot.data(), 3);
  CHECK(wdot[0] == doctest::Approx(0.5 * (-1.0 + 0.5)));
  CHECK(wdot[1] == doctest::Approx(0.25 * (-4.0 + 0.5)));
}

TEST_CASE("avx2 kernels match the scalar reference") {
  const KernelTable* avx2 = kernels::avx2_table();
  if (!avx2) {
    MESSAGE("AVX2 unavailable on this host, skipping equivalence checks");
    return;
  }
  const KernelTable& ref = kernels::scalar_table();

  for (std::size_t n : kLengths) {
    CAPTURE(n);
    const auto x = random_array(n, 2 * n + 1);
    const auto y = random_array(n, 3 * n + 2);
    auto u = random_array(n, 5 * n + 3);
    for (double& v : u) v = std::abs(v);  // weight-like

    // reductions: reordered sums, tolerance-based
    {
      std::vector<double> terms = x;
      CHECK(std::abs(avx2->sum(x.data(), n) - ref.sum(x.data(), n)) <=
            reduction_tol(terms));
      for (std::size_t i = 0; i < n; ++i) terms[i] = x[i] * y[i];
      CHECK(std::abs(avx2->dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <=
            reduction_tol(terms));
      for (std::size_t i = 0; i < n; ++i) terms[i] = u[i] * x[i] * y[i];
      CHECK(std::abs(avx2->dot3(u.data(), x.data(), y.data(), n) -
                     ref.dot3(u.data(), x.data(), y.data(), n)) <= reduction_tol(terms));
    }

    // elementwise kernels: compare per element, a few ulps
    auto check_close = [&](const std::vector<double>& a, const std::vector<double>& b) {
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i] - b[i]) <= 1e-14 * (1.0 + std::abs(a[i])));
      }
    };

    std::vector<double> ya = y, yb = y;
    ref.axpy(1.7, x.data(), ya.data(), n);
    avx2->axpy(1.7, x.data(), yb.data(), n);
    check_close(ya, yb);

    std::vector<double> sa = x, sb = x;
    ref.scale(sa.data(), -0.37, n);
    avx2->scale(sb.data(), -0.37, n);
    check_close(sa, sb);

    std::vector<double> oa = y, ob = y;
    ref.add_scaled_product(oa.data(), 0.9, x.data(), u.data(), n);
    avx2->add_scaled_product(ob.data(), 0.9, x.data(), u.data(), n);
    check_close(oa, ob);

    std::vector<double> pa(n), pb(n);
    ref.payoff_quadratic(x.data(), 0.5, 1.25, pa.data(), n);
    avx2->payoff_quadratic(x.data(), 0.5, 1.25, pb.data(), n);
    check_close(pa, pb);

    std::vector<double> ra(n), rb(n);
    ref.replicator_update(u.data(), x.data(), 0.31, ra.data(), n);
    avx2->replicator_update(u.data(), x.data(), 0.31, rb.data(), n);
    check_close(ra, rb);

    const auto k2 = random_array(n, 7 * n + 5);
    const auto k3 = random_array(n, 7 * n + 6);
    const auto k4 = random_array(n, 7 * n + 7);
    std::vector<double> ca(n), cb(n);
    ref.rk4_combine(u.data(), x.data(), k2.data(), k3.data(), k4.data(), 1e-3, ca.data(), n);
    avx2->rk4_combine(u.data(), x.data(), k2.data(), k3.data(), k4.data(), 1e-3, cb.data(), n);
    check_close(ca, cb);

    double a2, a3, a4, b2, b3, b4;
    ref.central_moments(u.data(), x.data(), 0.1, &a2, &a3, &a4, n);
    avx2->central_moments(u.data(), x.data(), 0.1, &b2, &b3, &b4, n);
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) terms[i] = u[i] * std::pow(x[i] - 0.1, 4);
    CHECK(std::abs(a2 - b2) <= reduction_tol(terms));
    CHECK(std::abs(a3 - b3) <= reduction_tol(terms));
    CHECK(std::abs(a4 - b4) <= reduction_tol(terms));
  }
}

TEST_CASE("kernels accept unaligned spans") {
  const KernelTable* avx2 = kernels::avx2_table();
  if (!avx2) return;
  auto x = random_array(133, 11);
  auto y = random_array(133, 12);
  const std::size_t n = 128;
  // offset by one double to break 32-byte alignment
  const double r_ref =
      kernels::scalar_table().dot(x.data() + 1, y.data() + 1, n);
  const double r_avx = avx2->dot(x.data() + 1, y.data() + 1, n);
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = x[i + 1] * y[i + 1];
  CHECK(std::abs(r_ref - r_avx) <= reduction_tol(terms));
}
