#include "evoflow/verify.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "evoflow/flow.hpp"
#include "evoflow/nes.hpp"
#include "evoflow/oracle.hpp"
#include "evoflow/rng.hpp"
#include "evoflow/simplex.hpp"

// Numeric self-checks behind the `verify` subcommand. Fixed seeds
// throughout: a rerun produces the identical report.

namespace evoflow {
namespace {

Eigen::VectorXd rand_vector(CounterRng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.next_normal();
  return v;
}

Eigen::MatrixXd rand_matrix(CounterRng& rng, Eigen::Index n) {
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = rng.next_normal();
  return M;
}

Eigen::MatrixXd rand_symmetric(CounterRng& rng, Eigen::Index n) {
  const Eigen::MatrixXd M = rand_matrix(rng, n);
  return ((M + M.transpose()) / 2.0).eval();
}

Eigen::MatrixXd rand_spd(CounterRng& rng, Eigen::Index n, double ridge = 0.3) {
  const Eigen::MatrixXd A = rand_matrix(rng, n);
  return (A * A.transpose() / static_cast<double>(n) +
          ridge * Eigen::MatrixXd::Identity(n, n))
      .eval();
}

SimplexPoint rand_interior(CounterRng& rng, Eigen::Index n) {
  Eigen::VectorXd z = rand_vector(rng, n);
  Eigen::VectorXd w = (z.array() - z.maxCoeff()).exp();
  w /= w.sum();
  w = (w.array() + 1e-4).matrix();
  w /= w.sum();
  return SimplexPoint(w);
}

GaussianParams rand_gaussian(CounterRng& rng, Eigen::Index n) {
  return GaussianParams(rand_vector(rng, n), rand_spd(rng, n));
}

QuadBilinearLandscape rand_landscape(CounterRng& rng, Eigen::Index n) {
  return QuadBilinearLandscape(rand_spd(rng, n), rand_matrix(rng, n));
}

ManifoldTangent rand_tangent(CounterRng& rng, Eigen::Index n) {
  return ManifoldTangent(rand_vector(rng, n), rand_symmetric(rng, n));
}

class Report {
 public:
  void check(const std::string& suite, const std::string& name,
             const std::function<std::pair<bool, std::string>()>& body) {
    VerificationCheck entry;
    entry.suite = suite;
    entry.name = name;
    try {
      const auto [passed, detail] = body();
      entry.passed = passed;
      entry.detail = detail;
    } catch (const std::exception& e) {
      entry.passed = false;
      entry.detail = std::string("exception: ") + e.what();
    }
    checks_.push_back(std::move(entry));
  }

  std::vector<VerificationCheck> take() { return std::move(checks_); }

 private:
  std::vector<VerificationCheck> checks_;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------- simplex

void verify_simplex(Report& report) {
  report.check("simplex", "replicator_tangency", [] {
    CounterRng rng(1001, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::Index n = 2 + trial % 4;
      const SimplexPoint p = rand_interior(rng, n);
      const FiniteLandscape f = FiniteLandscape::from_matrix(rand_matrix(rng, n));
      worst = std::max(worst, std::abs(replicator_rhs(p, f).sum()));
    }
    return std::make_pair(worst <= 1e-12, "max |sum v| = " + fmt(worst));
  });

  report.check("simplex", "shahshahani_replicator_identity", [] {
    CounterRng rng(1002, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index n = 2 + trial % 4;
      const Eigen::MatrixXd A = rand_symmetric(rng, n);
      const SimplexPoint p = rand_interior(rng, n);
      const Eigen::VectorXd lhs = shahshahani_gradient(p, A * p.p());
      const Eigen::VectorXd rhs = replicator_rhs(p, FiniteLandscape::from_matrix(A));
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return std::make_pair(worst <= 1e-12, "max deviation = " + fmt(worst));
  });

  report.check("simplex", "kl_properties", [] {
    CounterRng rng(1003, 0);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index n = 2 + trial % 4;
      const SimplexPoint a = rand_interior(rng, n);
      const SimplexPoint b = rand_interior(rng, n);
      ok = ok && kl_categorical(a, b) >= -1e-15;
      ok = ok && std::abs(kl_categorical(a, a)) <= 1e-15;
      if ((a.p() - b.p()).cwiseAbs().maxCoeff() > 1e-6)
        ok = ok && kl_categorical(a, b) > 0.0;
    }
    return std::make_pair(ok, std::string("nonnegative, zero iff equal"));
  });

  report.check("simplex", "kl_expansion_cubic", [] {
    const SimplexPoint p(Eigen::Vector3d(0.2, 0.3, 0.5));
    Eigen::VectorXd dir(3);
    dir << 1.0, -0.4, -0.6;
    dir /= dir.norm();
    auto residual = [&](double h) {
      const Eigen::VectorXd delta = h * dir;
      const SimplexPoint moved(p.p() + delta);
      const double quad = 0.5 * delta.dot(fisher_categorical(p).cwiseProduct(delta));
      return std::abs(kl_categorical(moved, p) - quad);
    };
    bool ok = true;
    std::string detail;
    double h = 1e-2;
    for (int round = 0; round < 2; ++round) {
      const double ratio = residual(h) / residual(h / 2.0);
      ok = ok && ratio >= 6.0 && ratio <= 10.0;
      detail += (round ? ", " : "ratios: ") + fmt(ratio);
      h /= 2.0;
    }
    return std::make_pair(ok, detail);
  });

  report.check("simplex", "flow_preserves_simplex", [] {
    Eigen::MatrixXd A(2, 2);
    A << 0, 1, 1, 0;
    const FiniteLandscape f = FiniteLandscape::from_matrix(A);
    FlowConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 100.0;
    cfg.record_every = 50;
    const auto traj = integrate(
        [&f](double, const Eigen::VectorXd& p) { return replicator_field(p, f); },
        SimplexPoint(Eigen::Vector2d(0.9, 0.1)), cfg);
    double worst = 0.0;
    bool interior = true;
    for (const Eigen::VectorXd& p : traj.states) {
      worst = std::max(worst, std::abs(p.sum() - 1.0));
      interior = interior && p.minCoeff() > 0.0;
    }
    return std::make_pair(worst <= 1e-9 && interior, "max |sum-1| = " + fmt(worst));
  });
}

// --------------------------------------------------------------- gaussian

void verify_gaussian(Report& report) {
  report.check("gaussian", "natural_gradient_replicator_identity", [] {
    CounterRng rng(2001, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index n = 1 + trial % 5;
      const GaussianParams g = rand_gaussian(rng, n);
      const QuadBilinearLandscape L = rand_landscape(rng, n);
      const ManifoldTangent direct = replicator_rhs_gaussian(g, L);
      const ManifoldTangent composed = natural_grad(g, vanilla_grad(g, L));
      worst = std::max(worst, (direct.da - composed.da).cwiseAbs().maxCoeff());
      worst = std::max(worst, (direct.dC - composed.dC).cwiseAbs().maxCoeff());
    }
    return std::make_pair(worst <= 1e-12, "max deviation = " + fmt(worst));
  });

  report.check("gaussian", "covariance_direction_negative_definite", [] {
    CounterRng rng(2002, 0);
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Index n = 1 + trial % 5;
      const GaussianParams g = rand_gaussian(rng, n);
      const QuadBilinearLandscape L = rand_landscape(rng, n);
      const ManifoldTangent t = replicator_rhs_gaussian(g, L);
      ok = ok && (t.dC - t.dC.transpose()).cwiseAbs().maxCoeff() <= 1e-12;
      Eigen::LLT<Eigen::MatrixXd> llt((-t.dC).eval());
      ok = ok && llt.info() == Eigen::Success;
    }
    return std::make_pair(ok, std::string("-dC/dt admits a Cholesky factor"));
  });

  report.check("gaussian", "kl_properties", [] {
    CounterRng rng(2003, 0);
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Index n = 1 + trial % 4;
      const GaussianParams g = rand_gaussian(rng, n);
      const GaussianParams h = rand_gaussian(rng, n);
      ok = ok && kl_gaussian(g, h) > 0.0;
      ok = ok && std::abs(kl_gaussian(g, g)) <= 1e-12;
    }
    const GaussianParams a(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    const GaussianParams b(Eigen::VectorXd::Ones(1),
                           Eigen::MatrixXd::Constant(1, 1, 2.0));
    ok = ok && std::abs(kl_gaussian(a, b) - kl_gaussian(b, a)) > 1e-3;
    return std::make_pair(ok, std::string("nonnegative, zero iff equal, asymmetric"));
  });

  report.check("gaussian", "kl_expansion_cubic", [] {
    CounterRng rng(2004, 0);
    const GaussianParams g = rand_gaussian(rng, 3);
    ManifoldTangent dir = rand_tangent(rng, 3);
    dir = dir * (1.0 / dir.norm());
    auto residual = [&](double h) {
      const ManifoldTangent delta = dir * h;
      const GaussianParams moved(g.a() + delta.da, g.C() + delta.dC);
      return std::abs(kl_gaussian(moved, g) - fisher_quadratic_form(g, delta));
    };
    bool ok = true;
    std::string detail;
    double h = 0.05;
    for (int round = 0; round < 2; ++round) {
      const double ratio = residual(h) / residual(h / 2.0);
      ok = ok && ratio >= 6.0 && ratio <= 10.0;
      detail += (round ? ", " : "ratios: ") + fmt(ratio);
      h /= 2.0;
    }
    return std::make_pair(ok, detail);
  });

  report.check("gaussian", "constrained_step_optimality", [] {
    CounterRng rng(2005, 0);
    const double eps = 1e-4;
    bool ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::Index n = 2 + trial % 3;
      const GaussianParams g = rand_gaussian(rng, n);
      const QuadBilinearLandscape L = rand_landscape(rng, n);
      const ManifoldTangent grad = vanilla_grad(g, L);
      const ManifoldTangent nat = natural_grad(g, grad);
      const double gain_star =
          grad.inner(nat * std::sqrt(eps / fisher_quadratic_form(g, nat)));
      ok = ok && gain_star > 0.0;
      for (int probe = 0; probe < 2000; ++probe) {
        ManifoldTangent delta = rand_tangent(rng, n);
        delta = delta * std::sqrt(eps / fisher_quadratic_form(g, delta));
        ok = ok && grad.inner(delta) <= gain_star * (1.0 + 1e-6);
      }
    }
    return std::make_pair(ok, std::string("natural direction beats random tangents"));
  });

  report.check("gaussian", "mean_fitness_monotone", [] {
    CounterRng rng(2006, 0);
    const QuadBilinearLandscape L = rand_landscape(rng, 2);
    const GaussianParams g0 = rand_gaussian(rng, 2);
    FlowConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 5.0;
    cfg.record_every = 1;
    DiagnosticSet<GaussianParams> diag;
    diag.emplace_back("J", [&L](double, const GaussianParams& g) {
      return expected_fitness(g, L);
    });
    const auto traj = integrate(
        [&L](double, const GaussianParams& g) { return replicator_rhs_gaussian(g, L); },
        g0, cfg, diag);
    const auto& J = traj.diagnostic("J");
    bool ok = true;
    for (std::size_t k = 1; k < J.size(); ++k) ok = ok && J[k] >= J[k - 1] - 1e-10;
    return std::make_pair(ok, "final J = " + fmt(J.back()));
  });
}

// ------------------------------------------------------------------- flow

void verify_flow(Report& report) {
  report.check("flow", "rk4_fourth_order", [] {
    CounterRng rng(3001, 0);
    const Eigen::MatrixXd Q = rand_spd(rng, 2);
    const QuadBilinearLandscape L(Q, Eigen::MatrixXd::Zero(2, 2));
    const GaussianParams g0(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    auto max_error = [&](double dt, int stride) {
      FlowConfig cfg;
      cfg.dt = dt;
      cfg.t_end = 1.0;
      cfg.record_every = stride;
      const auto traj = integrate(
          [&L](double, const GaussianParams& g) { return replicator_rhs_gaussian(g, L); },
          g0, cfg);
      double err = 0.0;
      for (std::size_t k = 0; k < traj.size(); ++k)
        err = std::max(err, (traj.states[k].C() -
                             closed_form_covariance(g0.C(), Q, traj.times[k]))
                                .cwiseAbs()
                                .maxCoeff());
      return err;
    };
    const double factor = max_error(0.02, 5) / max_error(0.01, 10);
    return std::make_pair(factor >= 12.0 && factor <= 20.0,
                          "halving dt shrinks error by " + fmt(factor));
  });

  report.check("flow", "closed_form_spd", [] {
    CounterRng rng(3002, 0);
    const Eigen::MatrixXd C0 = rand_spd(rng, 3);
    const Eigen::MatrixXd Q = rand_spd(rng, 3);
    bool ok = true;
    for (double t : {0.0, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
      Eigen::LLT<Eigen::MatrixXd> llt(closed_form_covariance(C0, Q, t));
      ok = ok && llt.info() == Eigen::Success;
    }
    return std::make_pair(ok, std::string("C(t) SPD on t in [0, 1e3]"));
  });

  report.check("flow", "large_t_asymptote", [] {
    CounterRng rng(3003, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::MatrixXd Q = rand_spd(rng, 3);
      const Eigen::MatrixXd C0 = rand_spd(rng, 3);
      const Eigen::MatrixXd Qinv = Q.llt().solve(Eigen::MatrixXd::Identity(3, 3));
      const double t = 1e3;
      const double rel =
          (2.0 * t * closed_form_covariance(C0, Q, t) - Qinv).norm() / Qinv.norm();
      worst = std::max(worst, rel);
    }
    return std::make_pair(worst <= 0.02, "max rel deviation = " + fmt(worst));
  });

  report.check("flow", "negative_spectrum_implies_decay", [] {
    CounterRng rng(3004, 0);
    const Eigen::MatrixXd Q = rand_spd(rng, 2, /*ridge=*/1.0);
    const QuadBilinearLandscape L(Q, Eigen::MatrixXd::Zero(2, 2));
    if (!classify_asymptotics(L).converges_to_delta_at_zero)
      return std::make_pair(false, std::string("unexpected spectrum"));
    const GaussianParams g0(rand_vector(rng, 2), Eigen::MatrixXd::Identity(2, 2));
    FlowConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 1000.0;
    cfg.record_every = 100000;
    const auto traj = integrate(
        [&L](double, const GaussianParams& g) { return replicator_rhs_gaussian(g, L); },
        g0, cfg);
    const double a_norm = traj.states.back().a().norm();
    const double trace = traj.states.back().C().trace();
    return std::make_pair(a_norm < 1e-3 && trace < 1e-3,
                          "at t=1e3: |a| = " + fmt(a_norm) + ", tr C = " + fmt(trace));
  });

  report.check("flow", "rate_model_selection", [] {
    // synthetic exponential series recovers gamma exactly
    std::vector<double> times, values;
    for (int k = 0; k < 60; ++k) {
      times.push_back(k);
      values.push_back(std::exp(-k / 10.0));
    }
    const FittedRate synth = fit_convergence_rate(times, values);
    bool ok = synth.model == FittedRate::Model::Exponential &&
              std::abs(synth.rate - 0.1) <= 1e-8;

    CounterRng rng(3005, 0);
    const QuadBilinearLandscape L(rand_spd(rng, 2, /*ridge=*/0.5),
                                  Eigen::MatrixXd::Zero(2, 2));
    const GaussianParams g0(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    FlowConfig slow;
    slow.dt = 1e-2;
    slow.t_end = 200.0;
    slow.record_every = 100;
    const FittedRate one_over_t = fit_convergence_rate(integrate(
        [&L](double, const GaussianParams& g) { return replicator_rhs_gaussian(g, L); },
        g0, slow));
    ok = ok && one_over_t.model == FittedRate::Model::OneOverT;

    FlowConfig fast;
    fast.dt = 1e-2;
    fast.t_end = 15.0;
    fast.record_every = 10;
    const FittedRate expo = fit_convergence_rate(integrate(
        [&L](double, const GaussianParams& g) { return sigma_normalized_rhs(g, L); }, g0,
        fast));
    ok = ok && expo.model == FittedRate::Model::Exponential && expo.rate > 0.0 &&
         expo.r_squared >= 0.999;
    return std::make_pair(
        ok, "sigma-flow gamma = " + fmt(expo.rate) + ", R2 = " + fmt(expo.r_squared));
  });
}

// -------------------------------------------------------------------- nes

void verify_nes(Report& report) {
  report.check("nes", "score_zero_mean", [] {
    const int m = 100000;
    const GaussianParams g(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    const Eigen::MatrixXd X = sample_gaussian(g, m, 424242u);
    double sum_da = 0.0, sum_dc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double z = X(i, 0);
      sum_da += z;
      sum_dc += 0.5 * (z * z - 1.0);
    }
    const double se_da = 1.0 / std::sqrt(static_cast<double>(m));
    const double se_dc = std::sqrt(0.5 / static_cast<double>(m));
    const bool ok =
        std::abs(sum_da / m) <= 5.0 * se_da && std::abs(sum_dc / m) <= 5.0 * se_dc;
    return std::make_pair(ok, "batch score mean within 5 sigma of zero");
  });

  report.check("nes", "estimator_rate", [] {
    CounterRng rng(4001, 0);
    const GaussianParams g = rand_gaussian(rng, 2);
    const QuadBilinearLandscape L = rand_landscape(rng, 2);
    const ManifoldTangent ref = vanilla_grad(g, L);
    auto rel_err = [&](const ManifoldTangent& est) {
      const ManifoldTangent diff = est + ref * -1.0;
      return diff.norm() / ref.norm();
    };
    double sq_m = 0.0, sq_4m = 0.0;
    for (std::uint64_t k = 0; k < 16; ++k) {
      sq_m += std::pow(rel_err(estimate_search_gradient(g, L, 100000, 300 + k)), 2);
      sq_4m += std::pow(rel_err(estimate_search_gradient(g, L, 400000, 1300 + k)), 2);
    }
    const double factor = std::sqrt(sq_m / sq_4m);
    return std::make_pair(factor >= 1.5 && factor <= 2.7,
                          "RMS error factor m->4m = " + fmt(factor));
  });

  report.check("nes", "rank_utility_invariance", [] {
    CounterRng rng(4002, 0);
    const ShapingSpec spec{ShapingSpec::Kind::Rank, 0.5};
    const Eigen::VectorXd f = rand_vector(rng, 33);
    const Eigen::VectorXd base = rank_utilities(f, spec);
    const Eigen::VectorXd affine = rank_utilities((2.0 * f).array() + 5.0, spec);
    const Eigen::VectorXd expo = rank_utilities(f.array().exp(), spec);
    const bool ok = (base - affine).cwiseAbs().maxCoeff() == 0.0 &&
                    (base - expo).cwiseAbs().maxCoeff() == 0.0 &&
                    std::abs(base.sum()) <= 1e-14;
    return std::make_pair(ok, std::string("exact under monotone transforms, centered"));
  });

  report.check("nes", "sigma_field_parallel", [] {
    CounterRng rng(4003, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index n = 1 + trial % 4;
      const GaussianParams g = rand_gaussian(rng, n);
      const QuadBilinearLandscape L = rand_landscape(rng, n);
      const ManifoldTangent raw = replicator_rhs_gaussian(g, L);
      const ManifoldTangent scaled = sigma_normalized_rhs(g, L);
      const double cosine = raw.inner(scaled) / (raw.norm() * scaled.norm());
      worst = std::max(worst, std::abs(cosine - 1.0));
    }
    return std::make_pair(worst <= 1e-12, "max |cos - 1| = " + fmt(worst));
  });

  report.check("nes", "step_optimality", [] {
    CounterRng rng(4004, 0);
    const double eps = 1e-4;
    bool ok = true;
    double worst_margin = 1.0;
    for (int state = 0; state < 20; ++state) {
      const Eigen::Index n = 1 + state % 5;
      const GaussianParams g = rand_gaussian(rng, n);
      const QuadBilinearLandscape L = rand_landscape(rng, n);
      const ManifoldTangent grad = vanilla_grad(g, L);
      const ManifoldTangent nat = natural_grad(g, grad);
      const double gain_star =
          grad.inner(nat * std::sqrt(eps / fisher_quadratic_form(g, nat)));
      double best_probe = -1e300;
      for (int probe = 0; probe < 10000; ++probe) {
        ManifoldTangent delta = rand_tangent(rng, n);
        delta = delta * std::sqrt(eps / fisher_quadratic_form(g, delta));
        best_probe = std::max(best_probe, grad.inner(delta));
      }
      ok = ok && best_probe <= gain_star * (1.0 + 1e-6);
      worst_margin = std::min(worst_margin, 1.0 - best_probe / gain_star);
    }
    return std::make_pair(ok, "closest probe within " + fmt(worst_margin) +
                                  " of the natural-gradient gain");
  });
}

// ----------------------------------------------------------------- oracle

void verify_oracle(Report& report) {
  report.check("oracle", "grid_mass_conservation", [] {
    CounterRng rng(5001, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int K = 16 + 29 * trial;
      Eigen::VectorXd nodes(K), weights(K);
      for (int k = 0; k < K; ++k) {
        nodes[k] = -2.0 + 4.0 * k / (K - 1.0);
        weights[k] = std::abs(rng.next_normal()) + 1e-3;
      }
      weights /= weights.sum();
      worst = std::max(worst,
                       std::abs(grid_replicator_rhs(GridDensity(nodes, weights), 0.7, 0.3)
                                    .sum()));
    }
    return std::make_pair(worst <= 1e-12, "max |sum wdot| = " + fmt(worst));
  });

  FlowConfig grid_cfg;
  grid_cfg.dt = 1e-3;
  grid_cfg.t_end = 1.0;
  grid_cfg.record_every = 1;

  report.check("oracle", "gaussian_family_forward_invariant", [grid_cfg] {
    const auto traj = integrate(
        GridDensity::discretized_gaussian(-8.0, 8.0, 2048, 0.0, 1.0), 0.5, 0.0, grid_cfg);
    const GridMoments m = grid_moments(traj.states.back());
    double drift = 0.0;
    for (double d : traj.diagnostic("renorm_drift")) drift = std::max(drift, d);
    const bool ok = std::abs(m.variance - 0.5) <= 1e-3 && std::abs(m.skewness) <= 1e-3 &&
                    std::abs(m.excess_kurtosis) <= 1e-2 && drift <= 1e-10;
    return std::make_pair(ok, "var = " + fmt(m.variance) + ", skew = " + fmt(m.skewness) +
                                  ", exkurt = " + fmt(m.excess_kurtosis) +
                                  ", max drift = " + fmt(drift));
  });

  report.check("oracle", "grid_mean_tracks_ode", [grid_cfg] {
    const auto traj = integrate(
        GridDensity::discretized_gaussian(-8.0, 8.0, 2048, 0.5, 1.0), 0.5, 0.0, grid_cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double expected = mean_closed_form_1d(0.5, 1.0, 0.5, 0.0, traj.times[k]);
      worst = std::max(worst, std::abs(traj.diagnostic("mean")[k] - expected));
    }
    return std::make_pair(worst <= 1e-3, "max |mean - ODE| = " + fmt(worst));
  });

  report.check("oracle", "finite_diff_matches_gradient", [] {
    CounterRng rng(5002, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index n = 1 + trial % 4;
      const GaussianParams g = rand_gaussian(rng, n);
      const QuadBilinearLandscape L = rand_landscape(rng, n);
      const ManifoldTangent fd = finite_diff_grad(
          [&L, &g](const Eigen::VectorXd& a, const Eigen::MatrixXd& C) {
            return expected_fitness_vs(a, C, g.a(), L);
          },
          g, 1e-5);
      const ManifoldTangent exact = vanilla_grad(g, L);
      const ManifoldTangent diff = fd + exact * -1.0;
      worst = std::max(worst, diff.norm() / exact.norm());
    }
    return std::make_pair(worst <= 1e-6, "max rel deviation = " + fmt(worst));
  });

  report.check("oracle", "mc_matches_closed_form", [] {
    CounterRng rng(5003, 0);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 3; ++trial) {
      const Eigen::Index n = 1 + trial;
      const GaussianParams g = rand_gaussian(rng, n);
      const QuadBilinearLandscape L = rand_landscape(rng, n);
      const McEstimate est = mc_expectation(L, g, 200000, 9000u + trial);
      const double gap = std::abs(est.value - expected_fitness(g, L));
      ok = ok && gap <= 5.0 * est.std_error;
      detail += (trial ? ", " : "") + fmt(gap / est.std_error) + " sigma";
    }
    return std::make_pair(ok, detail);
  });
}

}  // namespace

std::vector<VerificationCheck> run_verification() {
  Report report;
  verify_simplex(report);
  verify_gaussian(report);
  verify_flow(report);
  verify_nes(report);
  verify_oracle(report);
  return report.take();
}

}  // namespace evoflow
