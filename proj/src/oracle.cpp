#include "evoflow/oracle.hpp"

#include <cmath>
#include <span>

#include "evoflow/kernels.hpp"
#include "evoflow/nes.hpp"

namespace evoflow {
namespace {

std::span<const double> vec(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<double> vec(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void grid_rhs_into(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w, double q,
                   double b, Eigen::VectorXd& payoff, Eigen::VectorXd& out) {
  const double mu = kernels::dot(vec(w), vec(nodes));
  kernels::payoff_quadratic(vec(nodes), q, b * mu, vec(payoff));
  const double mean_payoff = kernels::dot(vec(w), vec(payoff));
  kernels::replicator_update(vec(w), vec(payoff), mean_payoff, vec(out));
}

}  // namespace

GridDensity::GridDensity(Eigen::VectorXd nodes, Eigen::VectorXd weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.size() < 2) throw validation_error("GridDensity: need at least 2 nodes");
  if (nodes_.size() != weights_.size())
    throw validation_error("GridDensity: nodes/weights length mismatch");
  if (!nodes_.allFinite() || !weights_.allFinite())
    throw validation_error("GridDensity: non-finite entry");
  cell_width_ = nodes_[1] - nodes_[0];
  if (!(cell_width_ > 0.0)) throw validation_error("GridDensity: nodes must increase");
  for (Eigen::Index k = 1; k < nodes_.size(); ++k) {
    const double step = nodes_[k] - nodes_[k - 1];
    if (std::abs(step - cell_width_) > 1e-9 * std::max(1.0, std::abs(cell_width_)))
      throw validation_error("GridDensity: nodes not uniformly spaced");
  }
  if (weights_.minCoeff() < 0.0)
    throw validation_error("GridDensity: negative weight");
  if (std::abs(weights_.sum() - 1.0) > kSumTolerance)
    throw validation_error("GridDensity: weights do not sum to 1");
}

GridDensity GridDensity::discretized_gaussian(double s_min, double s_max, int K,
                                              double mean, double variance) {
  if (K < 2) throw validation_error("GridDensity: K must be >= 2");
  if (!(s_max > s_min)) throw validation_error("GridDensity: need s_max > s_min");
  if (!(variance > 0.0)) throw validation_error("GridDensity: variance must be > 0");
  const double h = (s_max - s_min) / static_cast<double>(K);
  Eigen::VectorXd nodes(K), weights(K);
  for (int k = 0; k < K; ++k) {
    nodes[k] = s_min + (static_cast<double>(k) + 0.5) * h;
    const double z = nodes[k] - mean;
    weights[k] = std::exp(-0.5 * z * z / variance);
  }
  weights /= weights.sum();
  return GridDensity(std::move(nodes), std::move(weights));
}

Eigen::VectorXd grid_replicator_rhs(const GridDensity& d, double q, double b) {
  Eigen::VectorXd payoff(d.size()), out(d.size());
  grid_rhs_into(d.nodes(), d.weights(), q, b, payoff, out);
  return out;
}

GridMoments grid_moments(const GridDensity& d) {
  GridMoments m;
  m.mean = kernels::dot(vec(d.weights()), vec(d.nodes()));
  double m2, m3, m4;
  kernels::central_moments(vec(d.weights()), vec(d.nodes()), m.mean, m2, m3, m4);
  m.variance = m2;
  if (m2 < 1e-30) {
    m.higher_defined = false;
    return m;
  }
  const double sd = std::sqrt(m2);
  m.skewness = m3 / (sd * sd * sd);
  m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return m;
}

Trajectory<GridDensity> integrate(const GridDensity& d0, double q, double b,
                                  const FlowConfig& cfg) {
  cfg.validate();
  Trajectory<GridDensity> traj;
  traj.diagnostic_names = {"mean", "variance", "skewness", "excess_kurtosis",
                           "renorm_drift"};
  traj.diagnostics.resize(traj.diagnostic_names.size());

  const Eigen::VectorXd& s = d0.nodes();
  Eigen::VectorXd w = d0.weights();
  const Eigen::Index K = s.size();
  Eigen::VectorXd k1(K), k2(K), k3(K), k4(K), stage(K), payoff(K), wnext(K);

  auto record = [&](double t, double drift) {
    GridDensity state(s, w);
    const GridMoments m = grid_moments(state);
    traj.times.push_back(t);
    traj.states.push_back(std::move(state));
    traj.diagnostics[0].push_back(m.mean);
    traj.diagnostics[1].push_back(m.variance);
    traj.diagnostics[2].push_back(m.skewness);
    traj.diagnostics[3].push_back(m.excess_kurtosis);
    traj.diagnostics[4].push_back(drift);
  };

  record(0.0, 0.0);
  const long n_steps = cfg.steps();
  const double h = cfg.dt;
  for (long step = 0; step < n_steps; ++step) {
    grid_rhs_into(s, w, q, b, payoff, k1);
    stage = w;
    kernels::axpy(0.5 * h, vec(k1), vec(stage));
    grid_rhs_into(s, stage, q, b, payoff, k2);
    stage = w;
    kernels::axpy(0.5 * h, vec(k2), vec(stage));
    grid_rhs_into(s, stage, q, b, payoff, k3);
    stage = w;
    kernels::axpy(h, vec(k3), vec(stage));
    grid_rhs_into(s, stage, q, b, payoff, k4);
    kernels::rk4_combine(vec(w), vec(k1), vec(k2), vec(k3), vec(k4), h, vec(wnext));

    if (!wnext.allFinite())
      throw numerical_error("integrate(grid): non-finite weights");
    const double wmin = wnext.minCoeff();
    if (wmin < -1e-12)
      throw numerical_error("integrate(grid): negative weight (reduce dt)");
    if (wmin < 0.0) wnext = wnext.cwiseMax(0.0);  // roundoff floor

    const double mass = kernels::sum(vec(wnext));
    const double drift = std::abs(1.0 - mass);
    kernels::scale(vec(wnext), 1.0 / mass);
    w = wnext;

    if ((step + 1) % cfg.record_every == 0 || step + 1 == n_steps)
      record(static_cast<double>(step + 1) * h, drift);
  }
  return traj;
}

double mean_closed_form_1d(double a0, double c0, double q, double b, double t) {
  if (!(q > 0.0)) throw validation_error("mean_closed_form_1d: q must be > 0");
  if (!(c0 > 0.0)) throw validation_error("mean_closed_form_1d: c0 must be > 0");
  return a0 * std::pow(1.0 + 2.0 * q * c0 * t, (b - 2.0 * q) / (2.0 * q));
}

ManifoldTangent finite_diff_grad(const RawObjective& objective, const GaussianParams& g,
                                 double h) {
  if (!(h >= 1e-8 && h <= 1e-3))
    throw validation_error("finite_diff_grad: h must be in [1e-8, 1e-3]");
  if (!objective) throw validation_error("finite_diff_grad: empty objective");
  const Eigen::Index n = g.dim();

  auto eval = [&](const Eigen::VectorXd& a, const Eigen::MatrixXd& C) {
    const double v = objective(a, C);
    if (!std::isfinite(v))
      throw numerical_error("finite_diff_grad: non-finite objective value");
    return v;
  };

  Eigen::VectorXd da(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd ap = g.a(), am = g.a();
    ap[i] += h;
    am[i] -= h;
    da[i] = (eval(ap, g.C()) - eval(am, g.C())) / (2.0 * h);
  }
  Eigen::MatrixXd dC(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::MatrixXd Cp = g.C(), Cm = g.C();
      Cp(i, j) += h;
      Cm(i, j) -= h;
      dC(i, j) = (eval(g.a(), Cp) - eval(g.a(), Cm)) / (2.0 * h);
    }
  dC = ((dC + dC.transpose()) / 2.0).eval();
  return ManifoldTangent(std::move(da), std::move(dC));
}

McEstimate mc_expectation(const QuadBilinearLandscape& L, const GaussianParams& g, int m,
                          std::uint64_t seed) {
  if (m < 100) throw validation_error("mc_expectation: need m >= 100");
  const SampleBatch batch =
      make_batch(g, L, m, seed, ShapingSpec{}, OpponentModel::Paired);
  const double md = static_cast<double>(m);
  const double mean = kernels::sum(vec(batch.fitness)) / md;
  const double sq = kernels::dot(vec(batch.fitness), vec(batch.fitness));
  const double var = std::max(0.0, (sq - md * mean * mean) / (md - 1.0));
  return {mean, std::sqrt(var / md)};
}

}  // namespace evoflow
