#include "evoflow/flow.hpp"

#include <cmath>

namespace evoflow {
namespace {

constexpr double kSumDriftGuard = 1e-6;

void record_sample(double t, const Eigen::VectorXd& p,
                   const DiagnosticSet<Eigen::VectorXd>& diag,
                   Trajectory<Eigen::VectorXd>& traj) {
  traj.times.push_back(t);
  traj.states.push_back(p);
  for (std::size_t d = 0; d < diag.size(); ++d)
    traj.diagnostics[d].push_back(diag[d].second(t, p));
}

void record_sample(double t, const GaussianParams& g,
                   const DiagnosticSet<GaussianParams>& diag,
                   Trajectory<GaussianParams>& traj) {
  traj.times.push_back(t);
  traj.states.push_back(g);
  for (std::size_t d = 0; d < diag.size(); ++d)
    traj.diagnostics[d].push_back(diag[d].second(t, g));
}

template <class State, class Diag>
void init_trajectory(const Diag& diag, Trajectory<State>& traj) {
  for (const auto& [name, fn] : diag) {
    traj.diagnostic_names.push_back(name);
    traj.diagnostics.emplace_back();
  }
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};

LinearFit linear_least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

double r_squared(const std::vector<double>& y, const std::vector<double>& yhat) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  }
  if (ss_tot <= 0.0) return ss_res <= 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

void FlowConfig::validate() const {
  if (!(dt > 0.0)) throw validation_error("FlowConfig: dt must be positive");
  if (!(t_end > 0.0)) throw validation_error("FlowConfig: t_end must be positive");
  if (record_every < 1) throw validation_error("FlowConfig: record_every must be >= 1");
  if (!(boundary_eps > 0.0) || boundary_eps > 1e-6)
    throw validation_error("FlowConfig: boundary_eps must be in (0, 1e-6]");
}

long FlowConfig::steps() const {
  return static_cast<long>(std::ceil(t_end / dt - 1e-12));
}

Trajectory<Eigen::VectorXd> integrate(const SimplexField& rhs, const SimplexPoint& p0,
                                      const FlowConfig& cfg,
                                      const DiagnosticSet<Eigen::VectorXd>& diag) {
  cfg.validate();
  Trajectory<Eigen::VectorXd> traj;
  init_trajectory(diag, traj);

  Eigen::VectorXd p = p0.p();
  record_sample(0.0, p, diag, traj);

  const long n_steps = cfg.steps();
  const double h = cfg.dt;
  for (long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Eigen::VectorXd k1 = rhs(t, p);
    const Eigen::VectorXd k2 = rhs(t + 0.5 * h, p + (0.5 * h) * k1);
    const Eigen::VectorXd k3 = rhs(t + 0.5 * h, p + (0.5 * h) * k2);
    const Eigen::VectorXd k4 = rhs(t + h, p + h * k3);
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!p.allFinite())
      throw numerical_error("integrate(simplex): non-finite state at t=" +
                            std::to_string(t + h));
    if (p.minCoeff() < cfg.boundary_eps)
      throw numerical_error("integrate(simplex): boundary event at t=" +
                            std::to_string(t + h));
    if (std::abs(p.sum() - 1.0) > kSumDriftGuard)
      throw numerical_error("integrate(simplex): mass drift at t=" +
                            std::to_string(t + h));

    if ((k + 1) % cfg.record_every == 0 || k + 1 == n_steps)
      record_sample(static_cast<double>(k + 1) * h, p, diag, traj);
  }
  return traj;
}

Trajectory<GaussianParams> integrate(const GaussianField& rhs, const GaussianParams& g0,
                                     const FlowConfig& cfg,
                                     const DiagnosticSet<GaussianParams>& diag) {
  cfg.validate();
  Trajectory<GaussianParams> traj;
  init_trajectory(diag, traj);

  // Stage states are revalidated through the GaussianParams constructor;
  // a failed factorization there means the step left the SPD cone.
  auto advance = [](const GaussianParams& g, const ManifoldTangent& k,
                    double c) -> GaussianParams {
    Eigen::VectorXd a = g.a() + c * k.da;
    Eigen::MatrixXd C = g.C() + c * k.dC;
    C = ((C + C.transpose()) / 2.0).eval();
    try {
      return GaussianParams(std::move(a), std::move(C));
    } catch (const validation_error& e) {
      throw numerical_error(std::string("integrate(gaussian): SPD violation "
                                        "(consider a smaller dt): ") +
                            e.what());
    }
  };

  GaussianParams g = g0;
  record_sample(0.0, g, diag, traj);

  const long n_steps = cfg.steps();
  const double h = cfg.dt;
  for (long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const ManifoldTangent k1 = rhs(t, g);
    const ManifoldTangent k2 = rhs(t + 0.5 * h, advance(g, k1, 0.5 * h));
    const ManifoldTangent k3 = rhs(t + 0.5 * h, advance(g, k2, 0.5 * h));
    const ManifoldTangent k4 = rhs(t + h, advance(g, k3, h));
    const ManifoldTangent step = k1 + k2 * 2.0 + k3 * 2.0 + k4;
    g = advance(g, step, h / 6.0);
    if (!g.a().allFinite() || !g.C().allFinite())
      throw numerical_error("integrate(gaussian): non-finite state at t=" +
                            std::to_string(t + h));

    if ((k + 1) % cfg.record_every == 0 || k + 1 == n_steps)
      record_sample(static_cast<double>(k + 1) * h, g, diag, traj);
  }
  return traj;
}

Eigen::MatrixXd closed_form_covariance(const Eigen::MatrixXd& C0, const Eigen::MatrixXd& Q,
                                       double t) {
  if (t < 0.0) throw validation_error("closed_form_covariance: t must be >= 0");
  if (C0.rows() != C0.cols() || Q.rows() != Q.cols() || C0.rows() != Q.rows())
    throw validation_error("closed_form_covariance: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt0(C0);
  if (llt0.info() != Eigen::Success)
    throw validation_error("closed_form_covariance: C0 not positive definite");
  const Eigen::Index n = C0.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd M = llt0.solve(I) + 2.0 * t * Q;
  M = ((M + M.transpose()) / 2.0).eval();
  Eigen::LLT<Eigen::MatrixXd> lltM(M);
  if (lltM.info() != Eigen::Success)
    throw numerical_error("closed_form_covariance: factorization failure");
  Eigen::MatrixXd C = lltM.solve(I);
  return ((C + C.transpose()) / 2.0).eval();
}

AsymptoticReport classify_asymptotics(const QuadBilinearLandscape& L) {
  const Eigen::MatrixXd M = L.B() - 2.0 * L.Q();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw numerical_error("classify_asymptotics: eigenvalue solver failure");
  AsymptoticReport report;
  report.eigenvalues = solver.eigenvalues();
  report.converges_to_delta_at_zero =
      (report.eigenvalues.real().array() < 0.0).all();
  return report;
}

FittedRate fit_convergence_rate(const std::vector<double>& times,
                                const std::vector<double>& values) {
  if (times.size() != values.size())
    throw validation_error("fit_convergence_rate: times/values length mismatch");
  if (times.size() < 20)
    throw validation_error("fit_convergence_rate: need at least 20 samples");
  for (double v : values)
    if (!(v > 1e-14))
      throw numerical_error("fit_convergence_rate: degenerate trajectory "
                            "(value at or below 1e-14)");

  const std::size_t n = times.size();
  const std::size_t start = n / 2;  // tail half, transients excluded
  std::vector<double> t_tail, logv, logt;
  for (std::size_t i = start; i < n; ++i) {
    if (!(times[i] > 0.0))
      throw validation_error("fit_convergence_rate: nonpositive time in fit window");
    t_tail.push_back(times[i]);
    logv.push_back(std::log(values[i]));
    logt.push_back(std::log(times[i]));
  }
  const std::size_t m = t_tail.size();

  // value * t ~ const: one free parameter, ln const = mean(ln value + ln t).
  double log_const = 0.0;
  for (std::size_t i = 0; i < m; ++i) log_const += logv[i] + logt[i];
  log_const /= static_cast<double>(m);
  std::vector<double> pred_pow(m);
  for (std::size_t i = 0; i < m; ++i) pred_pow[i] = log_const - logt[i];
  const double r2_pow = r_squared(logv, pred_pow);

  // ln value ~ alpha - gamma t
  const LinearFit exp_fit = linear_least_squares(t_tail, logv);
  std::vector<double> pred_exp(m);
  for (std::size_t i = 0; i < m; ++i) pred_exp[i] = exp_fit.intercept + exp_fit.slope * t_tail[i];
  const double r2_exp = r_squared(logv, pred_exp);

  FittedRate rate;
  if (r2_exp > r2_pow) {
    rate.model = FittedRate::Model::Exponential;
    rate.rate = -exp_fit.slope;
    rate.r_squared = r2_exp;
  } else {
    rate.model = FittedRate::Model::OneOverT;
    rate.rate = std::exp(log_const);
    rate.r_squared = r2_pow;
  }
  return rate;
}

FittedRate fit_convergence_rate(const Trajectory<GaussianParams>& traj) {
  std::vector<double> traces;
  traces.reserve(traj.states.size());
  for (const GaussianParams& g : traj.states) traces.push_back(g.C().trace());
  return fit_convergence_rate(traj.times, traces);
}

}  // namespace evoflow
