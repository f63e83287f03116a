#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evoflow/errors.hpp"
#include "evoflow/gaussian.hpp"
#include "evoflow/simplex.hpp"

// Fixed-step RK4 integration of the simplex and Gaussian vector fields,
// closed-form covariance solution, spectrum-based asymptotic
// classification and convergence-rate fitting. RK4 is the single
// integrator on purpose: deterministic and order four, so identical
// configs reproduce identical trajectories bit for bit.

namespace evoflow {

struct FlowConfig {
  double dt = 1e-3;            // step size
  double t_end = 1.0;          // horizon
  int record_every = 1;        // sampling stride in steps
  double boundary_eps = 1e-9;  // simplex interior guard

  void validate() const;
  /// Number of RK4 steps to cover [0, t_end].
  long steps() const;
};

/// Time-indexed sequence of states with named per-sample diagnostics.
template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<std::string> diagnostic_names;
  std::vector<std::vector<double>> diagnostics;  // diagnostics[d][sample]

  std::size_t size() const { return times.size(); }
  const std::vector<double>& diagnostic(const std::string& name) const {
    for (std::size_t d = 0; d < diagnostic_names.size(); ++d)
      if (diagnostic_names[d] == name) return diagnostics[d];
    throw validation_error("Trajectory: unknown diagnostic '" + name + "'");
  }
  bool has_diagnostic(const std::string& name) const {
    for (const std::string& d : diagnostic_names)
      if (d == name) return true;
    return false;
  }
};

/// Least-squares convergence-rate fit over the tail half of a series.
struct FittedRate {
  enum class Model { OneOverT, Exponential };
  Model model = Model::OneOverT;
  // Exponential: decay rate gamma in trace ~ e^{-gamma t}.
  // OneOverT: the constant in trace ~ const / t.
  double rate = 0.0;
  double r_squared = 0.0;

  std::string model_name() const {
    return model == Model::OneOverT ? "one-over-t" : "exponential";
  }
};

/// Spectrum of B - 2Q and what it implies for the flow's limit.
struct AsymptoticReport {
  Eigen::VectorXcd eigenvalues;
  bool converges_to_delta_at_zero = false;  // all real parts negative
  std::optional<FittedRate> fitted_rate;
};

using SimplexField =
    std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& p)>;
using GaussianField = std::function<ManifoldTangent(double t, const GaussianParams& g)>;

template <class State>
using DiagnosticFn = std::function<double(double t, const State& state)>;
template <class State>
using DiagnosticSet = std::vector<std::pair<std::string, DiagnosticFn<State>>>;

/// RK4 flow on the simplex interior. Tangency is preserved by the field;
/// the integrator checks finiteness, sum drift and the interior guard at
/// every accepted step and raises a boundary event instead of clamping.
Trajectory<Eigen::VectorXd> integrate(const SimplexField& rhs, const SimplexPoint& p0,
                                      const FlowConfig& cfg,
                                      const DiagnosticSet<Eigen::VectorXd>& diag = {});

/// RK4 flow on the Gaussian manifold. Covariances are re-symmetrized
/// after every step; loss of positive definiteness is an error
/// (suggesting a smaller dt), never a projection.
Trajectory<GaussianParams> integrate(const GaussianField& rhs, const GaussianParams& g0,
                                     const FlowConfig& cfg,
                                     const DiagnosticSet<GaussianParams>& diag = {});

/// Exact covariance solution C(t) = (C0^-1 + 2tQ)^-1 of the replicator
/// flow; SPD for all t >= 0.
Eigen::MatrixXd closed_form_covariance(const Eigen::MatrixXd& C0, const Eigen::MatrixXd& Q,
                                       double t);

/// Spectrum of B - 2Q; the flow contracts to the delta distribution at
/// zero iff every eigenvalue has negative real part.
AsymptoticReport classify_asymptotics(const QuadBilinearLandscape& L);

/// Fits both decay models to a positive series on the tail half of the
/// samples (transients excluded) and returns the better-fitting one:
///   one-over-t:  value * t ~ const   (compared via log-log linearity)
///   exponential: ln value ~ alpha - gamma t
/// Requires >= 20 samples with positive values.
FittedRate fit_convergence_rate(const std::vector<double>& times,
                                const std::vector<double>& values);

/// Convenience overload on a Gaussian trajectory's traceC diagnostic.
FittedRate fit_convergence_rate(const Trajectory<GaussianParams>& traj);

}  // namespace evoflow
