#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "evoflow/flow.hpp"
#include "evoflow/gaussian.hpp"

// Independent brute-force verifiers: a 1-D grid-discretized
// continuous-trait replicator, central-difference gradients, and Monte
// Carlo expectation estimates. These stay deliberately independent of
// the closed forms they are used to check.

namespace evoflow {

/// 1-D probability density discretized on a uniform midpoint grid.
/// Weights are nonnegative and sum to one within 1e-12.
class GridDensity {
 public:
  static constexpr double kSumTolerance = 1e-12;

  GridDensity(Eigen::VectorXd nodes, Eigen::VectorXd weights);

  /// Midpoint-rule discretization of N(mean, variance) on [s_min, s_max]
  /// with K cells, renormalized to unit mass.
  static GridDensity discretized_gaussian(double s_min, double s_max, int K, double mean,
                                          double variance);

  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double cell_width() const { return cell_width_; }
  Eigen::Index size() const { return nodes_.size(); }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  double cell_width_ = 0.0;
};

struct GridMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  // False when the variance vanishes and the shape moments are undefined.
  bool higher_defined = true;
};

/// Replicator derivative on the grid for the 1-D landscape
/// f(s, y) = -q s^2 + b s y:  wdot_k = w_k (pi_k - <pi>) with
/// pi_k = -q s_k^2 + b s_k mu. Conserves total mass.
Eigen::VectorXd grid_replicator_rhs(const GridDensity& d, double q, double b);

/// Weighted mean, variance, skewness and excess kurtosis.
GridMoments grid_moments(const GridDensity& d);

/// RK4 flow of the grid replicator with hard renormalization after each
/// step. Diagnostics: the four moments plus the per-step mass drift
/// |1 - sum w| absorbed by the renormalization.
Trajectory<GridDensity> integrate(const GridDensity& d0, double q, double b,
                                  const FlowConfig& cfg);

/// Closed-form mean of the 1-D replicator flow started from N(a0, c0):
/// a(t) = a0 (1 + 2 q c0 t)^{(b - 2q)/(2q)}.
double mean_closed_form_1d(double a0, double c0, double q, double b, double t);

/// Objective on raw (a, C); perturbed covariances are entrywise and may
/// be slightly asymmetric, so no validated GaussianParams is involved.
using RawObjective =
    std::function<double(const Eigen::VectorXd& a, const Eigen::MatrixXd& C)>;

/// Central finite differences of the objective in every coordinate of a
/// and every entry of C (result symmetrized). h must be in [1e-8, 1e-3].
ManifoldTangent finite_diff_grad(const RawObjective& objective, const GaussianParams& g,
                                 double h);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Sample mean of f(s, y) over m independent pairs s, y ~ N(a, C), with
/// standard error. Deterministic per seed; m >= 100.
McEstimate mc_expectation(const QuadBilinearLandscape& L, const GaussianParams& g, int m,
                          std::uint64_t seed);

}  // namespace evoflow
