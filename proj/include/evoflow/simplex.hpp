#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "evoflow/errors.hpp"

// Evolutionary games on the interior of the probability simplex:
// replicator vector field, Shahshahani geometry, categorical KL
// divergence and the cross-entropy Lyapunov diagnostic.

namespace evoflow {

/// Interior point of the unit simplex. Components must be strictly
/// positive (>= 1e-12) and sum to one within 1e-12; anything else is
/// rejected, because the Shahshahani metric blows up on the boundary.
class SimplexPoint {
 public:
  static constexpr double kMinComponent = 1e-12;
  static constexpr double kSumTolerance = 1e-12;

  explicit SimplexPoint(Eigen::VectorXd p);

  /// Uniform distribution over n strategies.
  static SimplexPoint uniform(Eigen::Index n);

  const Eigen::VectorXd& p() const { return p_; }
  Eigen::Index dim() const { return p_.size(); }

 private:
  Eigen::VectorXd p_;
};

/// Fitness landscape over a finite strategy set: either a payoff matrix
/// (linear case f(p) = A p) or an arbitrary callable p -> f(p).
class FiniteLandscape {
 public:
  using FitnessFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  static FiniteLandscape from_matrix(Eigen::MatrixXd payoff);
  static FiniteLandscape from_function(Eigen::Index dim, FitnessFn fn);

  Eigen::VectorXd fitness(const Eigen::VectorXd& p) const;
  Eigen::Index dim() const { return dim_; }
  bool is_linear() const { return has_matrix_; }
  const Eigen::MatrixXd& payoff_matrix() const;

 private:
  FiniteLandscape() = default;
  Eigen::Index dim_ = 0;
  bool has_matrix_ = false;
  Eigen::MatrixXd payoff_;
  FitnessFn fn_;
};

/// Population mean fitness <f(p)> = sum_i p_i f_i(p).
double mean_fitness(const SimplexPoint& p, const FiniteLandscape& f);

/// Replicator vector field v_i = p_i (f_i(p) - <f(p)>). Tangent to the
/// simplex: components sum to zero.
Eigen::VectorXd replicator_rhs(const SimplexPoint& p, const FiniteLandscape& f);

/// Same field on a raw vector, for integrator stages that sit a
/// round-off away from the validated state. No interiority check.
Eigen::VectorXd replicator_field(const Eigen::VectorXd& p, const FiniteLandscape& f);

/// Gradient of a potential V in the Shahshahani metric, restricted to
/// the simplex tangent space: w_i = p_i (g_i - sum_j p_j g_j) where g is
/// the Euclidean partial-derivative vector of V. For symmetric payoff
/// matrices with g = A p this coincides with the replicator field.
Eigen::VectorXd shahshahani_gradient(const SimplexPoint& p, const Eigen::VectorXd& grad_V);

/// KL divergence sum_i p_i ln(p_i / q_i), standard argument order.
double kl_categorical(const SimplexPoint& p, const SimplexPoint& q);

/// Diagonal of the categorical Fisher information matrix: 1/p_i.
Eigen::VectorXd fisher_categorical(const SimplexPoint& p);

/// Lyapunov diagnostic for convergence to `target`: the cross-entropy
/// function V(t) = kl(target, p(t)) evaluated at each trajectory sample.
/// States must be interior simplex points.
std::vector<double> lyapunov_series(const SimplexPoint& target,
                                    const std::vector<double>& times,
                                    const std::vector<Eigen::VectorXd>& states);

/// Falsification-style ESS probe: samples a deterministic mesh of
/// perturbations at the given radius around p_hat and checks the
/// stability condition p_hat . f(p) > p . f(p) at each mesh point. A
/// `true` result means no mesh point violated the condition, not a
/// proof.
bool is_ess_candidate(const SimplexPoint& p_hat, const FiniteLandscape& f,
                      double radius = 1e-3);

}  // namespace evoflow
