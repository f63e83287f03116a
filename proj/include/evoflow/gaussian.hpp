#pragma once

#include <Eigen/Dense>

#include "evoflow/errors.hpp"

// The Gaussian statistical manifold N(a, C): closed-form expected
// fitness for quadratic-bilinear landscapes, vanilla and natural
// gradients, the replicator vector field on (a, C), Gaussian KL and the
// Fisher quadratic form.
//
// The Fisher metric is never materialized as a dense matrix over
// vec(a, C); its action and its inverse's action are exposed as linear
// maps on tangents (fisher_quadratic_form and natural_grad), which is
// exact and O(n^3). Covariance-direction gradients use the entrywise
// convention (d/dC of -Tr(QC) is -Q, no off-diagonal factor of two).

namespace evoflow {

/// Tangent vector on the Gaussian manifold: a mean displacement and a
/// symmetric covariance displacement.
struct ManifoldTangent {
  Eigen::VectorXd da;
  Eigen::MatrixXd dC;

  ManifoldTangent() = default;
  ManifoldTangent(Eigen::VectorXd da_, Eigen::MatrixXd dC_);

  Eigen::Index dim() const { return da.size(); }
  static ManifoldTangent zero(Eigen::Index n);

  /// Entrywise inner product da1.da2 + sum(dC1 .* dC2).
  double inner(const ManifoldTangent& other) const;
  double norm() const { return std::sqrt(inner(*this)); }

  ManifoldTangent operator+(const ManifoldTangent& o) const;
  ManifoldTangent operator*(double s) const;
};

/// Point on the Gaussian manifold: mean vector and SPD covariance.
/// The covariance is symmetrized on construction ((C + C^T)/2, provided
/// the asymmetry is below 1e-10) and must admit a Cholesky
/// factorization; failure is an error, never a silent repair.
class GaussianParams {
 public:
  static constexpr double kSymTolerance = 1e-10;

  GaussianParams(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  const Eigen::VectorXd& a() const { return a_; }
  const Eigen::MatrixXd& C() const { return C_; }
  Eigen::Index dim() const { return a_.size(); }

  /// Cached Cholesky factor of C (lower triangular).
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

 private:
  Eigen::VectorXd a_;
  Eigen::MatrixXd C_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Fitness landscape f(s, y) = -s.Qs + s.By with Q symmetric positive
/// definite and B arbitrary square of the same dimension.
class QuadBilinearLandscape {
 public:
  QuadBilinearLandscape(Eigen::MatrixXd Q, Eigen::MatrixXd B);

  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& B() const { return B_; }
  Eigen::Index dim() const { return Q_.rows(); }

  /// Pointwise fitness of trait s against opponent draw y.
  double fitness(const Eigen::VectorXd& s, const Eigen::VectorXd& y) const;

 private:
  Eigen::MatrixXd Q_;
  Eigen::MatrixXd B_;
};

/// Expected fitness J(a, C) = -a.Qa - Tr(QC) + a.Ba for s, y i.i.d. N(a, C).
double expected_fitness(const GaussianParams& g, const QuadBilinearLandscape& L);

/// Expected fitness of a focal strategy N(a, C) against a population
/// with mean `population_mean`: -a.Qa - Tr(QC) + a.B a_pop. At
/// focal == population this equals expected_fitness; its gradient in
/// the focal arguments is vanilla_grad. Raw-matrix signature so
/// finite-difference probes can perturb single entries of C.
double expected_fitness_vs(const Eigen::VectorXd& a, const Eigen::MatrixXd& C,
                           const Eigen::VectorXd& population_mean,
                           const QuadBilinearLandscape& L);

/// Conventional gradient of J in the focal arguments, with the
/// population held at the evaluation point: da = -2Qa + Ba, dC = -Q
/// (entrywise).
ManifoldTangent vanilla_grad(const GaussianParams& g, const QuadBilinearLandscape& L);

/// Image of a tangent under the inverse Fisher map: (C da, 2 C dC C).
ManifoldTangent natural_grad(const GaussianParams& g, const ManifoldTangent& t);

/// Replicator vector field on the Gaussian manifold, computed directly:
/// da/dt = C(B - 2Q)a, dC/dt = -2CQC. Identical (to roundoff) with
/// natural_grad(g, vanilla_grad(g, L)); the two routes are kept separate
/// so they can be checked against each other.
ManifoldTangent replicator_rhs_gaussian(const GaussianParams& g,
                                        const QuadBilinearLandscape& L);

/// KL divergence KL(g1 || g0), standard closed form:
/// 1/2 [Tr(C0^-1 C1) - n + (a0-a1).C0^-1(a0-a1) + ln(det C0/det C1)].
double kl_gaussian(const GaussianParams& g1, const GaussianParams& g0);

/// Second-order KL expansion 1/2 dtheta.F dtheta =
/// 1/2 da.C^-1 da + 1/4 Tr((C^-1 dC)^2). Nonnegative.
double fisher_quadratic_form(const GaussianParams& g, const ManifoldTangent& t);

}  // namespace evoflow
