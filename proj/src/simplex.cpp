#include "evoflow/simplex.hpp"

#include <cmath>

namespace evoflow {
namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b)
    throw validation_error(std::string(what) + ": dimension mismatch (" +
                           std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace

SimplexPoint::SimplexPoint(Eigen::VectorXd p) : p_(std::move(p)) {
  if (p_.size() < 2) throw validation_error("SimplexPoint: need at least 2 components");
  if (!p_.allFinite()) throw validation_error("SimplexPoint: non-finite component");
  if (p_.minCoeff() < kMinComponent)
    throw validation_error("SimplexPoint: boundary point (component below 1e-12)");
  if (std::abs(p_.sum() - 1.0) > kSumTolerance)
    throw validation_error("SimplexPoint: components do not sum to 1");
}

SimplexPoint SimplexPoint::uniform(Eigen::Index n) {
  return SimplexPoint(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

FiniteLandscape FiniteLandscape::from_matrix(Eigen::MatrixXd payoff) {
  if (payoff.rows() != payoff.cols())
    throw validation_error("FiniteLandscape: payoff matrix must be square");
  if (payoff.rows() < 2)
    throw validation_error("FiniteLandscape: payoff matrix must be at least 2x2");
  FiniteLandscape f;
  f.dim_ = payoff.rows();
  f.has_matrix_ = true;
  f.payoff_ = std::move(payoff);
  return f;
}

FiniteLandscape FiniteLandscape::from_function(Eigen::Index dim, FitnessFn fn) {
  if (dim < 2) throw validation_error("FiniteLandscape: dimension must be >= 2");
  if (!fn) throw validation_error("FiniteLandscape: empty fitness function");
  FiniteLandscape f;
  f.dim_ = dim;
  f.fn_ = std::move(fn);
  return f;
}

Eigen::VectorXd FiniteLandscape::fitness(const Eigen::VectorXd& p) const {
  require_same_dim(p.size(), dim_, "FiniteLandscape::fitness");
  Eigen::VectorXd f = has_matrix_ ? Eigen::VectorXd(payoff_ * p) : fn_(p);
  if (f.size() != dim_)
    throw validation_error("FiniteLandscape: fitness function returned wrong dimension");
  return f;
}

const Eigen::MatrixXd& FiniteLandscape::payoff_matrix() const {
  if (!has_matrix_) throw validation_error("FiniteLandscape: no payoff matrix");
  return payoff_;
}

double mean_fitness(const SimplexPoint& p, const FiniteLandscape& f) {
  require_same_dim(p.dim(), f.dim(), "mean_fitness");
  return p.p().dot(f.fitness(p.p()));
}

Eigen::VectorXd replicator_rhs(const SimplexPoint& p, const FiniteLandscape& f) {
  require_same_dim(p.dim(), f.dim(), "replicator_rhs");
  return replicator_field(p.p(), f);
}

Eigen::VectorXd replicator_field(const Eigen::VectorXd& p, const FiniteLandscape& f) {
  require_same_dim(p.size(), f.dim(), "replicator_field");
  const Eigen::VectorXd fit = f.fitness(p);
  const double mean = p.dot(fit);
  return p.cwiseProduct((fit.array() - mean).matrix());
}

Eigen::VectorXd shahshahani_gradient(const SimplexPoint& p, const Eigen::VectorXd& grad_V) {
  require_same_dim(p.dim(), grad_V.size(), "shahshahani_gradient");
  const double weighted = p.p().dot(grad_V);
  return p.p().cwiseProduct((grad_V.array() - weighted).matrix());
}

double kl_categorical(const SimplexPoint& p, const SimplexPoint& q) {
  require_same_dim(p.dim(), q.dim(), "kl_categorical");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.dim(); ++i)
    acc += p.p()[i] * std::log(p.p()[i] / q.p()[i]);
  return acc;
}

Eigen::VectorXd fisher_categorical(const SimplexPoint& p) {
  return p.p().cwiseInverse();
}

std::vector<double> lyapunov_series(const SimplexPoint& target,
                                    const std::vector<double>& times,
                                    const std::vector<Eigen::VectorXd>& states) {
  if (times.size() != states.size())
    throw validation_error("lyapunov_series: times/states length mismatch");
  std::vector<double> series;
  series.reserve(states.size());
  for (const Eigen::VectorXd& s : states)
    series.push_back(kl_categorical(target, SimplexPoint(s)));
  return series;
}

bool is_ess_candidate(const SimplexPoint& p_hat, const FiniteLandscape& f, double radius) {
  require_same_dim(p_hat.dim(), f.dim(), "is_ess_candidate");
  if (radius <= 0.0 || radius >= 0.5)
    throw validation_error("is_ess_candidate: radius must be in (0, 0.5)");
  const Eigen::Index n = p_hat.dim();

  // Deterministic mesh of tangent directions: all pairwise +-(e_i - e_j)
  // plus a fixed low-discrepancy set spanning the tangent space.
  std::vector<Eigen::VectorXd> dirs;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      d[i] = 1.0;
      d[j] = -1.0;
      dirs.push_back(d / d.norm());
    }
  constexpr int kExtra = 64;
  for (int k = 0; k < kExtra; ++k) {
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i)
      d[i] = std::sin(0.5 + 1.7 * static_cast<double>(k + 1) * static_cast<double>(i + 1));
    d.array() -= d.mean();  // project onto the tangent space
    if (d.norm() < 1e-8) continue;
    dirs.push_back(d / d.norm());
  }

  for (const Eigen::VectorXd& d : dirs) {
    Eigen::VectorXd q = p_hat.p() + radius * d;
    if (q.minCoeff() < SimplexPoint::kMinComponent) continue;  // mesh point left the interior
    const Eigen::VectorXd fit = f.fitness(q);
    const double invader = p_hat.p().dot(fit);
    const double resident = q.dot(fit);
    if (!(invader > resident)) return false;
  }
  return true;
}

}  // namespace evoflow
