#include "evoflow/gaussian.hpp"

#include <cmath>

namespace evoflow {
namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b)
    throw validation_error(std::string(what) + ": dimension mismatch (" +
                           std::to_string(a) + " vs " + std::to_string(b) + ")");
}

void require_symmetric(const Eigen::MatrixXd& M, double tol, const char* what) {
  if (M.rows() != M.cols())
    throw validation_error(std::string(what) + ": matrix must be square");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol)
    throw validation_error(std::string(what) + ": matrix not symmetric within tolerance");
}

}  // namespace

ManifoldTangent::ManifoldTangent(Eigen::VectorXd da_, Eigen::MatrixXd dC_)
    : da(std::move(da_)), dC(std::move(dC_)) {
  require_symmetric(dC, GaussianParams::kSymTolerance, "ManifoldTangent");
  require_same_dim(da.size(), dC.rows(), "ManifoldTangent");
}

ManifoldTangent ManifoldTangent::zero(Eigen::Index n) {
  return ManifoldTangent(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n));
}

double ManifoldTangent::inner(const ManifoldTangent& other) const {
  require_same_dim(dim(), other.dim(), "ManifoldTangent::inner");
  return da.dot(other.da) + dC.cwiseProduct(other.dC).sum();
}

ManifoldTangent ManifoldTangent::operator+(const ManifoldTangent& o) const {
  return ManifoldTangent(da + o.da, dC + o.dC);
}

ManifoldTangent ManifoldTangent::operator*(double s) const {
  return ManifoldTangent(da * s, dC * s);
}

GaussianParams::GaussianParams(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : a_(std::move(mean)), C_(std::move(covariance)) {
  if (a_.size() < 1) throw validation_error("GaussianParams: empty mean");
  require_same_dim(a_.size(), C_.rows(), "GaussianParams");
  if (!a_.allFinite() || !C_.allFinite())
    throw validation_error("GaussianParams: non-finite entry");
  require_symmetric(C_, kSymTolerance, "GaussianParams");
  C_ = ((C_ + C_.transpose()) / 2.0).eval();
  llt_.compute(C_);
  if (llt_.info() != Eigen::Success)
    throw validation_error("GaussianParams: covariance not positive definite");
}

QuadBilinearLandscape::QuadBilinearLandscape(Eigen::MatrixXd Q, Eigen::MatrixXd B)
    : Q_(std::move(Q)), B_(std::move(B)) {
  require_symmetric(Q_, GaussianParams::kSymTolerance, "QuadBilinearLandscape Q");
  Q_ = ((Q_ + Q_.transpose()) / 2.0).eval();
  if (B_.rows() != B_.cols())
    throw validation_error("QuadBilinearLandscape B: matrix must be square");
  require_same_dim(Q_.rows(), B_.rows(), "QuadBilinearLandscape");
  if (!Q_.allFinite() || !B_.allFinite())
    throw validation_error("QuadBilinearLandscape: non-finite entry");
  Eigen::LLT<Eigen::MatrixXd> llt(Q_);
  if (llt.info() != Eigen::Success)
    throw validation_error("QuadBilinearLandscape: Q not positive definite");
}

double QuadBilinearLandscape::fitness(const Eigen::VectorXd& s,
                                      const Eigen::VectorXd& y) const {
  require_same_dim(s.size(), dim(), "QuadBilinearLandscape::fitness");
  require_same_dim(y.size(), dim(), "QuadBilinearLandscape::fitness");
  return -s.dot(Q_ * s) + s.dot(B_ * y);
}

double expected_fitness(const GaussianParams& g, const QuadBilinearLandscape& L) {
  require_same_dim(g.dim(), L.dim(), "expected_fitness");
  const double quad = g.a().dot(L.Q() * g.a());
  const double trace = L.Q().cwiseProduct(g.C()).sum();  // Tr(QC), both symmetric
  const double bilin = g.a().dot(L.B() * g.a());
  return -quad - trace + bilin;
}

double expected_fitness_vs(const Eigen::VectorXd& a, const Eigen::MatrixXd& C,
                           const Eigen::VectorXd& population_mean,
                           const QuadBilinearLandscape& L) {
  require_same_dim(a.size(), L.dim(), "expected_fitness_vs");
  require_same_dim(population_mean.size(), L.dim(), "expected_fitness_vs");
  if (C.rows() != L.dim() || C.cols() != L.dim())
    throw validation_error("expected_fitness_vs: dimension mismatch");
  return -a.dot(L.Q() * a) - (L.Q() * C).trace() + a.dot(L.B() * population_mean);
}

ManifoldTangent vanilla_grad(const GaussianParams& g, const QuadBilinearLandscape& L) {
  require_same_dim(g.dim(), L.dim(), "vanilla_grad");
  Eigen::VectorXd da = -2.0 * (L.Q() * g.a()) + L.B() * g.a();
  return ManifoldTangent(std::move(da), -L.Q());
}

ManifoldTangent natural_grad(const GaussianParams& g, const ManifoldTangent& t) {
  require_same_dim(g.dim(), t.dim(), "natural_grad");
  Eigen::VectorXd da = g.C() * t.da;
  Eigen::MatrixXd dC = 2.0 * (g.C() * t.dC * g.C());
  dC = ((dC + dC.transpose()) / 2.0).eval();
  return ManifoldTangent(std::move(da), std::move(dC));
}

ManifoldTangent replicator_rhs_gaussian(const GaussianParams& g,
                                        const QuadBilinearLandscape& L) {
  require_same_dim(g.dim(), L.dim(), "replicator_rhs_gaussian");
  Eigen::VectorXd da = g.C() * ((L.B() - 2.0 * L.Q()) * g.a());
  Eigen::MatrixXd dC = -2.0 * (g.C() * L.Q() * g.C());
  dC = ((dC + dC.transpose()) / 2.0).eval();
  return ManifoldTangent(std::move(da), std::move(dC));
}

double kl_gaussian(const GaussianParams& g1, const GaussianParams& g0) {
  require_same_dim(g1.dim(), g0.dim(), "kl_gaussian");
  const Eigen::Index n = g1.dim();
  const Eigen::MatrixXd ratio = g0.llt().solve(g1.C());  // C0^-1 C1
  const Eigen::VectorXd diff = g0.a() - g1.a();
  const double mahal = diff.dot(g0.llt().solve(diff));
  const double logdet0 =
      2.0 * g0.llt().matrixLLT().diagonal().array().log().sum();
  const double logdet1 =
      2.0 * g1.llt().matrixLLT().diagonal().array().log().sum();
  return 0.5 * (ratio.trace() - static_cast<double>(n) + mahal + logdet0 - logdet1);
}

double fisher_quadratic_form(const GaussianParams& g, const ManifoldTangent& t) {
  require_same_dim(g.dim(), t.dim(), "fisher_quadratic_form");
  const double mean_term = 0.5 * t.da.dot(g.llt().solve(t.da));
  const Eigen::MatrixXd X = g.llt().solve(t.dC);  // C^-1 dC
  // Tr(X^2) = sum_ij X_ij X_ji
  const double cov_term = 0.25 * X.cwiseProduct(X.transpose()).sum();
  return mean_term + cov_term;
}

}  // namespace evoflow
