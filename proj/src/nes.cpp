#include "evoflow/nes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "evoflow/kernels.hpp"
#include "evoflow/rng.hpp"

namespace evoflow {
namespace {

// Stream salt separating opponent draws from primary draws.
constexpr std::uint64_t kOpponentStream = 0x9d5c'0f2a'6b31'77e4ULL;

std::span<double> col(Eigen::MatrixXd& M, Eigen::Index j) {
  return {M.col(j).data(), static_cast<std::size_t>(M.rows())};
}
std::span<const double> col(const Eigen::MatrixXd& M, Eigen::Index j) {
  return {M.col(j).data(), static_cast<std::size_t>(M.rows())};
}
std::span<const double> vec(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Standard-normal batch, one counter stream per sample.
Eigen::MatrixXd standard_normal_batch(int m, Eigen::Index n, std::uint64_t seed) {
  Eigen::MatrixXd Z(m, n);
  for (int i = 0; i < m; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    for (Eigen::Index j = 0; j < n; ++j) Z(i, j) = rng.next_normal();
  }
  return Z;
}

/// X = a + Z L^T, accumulated per coordinate through the kernel layer.
Eigen::MatrixXd affine_from_normals(const GaussianParams& g, const Eigen::MatrixXd& Z) {
  const Eigen::Index n = g.dim();
  const Eigen::MatrixXd L = g.llt().matrixL();
  Eigen::MatrixXd X(Z.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    X.col(j).setConstant(g.a()[j]);
    for (Eigen::Index k = 0; k <= j; ++k)
      kernels::axpy(L(j, k), col(Z, k), col(X, j));
  }
  return X;
}

/// Per-sample fitness. Mean-field: f_i = -x_i.Q x_i + x_i.(B a), the
/// conditional expectation over the opponent draw. Paired: the opponent
/// is an independent draw y_i from the same distribution.
Eigen::VectorXd batch_fitness(const Eigen::MatrixXd& X, const GaussianParams& g,
                              const QuadBilinearLandscape& L, std::uint64_t seed,
                              OpponentModel opponent) {
  const Eigen::Index n = X.cols();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(X.rows());
  std::span<double> fs{f.data(), static_cast<std::size_t>(f.size())};
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      kernels::add_scaled_product(fs, -L.Q()(j, k), col(X, j), col(X, k));
  if (opponent == OpponentModel::Mean) {
    const Eigen::VectorXd v = L.B() * g.a();
    for (Eigen::Index j = 0; j < n; ++j) kernels::axpy(v[j], col(X, j), fs);
  } else {
    const Eigen::MatrixXd Y = affine_from_normals(
        g, standard_normal_batch(static_cast<int>(X.rows()), n,
                                 CounterRng::derive(seed, kOpponentStream)));
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        kernels::add_scaled_product(fs, L.B()(j, k), col(X, j), col(Y, k));
  }
  return f;
}

}  // namespace

void ShapingSpec::validate() const {
  if (!(truncation > 0.0) || truncation > 1.0)
    throw validation_error("ShapingSpec: truncation must be in (0, 1]");
}

Eigen::MatrixXd sample_gaussian(const GaussianParams& g, int m, std::uint64_t seed) {
  if (m < 2) throw validation_error("sample_gaussian: need m >= 2");
  return affine_from_normals(g, standard_normal_batch(m, g.dim(), seed));
}

ManifoldTangent log_likelihood_grad(const Eigen::VectorXd& x, const GaussianParams& g) {
  if (x.size() != g.dim())
    throw validation_error("log_likelihood_grad: dimension mismatch");
  const Eigen::VectorXd r = g.llt().solve(x - g.a());
  const Eigen::MatrixXd Cinv =
      g.llt().solve(Eigen::MatrixXd::Identity(g.dim(), g.dim()));
  Eigen::MatrixXd dC = 0.5 * (r * r.transpose() - Cinv);
  dC = ((dC + dC.transpose()) / 2.0).eval();
  return ManifoldTangent(r, std::move(dC));
}

Eigen::VectorXd rank_utilities(const Eigen::VectorXd& fitness, const ShapingSpec& spec) {
  spec.validate();
  const Eigen::Index m = fitness.size();
  if (m < 2) throw validation_error("rank_utilities: need m >= 2");
  if (spec.kind == ShapingSpec::Kind::None) return fitness;

  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return fitness[a] > fitness[b];
  });

  const double k_top = std::ceil(spec.truncation * static_cast<double>(m));
  Eigen::VectorXd raw(m);
  for (Eigen::Index r = 0; r < m; ++r)
    raw[r] = std::max(0.0, std::log(k_top + 1.0) - std::log(static_cast<double>(r + 1)));
  raw /= raw.sum();

  Eigen::VectorXd utilities(m);
  const double center = 1.0 / static_cast<double>(m);
  for (Eigen::Index r = 0; r < m; ++r) utilities[order[r]] = raw[r] - center;
  return utilities;
}

SampleBatch make_batch(const GaussianParams& g, const QuadBilinearLandscape& L, int m,
                       std::uint64_t seed, const ShapingSpec& shaping,
                       OpponentModel opponent) {
  if (g.dim() != L.dim()) throw validation_error("make_batch: dimension mismatch");
  if (m < 2) throw validation_error("make_batch: need m >= 2");
  shaping.validate();
  SampleBatch batch;
  batch.seed = seed;
  batch.points = sample_gaussian(g, m, seed);
  batch.fitness = batch_fitness(batch.points, g, L, seed, opponent);
  batch.utilities = rank_utilities(batch.fitness, shaping);
  return batch;
}

ManifoldTangent search_gradient_from_batch(const GaussianParams& g,
                                           const SampleBatch& batch) {
  const Eigen::Index n = g.dim();
  const Eigen::Index m = batch.points.rows();
  if (m < 2) throw validation_error("search_gradient_from_batch: need m >= 2");
  if (batch.points.cols() != n || batch.utilities.size() != m)
    throw validation_error("search_gradient_from_batch: batch shape mismatch");
  const double md = static_cast<double>(m);

  // Score vectors w_i = C^-1 (x_i - a) = L^-T z_i, assembled per
  // coordinate from the centered sample columns.
  const Eigen::MatrixXd Lfac = g.llt().matrixL();
  const Eigen::MatrixXd Linv =
      Lfac.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd Xc = batch.points;
  Xc.rowwise() -= g.a().transpose();
  // z_i = L^-1 (x_i - a)
  Eigen::MatrixXd Z(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Z.col(j).setZero();
    for (Eigen::Index k = 0; k <= j; ++k)
      kernels::axpy(Linv(j, k), col(Xc, k), col(Z, j));
  }
  Eigen::MatrixXd W(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    W.col(j).setZero();
    for (Eigen::Index k = j; k < n; ++k)  // (L^-T)_{jk} = Linv(k, j)
      kernels::axpy(Linv(k, j), col(Z, k), col(W, j));
  }

  const Eigen::VectorXd& u = batch.utilities;
  Eigen::VectorXd da(n);
  for (Eigen::Index j = 0; j < n; ++j) da[j] = kernels::dot(vec(u), col(W, j)) / md;

  const Eigen::MatrixXd Cinv = g.llt().solve(Eigen::MatrixXd::Identity(n, n));
  const double u_mean = kernels::sum(vec(u)) / md;
  Eigen::MatrixXd dC(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j; k < n; ++k) {
      const double cross = kernels::dot3(vec(u), col(W, j), col(W, k)) / md;
      const double value = 0.5 * (cross - u_mean * Cinv(j, k));
      dC(j, k) = value;
      dC(k, j) = value;
    }
  return ManifoldTangent(std::move(da), std::move(dC));
}

ManifoldTangent estimate_search_gradient(const GaussianParams& g,
                                         const QuadBilinearLandscape& L, int m,
                                         std::uint64_t seed, const ShapingSpec& shaping,
                                         OpponentModel opponent) {
  return search_gradient_from_batch(g, make_batch(g, L, m, seed, shaping, opponent));
}

double sigma_f(const GaussianParams& g, const QuadBilinearLandscape& L) {
  if (g.dim() != L.dim()) throw validation_error("sigma_f: dimension mismatch");
  const Eigen::VectorXd v = (L.B() - 2.0 * L.Q()) * g.a();
  const double mean_term = v.dot(g.C() * v);
  const Eigen::MatrixXd QC = L.Q() * g.C();
  const double trace_term = QC.cwiseProduct(QC.transpose()).sum();  // Tr[(QC)^2]
  const double radicand = mean_term + trace_term;
  if (!(radicand > 0.0))
    throw numerical_error("sigma_f: nonpositive radicand (degenerate covariance?)");
  return std::sqrt(radicand);
}

ManifoldTangent sigma_normalized_rhs(const GaussianParams& g,
                                     const QuadBilinearLandscape& L) {
  const double sigma = sigma_f(g, L);
  return replicator_rhs_gaussian(g, L) * (1.0 / sigma);
}

Trajectory<GaussianParams> natural_gradient_ascent(const GaussianParams& g0,
                                                   const QuadBilinearLandscape& L,
                                                   double step, int iters,
                                                   const AscentMode& mode) {
  if (g0.dim() != L.dim())
    throw validation_error("natural_gradient_ascent: dimension mismatch");
  if (!(step > 0.0)) throw validation_error("natural_gradient_ascent: step must be > 0");
  if (iters < 0) throw validation_error("natural_gradient_ascent: iters must be >= 0");
  if (mode.kind == AscentMode::Kind::Sampled && mode.m < 2)
    throw validation_error("natural_gradient_ascent: sampled mode needs m >= 2");

  Trajectory<GaussianParams> traj;
  traj.diagnostic_names = {"J", "traceC"};
  traj.diagnostics.resize(2);
  auto record = [&](double t, const GaussianParams& g) {
    traj.times.push_back(t);
    traj.states.push_back(g);
    traj.diagnostics[0].push_back(expected_fitness(g, L));
    traj.diagnostics[1].push_back(g.C().trace());
  };

  GaussianParams g = g0;
  record(0.0, g);
  for (int k = 0; k < iters; ++k) {
    const ManifoldTangent grad =
        mode.kind == AscentMode::Kind::Analytic
            ? vanilla_grad(g, L)
            : estimate_search_gradient(g, L, mode.m,
                                       CounterRng::derive(mode.seed, k), mode.shaping,
                                       mode.opponent);
    const ManifoldTangent nat = natural_grad(g, grad);
    Eigen::VectorXd a = g.a() + step * nat.da;
    Eigen::MatrixXd C = g.C() + step * nat.dC;
    C = ((C + C.transpose()) / 2.0).eval();
    try {
      g = GaussianParams(std::move(a), std::move(C));
    } catch (const validation_error& e) {
      throw numerical_error(
          std::string("natural_gradient_ascent: SPD violation at iteration ") +
          std::to_string(k + 1) + " (consider a smaller step): " + e.what());
    }
    record(static_cast<double>(k + 1) * step, g);
  }
  return traj;
}

}  // namespace evoflow
