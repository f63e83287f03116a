#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "evoflow/flow.hpp"
#include "evoflow/gaussian.hpp"

// Natural Evolution Strategies on the Gaussian manifold: Monte Carlo
// search-gradient estimation via the log-likelihood trick, rank-based
// fitness shaping, discrete natural-gradient ascent, and the
// sigma-normalized accelerated replicator field.
//
// All sampling is counter-based: sample i of a batch depends only on
// (seed, i), so a given seed yields an identical batch regardless of
// evaluation order, and a batch of 4m extends the batch of m.

namespace evoflow {

struct ShapingSpec {
  enum class Kind { None, Rank };
  Kind kind = Kind::None;
  // Fraction of top-ranked samples receiving positive utility.
  double truncation = 0.5;

  void validate() const;
};

/// How the opponent draw y in f(s, y) is handled when scoring a sample:
/// Mean replaces y by its conditional expectation (exact, lower
/// variance); Paired draws an independent opponent per sample.
enum class OpponentModel { Mean, Paired };

/// One Monte Carlo batch: sample points (row i = sample i), their
/// fitness, and the utilities actually fed to the gradient estimate
/// (equal to fitness under ShapingSpec::Kind::None; centered rank
/// utilities otherwise, summing to zero).
struct SampleBatch {
  Eigen::MatrixXd points;     // m x n
  Eigen::VectorXd fitness;    // m
  Eigen::VectorXd utilities;  // m
  std::uint64_t seed = 0;
};

/// m i.i.d. draws from N(a, C) via the Cholesky factor of C.
/// Deterministic in (seed, i). Requires m >= 2.
Eigen::MatrixXd sample_gaussian(const GaussianParams& g, int m, std::uint64_t seed);

/// Score function of the Gaussian:
/// grad_a log p = C^-1 (x - a),
/// grad_C log p = 1/2 (C^-1 (x-a)(x-a)^T C^-1 - C^-1)  (entrywise).
ManifoldTangent log_likelihood_grad(const Eigen::VectorXd& x, const GaussianParams& g);

/// Truncated-logarithmic rank utilities: samples sorted by fitness
/// descending (ties broken by sample index), raw weight at 1-based rank
/// r is max(0, ln(ceil(truncation m) + 1) - ln r), normalized to sum one
/// and centered by subtracting 1/m. Invariant under strictly increasing
/// transforms of the fitness. Kind::None returns the fitness unchanged.
Eigen::VectorXd rank_utilities(const Eigen::VectorXd& fitness, const ShapingSpec& spec);

/// Draws a batch, evaluates per-sample fitness against the population
/// (per OpponentModel) and applies the shaping.
SampleBatch make_batch(const GaussianParams& g, const QuadBilinearLandscape& L, int m,
                       std::uint64_t seed, const ShapingSpec& shaping = {},
                       OpponentModel opponent = OpponentModel::Mean);

/// The reduction behind the estimate: (1/m) sum_i u_i grad log p(x_i)
/// for an already-drawn batch, using batch.utilities as the weights u.
ManifoldTangent search_gradient_from_batch(const GaussianParams& g,
                                           const SampleBatch& batch);

/// Monte Carlo search gradient (1/m) sum_i u_i grad log p(x_i):
/// with Kind::None this estimates the vanilla gradient of the expected
/// fitness; with Kind::Rank the fitness is replaced by rank utilities.
ManifoldTangent estimate_search_gradient(const GaussianParams& g,
                                         const QuadBilinearLandscape& L, int m,
                                         std::uint64_t seed,
                                         const ShapingSpec& shaping = {},
                                         OpponentModel opponent = OpponentModel::Mean);

/// Fitness-shaping normalizer
/// sigma_f = sqrt(a.(B^T-2Q) C (B-2Q) a + Tr[(QC)^2]);
/// strictly positive for SPD C.
double sigma_f(const GaussianParams& g, const QuadBilinearLandscape& L);

/// The replicator field divided by sigma_f: same direction, rescaled so
/// the covariance contracts exponentially instead of like 1/t.
ManifoldTangent sigma_normalized_rhs(const GaussianParams& g,
                                     const QuadBilinearLandscape& L);

struct AscentMode {
  enum class Kind { Analytic, Sampled };
  Kind kind = Kind::Analytic;
  // Sampled-mode parameters. A fresh sub-seed is derived per iteration.
  int m = 0;
  std::uint64_t seed = 0;
  ShapingSpec shaping{};
  OpponentModel opponent = OpponentModel::Mean;
};

/// Discrete natural-gradient ascent g <- g + step * F^-1 grad J, with
/// the gradient taken in closed form (Analytic) or estimated from
/// samples (Sampled). Records every iterate with J and traceC
/// diagnostics; errors out if an update leaves the SPD cone.
Trajectory<GaussianParams> natural_gradient_ascent(const GaussianParams& g0,
                                                   const QuadBilinearLandscape& L,
                                                   double step, int iters,
                                                   const AscentMode& mode = {});

}  // namespace evoflow
