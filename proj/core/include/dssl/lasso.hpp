#pragma once

#include "dssl/gram_store.hpp"
#include "dssl/types.hpp"

#include <optional>

namespace dssl {

struct SolverConfig {
  /// Convergence threshold on the largest coefficient change in a full sweep,
  /// relative to max(1, largest |coefficient|).
  double tol = 1e-6;
  /// Cap on coordinate-descent sweeps per regression.
  int max_iter = 1000;
  /// Sweeps between full passes over all coordinates once the active set has formed.
  int full_sweep_period = 10;

  void validate() const;
};

/// Self-expressive regression of channel `response` on all other channels.
struct SparseCoefVector {
  Eigen::Index response = 0;
  Vector coefs;  // length p, coefs[response] == 0
  bool converged = true;
  int iterations = 0;

  std::vector<Eigen::Index> support(double eps = 0.0) const;
  double l1_norm() const { return coefs.lpNorm<1>(); }
};

/// Row i holds the coefficients regressing channel i on the others; zero diagonal.
struct CoefficientMatrix {
  Matrix coefs;
  TimeIndex start = 0;
  TimeIndex end = 0;

  Eigen::Index dim() const { return coefs.rows(); }
  std::size_t nonzeros(double eps = 1e-10) const;
};

/// 1/2 ||y_i - sum_j b_j y_j||^2 + lambda1 ||b||_1 over the segment, from Gram entries only.
double lasso_objective(const SegmentGram& seg, const SparseCoefVector& beta, double lambda1);

/// Residual sum of squares of one regression, from Gram entries only.
double lasso_rss(const SegmentGram& seg, const SparseCoefVector& beta);

/// Cyclic coordinate descent with soft thresholding on the segment Gram.
///
/// After two full sweeps the solver cycles over the active set, returning to a full
/// sweep every cfg.full_sweep_period iterations and whenever the active set settles.
/// A solve is reported converged only once a full sweep moves no coefficient by more
/// than tol (relative) and the KKT residual is at most 10 * tol * (1 + lambda1).
/// Hitting max_iter returns the last iterate with converged = false.
SparseCoefVector lasso_fit(const SegmentGram& seg, Eigen::Index response, double lambda1,
                           const SolverConfig& cfg, const Vector* warm_start = nullptr);

/// Largest violation of the LASSO optimality conditions; zero iff beta is optimal.
double kkt_residual(const SegmentGram& seg, const SparseCoefVector& beta, double lambda1);

/// Sparsity penalty for a segment of the given length: grows linearly with length.
inline double lambda1_of_length(double lambda1_rate, std::size_t seg_len) {
  return lambda1_rate * static_cast<double>(seg_len);
}

struct SegmentCost {
  double cost = 0.0;
  CoefficientMatrix coefs;
  int nonconverged = 0;  // regressions that hit max_iter
};

/// Sum over channels of RSS_i / 2 + lambda1(len) * ||b_i||_1 with each b_i from lasso_fit.
/// `warm_start`, when given, must be p x p and seeds every regression.
SegmentCost segment_cost(const SegmentGram& seg, double lambda1_rate, const SolverConfig& cfg,
                         const CoefficientMatrix* warm_start = nullptr);

}  // namespace dssl
