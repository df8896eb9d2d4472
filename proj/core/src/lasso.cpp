#include "dssl/lasso.hpp"

#include <algorithm>
#include <cmath>

namespace dssl {

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// c = G_{:,i} - G * beta, the residual correlation with every channel.
Vector residual_correlation(const Matrix& g, Eigen::Index i, const Vector& beta) {
  Vector c = g.col(i);
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) c.noalias() -= g.col(j) * beta[j];
  }
  return c;
}

double kkt_from_correlation(const Vector& c, const Vector& beta, Eigen::Index i, double lambda) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (j == i) continue;
    double v;
    if (beta[j] > 0.0) {
      v = std::abs(-c[j] + lambda);
    } else if (beta[j] < 0.0) {
      v = std::abs(-c[j] - lambda);
    } else {
      v = std::max(0.0, std::abs(c[j]) - lambda);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw InputError("solver tolerance must be positive");
  if (max_iter < 1) throw InputError("solver max_iter must be at least 1");
  if (full_sweep_period < 1) throw InputError("solver full_sweep_period must be at least 1");
}

std::vector<Eigen::Index> SparseCoefVector::support(double eps) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < coefs.size(); ++j) {
    if (std::abs(coefs[j]) > eps) out.push_back(j);
  }
  return out;
}

std::size_t CoefficientMatrix::nonzeros(double eps) const {
  return static_cast<std::size_t>((coefs.array().abs() > eps).count());
}

double lasso_rss(const SegmentGram& seg, const SparseCoefVector& beta) {
  const Matrix& g = seg.gram;
  const Eigen::Index i = beta.response;
  const auto supp = beta.support();
  double cross = 0.0;
  double quad = 0.0;
  for (Eigen::Index j : supp) {
    cross += beta.coefs[j] * g(j, i);
    double row = 0.0;
    for (Eigen::Index k : supp) row += g(j, k) * beta.coefs[k];
    quad += beta.coefs[j] * row;
  }
  return std::max(0.0, g(i, i) - 2.0 * cross + quad);
}

double lasso_objective(const SegmentGram& seg, const SparseCoefVector& beta, double lambda1) {
  return 0.5 * lasso_rss(seg, beta) + lambda1 * beta.l1_norm();
}

double kkt_residual(const SegmentGram& seg, const SparseCoefVector& beta, double lambda1) {
  const Vector c = residual_correlation(seg.gram, beta.response, beta.coefs);
  return kkt_from_correlation(c, beta.coefs, beta.response, lambda1);
}

SparseCoefVector lasso_fit(const SegmentGram& seg, Eigen::Index response, double lambda1,
                           const SolverConfig& cfg, const Vector* warm_start) {
  const Matrix& g = seg.gram;
  const Eigen::Index p = g.rows();
  if (response < 0 || response >= p) throw InputError("response index out of range");
  if (lambda1 < 0.0) throw InputError("lambda1 must be nonnegative");

  SparseCoefVector out;
  out.response = response;
  out.coefs = Vector::Zero(p);
  if (g(response, response) <= 0.0) return out;  // zero response channel

  Vector& beta = out.coefs;
  if (warm_start != nullptr && warm_start->size() == p) {
    beta = *warm_start;
    beta[response] = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (g(j, j) <= 0.0) beta[j] = 0.0;
    }
  }

  const double kkt_target = 10.0 * cfg.tol * (1.0 + lambda1);
  auto converged_by_size = [&](double max_change) {
    return max_change <= cfg.tol * std::max(1.0, beta.cwiseAbs().maxCoeff());
  };

  // Active-set sweeps work on the restricted problem: gram_a = G[A, A] and
  // corr_a = c[A], so each update costs O(|A|) instead of O(p).
  std::vector<Eigen::Index> active;
  Matrix gram_a;
  Vector corr_a;
  Vector c;

  out.converged = false;
  bool force_full = false;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const bool full = force_full || iter < 2 || iter % cfg.full_sweep_period == 0;
    force_full = false;
    double max_change = 0.0;

    if (full) {
      c = residual_correlation(g, response, beta);
      for (Eigen::Index j = 0; j < p; ++j) {
        if (j == response) continue;
        const double gjj = g(j, j);
        if (gjj <= 0.0) continue;
        const double old = beta[j];
        const double updated = soft_threshold(c[j] + gjj * old, lambda1) / gjj;
        if (updated == old) continue;
        const double delta = updated - old;
        c.noalias() -= g.col(j) * delta;
        beta[j] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
      out.iterations = iter + 1;
      if (converged_by_size(max_change)) {
        c = residual_correlation(g, response, beta);
        if (kkt_from_correlation(c, beta, response, lambda1) <= kkt_target) {
          out.converged = true;
          break;
        }
      }
      active.clear();
      for (Eigen::Index j = 0; j < p; ++j) {
        if (beta[j] != 0.0) active.push_back(j);
      }
      const auto na = static_cast<Eigen::Index>(active.size());
      gram_a.resize(na, na);
      corr_a.resize(na);
      for (Eigen::Index a = 0; a < na; ++a) {
        corr_a[a] = c[active[a]];
        for (Eigen::Index b = 0; b < na; ++b) gram_a(a, b) = g(active[a], active[b]);
      }
      continue;
    }

    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(active.size()); ++a) {
      const Eigen::Index j = active[a];
      const double gjj = gram_a(a, a);
      const double old = beta[j];
      const double updated = soft_threshold(corr_a[a] + gjj * old, lambda1) / gjj;
      if (updated == old) continue;
      const double delta = updated - old;
      corr_a.noalias() -= gram_a.col(a) * delta;
      beta[j] = updated;
      max_change = std::max(max_change, std::abs(delta));
    }
    out.iterations = iter + 1;
    if (converged_by_size(max_change)) force_full = true;
  }
  return out;
}

SegmentCost segment_cost(const SegmentGram& seg, double lambda1_rate, const SolverConfig& cfg,
                         const CoefficientMatrix* warm_start) {
  const Eigen::Index p = seg.dim();
  const double lambda1 = lambda1_of_length(lambda1_rate, seg.length());
  SegmentCost out;
  out.coefs.coefs = Matrix::Zero(p, p);
  out.coefs.start = seg.start;
  out.coefs.end = seg.end;
  const bool warm = warm_start != nullptr && warm_start->coefs.rows() == p &&
                    warm_start->coefs.cols() == p;
  Vector row;
  for (Eigen::Index i = 0; i < p; ++i) {
    const Vector* init = nullptr;
    if (warm) {
      row = warm_start->coefs.row(i).transpose();
      init = &row;
    }
    SparseCoefVector fit = lasso_fit(seg, i, lambda1, cfg, init);
    if (!fit.converged) ++out.nonconverged;
    out.cost += 0.5 * lasso_rss(seg, fit) + lambda1 * fit.l1_norm();
    out.coefs.coefs.row(i) = fit.coefs.transpose();
  }
  return out;
}

}  // namespace dssl
