#pragma once

#include "dssl/lasso.hpp"
#include "dssl/pelt.hpp"
#include "dssl/types.hpp"

#include <span>
#include <vector>

namespace dssl {

struct LabeledStream {
  Matrix samples;  // N x p
  std::vector<TimeIndex> change_points;
};

struct TuneGrid {
  std::vector<double> lambda1_candidates;  // ascending
  std::vector<double> lambda2_candidates;  // ascending
  std::size_t s_bound = 5;
  std::vector<LabeledStream> streams;

  void validate() const;
};

struct BicReport {
  double lambda1_0 = 0.0;
  double bic_value = 0.0;
  std::vector<std::size_t> df_per_segment;
  std::vector<std::size_t> seg_lengths;
  /// Mean squared residual was below 1e-12 and was clamped before the log.
  bool clamped = false;
};

/// np * log(max(mean_square, 1e-12)) + sum_c df_c log(len_c). Sets *clamped when the
/// floor applied.
double bic_criterion(double np, double mean_square, std::span<const std::size_t> df,
                     std::span<const std::size_t> seg_lengths, bool* clamped = nullptr);

/// (N p) log(mean squared self-expressive residual) + sum_c df_c log(len_c).
///
/// `change_points` split the N rows of `samples` into coefs.size() segments; df_c counts
/// entries of segment c's coefficient matrix with |b| > 1e-10.
BicReport bic_score(std::span<const TimeIndex> change_points,
                    std::span<const CoefficientMatrix> coefs, const Matrix& samples);

/// Number of steps t where the online latest change-point is more than s away from the
/// most recent true change-point at or before t.
std::size_t lcp_disagreement(std::span<const DetectionRecord> records,
                             std::span<const TimeIndex> truth, std::size_t s);

/// Median of the grid taken on the log scale.
double geometric_median(std::span<const double> grid);

struct GridScore {
  double value = 0.0;
  double score = 0.0;
};

struct Lambda1Selection {
  double lambda1_0 = 0.0;
  double lambda2_provisional = 0.0;
  std::vector<GridScore> scores;  // mean BIC over streams, one per grid value
  std::vector<std::vector<BicReport>> details;
};

struct Lambda2Selection {
  double lambda2 = 0.0;
  std::vector<GridScore> scores;  // disagreement summed over streams
};

/// Runs detection for each lambda1_0 with the provisional lambda2 and returns the value
/// with the smallest mean BIC. Ties go to the smaller lambda1_0.
Lambda1Selection select_lambda1(const TuneGrid& grid, double lambda2_provisional,
                                const PenaltyConfig& base, const SolverConfig& solver,
                                std::size_t threads = 0);

/// Runs detection for each lambda2 and returns the value with the fewest latest-change-point
/// disagreements. Ties go to the larger lambda2.
Lambda2Selection select_lambda2(const TuneGrid& grid, double lambda1_0, const PenaltyConfig& base,
                                const SolverConfig& solver, std::size_t threads = 0);

struct TuneResult {
  Lambda1Selection lambda1;
  Lambda2Selection lambda2;
};

/// lambda1_0 first (provisional lambda2 = geometric median of its grid), then lambda2.
TuneResult tune(const TuneGrid& grid, const PenaltyConfig& base, const SolverConfig& solver,
                std::size_t threads = 0);

}  // namespace dssl
