#pragma once

#include "dssl/gram_store.hpp"
#include "dssl/lasso.hpp"
#include "dssl/types.hpp"

#include <deque>
#include <map>
#include <span>
#include <vector>

namespace dssl {

struct PenaltyConfig {
  /// Sparsity rate lambda1_0; the segment penalty is lambda1_0 * length.
  double lambda1_rate = 0.0028;
  /// Per-segment penalty.
  double lambda2 = 2.2;
  /// Pruning constant K = k_factor * lambda2. Must stay below 1.
  double k_factor = 2.0 / 3.0;
  /// Pruning is also evaluated at horizons n - lag: a candidate survives if the
  /// keep-condition holds at any horizon, and each n - lag is re-admitted as a candidate.
  std::vector<std::size_t> lag_offsets{5, 10, 15};
  std::size_t min_seg_len = 2;

  double pruning_constant() const { return k_factor * lambda2; }
  void validate() const;
};

enum class SearchMode {
  Pruned,      // PELT candidate pruning
  Exhaustive,  // optimal partitioning over every feasible last change-point
};

struct DetectorOptions {
  SearchMode mode = SearchMode::Pruned;
  /// 0 selects default_thread_count().
  std::size_t threads = 0;
  GramStoreOptions store;
};

struct DetectionRecord {
  TimeIndex t = 0;
  TimeIndex lcp = 0;
  double objective = 0.0;      // F(t)
  std::size_t n_candidates = 0;  // |R(t)|
  std::size_t n_scored = 0;      // segment costs evaluated at t
  std::vector<TimeIndex> change_points;
  double step_seconds = 0.0;
  int nonconverged = 0;
};

/// Sequential penalised segmentation with sparse self-expressive segment costs.
///
/// After each sample n the detector holds F(n), the optimal objective for Y_1..Y_n with
/// F(0) = -lambda2, the back-pointer cp(n), and the candidate set for the next step.
/// Candidate tau with n - tau < min_seg_len is deferred rather than scored, except tau = 0
/// which is always scored so that short streams still have a segmentation. Only indices
/// 0 and t >= min_seg_len ever become candidates.
class OnlineDetector {
 public:
  OnlineDetector(Eigen::Index p, PenaltyConfig penalty, SolverConfig solver,
                 DetectorOptions options = {});

  /// Appends one sample and advances the recursion by one step.
  DetectionRecord push(std::span<const double> y);
  DetectionRecord push(const Vector& y);

  TimeIndex size() const { return store_.size(); }
  const GramStore& store() const { return store_; }
  const PenaltyConfig& penalty() const { return penalty_; }

  /// F(0..n).
  const std::vector<double>& objective() const { return objective_; }
  /// Back-pointers cp(0..n).
  const std::vector<TimeIndex>& back_pointers() const { return back_; }
  /// Candidate set for the next step, ascending.
  std::vector<TimeIndex> candidates() const;
  /// Change-points of the current optimal segmentation of Y_1..Y_n, ascending.
  std::vector<TimeIndex> change_points() const;
  std::vector<TimeIndex> change_points_at(TimeIndex t) const;
  /// Fitted coefficient matrices of the current optimal segmentation, in time order.
  std::vector<CoefficientMatrix> segment_coefficients() const;
  std::size_t retained_fit_count() const { return fits_.size(); }

 private:
  struct Candidate {
    TimeIndex tau = 0;
    CoefficientMatrix warm;
    bool has_warm = false;
    std::deque<std::pair<TimeIndex, double>> history;  // (m, Cost(tau+1 : m))
  };

  bool eligible(TimeIndex tau, TimeIndex n) const;
  /// True when F(tau) + Cost(tau+1 : m) + K < F(m), using the cost recorded at step m.
  bool keep_condition(const Candidate& c, TimeIndex m) const;
  void admit(TimeIndex tau);

  PenaltyConfig penalty_;
  SolverConfig solver_;
  DetectorOptions options_;
  std::size_t threads_;
  GramStore store_;
  std::vector<double> objective_;
  std::vector<TimeIndex> back_;
  std::vector<Candidate> candidates_;
  std::map<TimeIndex, CoefficientMatrix> fits_;  // fit for (cp(t), t]
  std::size_t max_lag_ = 0;
};

struct StreamResult {
  std::vector<DetectionRecord> records;
  std::vector<TimeIndex> change_points;
  std::vector<double> objective;  // F(0..N)
  std::vector<CoefficientMatrix> segments;
};

/// Feeds every row of `samples` (N x p) through a pruned detector.
StreamResult run_stream(const Matrix& samples, const PenaltyConfig& penalty,
                        const SolverConfig& solver, std::size_t threads = 0);

/// Same recursion with pruning disabled: every feasible last change-point is scored.
StreamResult run_op_reference(const Matrix& samples, const PenaltyConfig& penalty,
                              const SolverConfig& solver, std::size_t threads = 0);

/// max_i min_j |a_i - b_j|. Empty a gives 0; empty b with non-empty a gives 1.
double gamma_distance(std::span<const double> a, std::span<const double> b);

}  // namespace dssl
