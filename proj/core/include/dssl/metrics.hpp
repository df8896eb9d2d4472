#pragma once

#include "dssl/lasso.hpp"
#include "dssl/pelt.hpp"
#include "dssl/types.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace dssl {

enum class EmptyListRule {
  None,
  NoEstimates,  // precision set to 1
  NoTruth,      // recall set to 1
  Both,
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  EmptyListRule rule = EmptyListRule::None;
};

/// Fraction of estimates within s of some true change-point, and fraction of true
/// change-points within s of some estimate.
///
/// With no estimates, precision is 1 (recall 0 unless truth is empty too).
/// With no truth, recall is 1 (precision 0 unless estimates are empty too).
PrecisionRecall precision_recall(std::span<const TimeIndex> est, std::span<const TimeIndex> truth,
                                 std::size_t s);

struct DelayReport {
  /// Per true change-point; -1 when missed.
  std::vector<long> delays;
  std::size_t detected = 0;
  std::size_t missed = 0;
  double mean = 0.0;  // over detected change-points; 0 when none
};

/// lcp_trace[k] is the latest change-point reported after sample k + 1.
///
/// For a true change tau the delay is the first t >= tau with |lcp(t) - tau| <= s, minus
/// tau. The search stops before the next true change-point (or at the end of the trace);
/// a change not found by then counts as missed.
DelayReport detection_delay(std::span<const TimeIndex> lcp_trace,
                            std::span<const TimeIndex> truth, std::size_t s);

struct SubspaceCheck {
  /// Sum |b_ij| over pairs with different labels divided by the total; 0 for B == 0.
  double cross_mass = 0.0;
  /// nontrivial[i]: row i has at least one coefficient above eps.
  std::vector<bool> nontrivial;

  bool all_nontrivial() const;
};

SubspaceCheck subspace_detection_check(const Matrix& coefs, std::span<const int> labels,
                                       double eps = 1e-10);

/// Groups channels from the affinity |B| + |B|^T.
///
/// Connected components are used when there are at least k of them (the two smallest are
/// merged until k remain). Otherwise the largest group is split repeatedly by the sign of
/// its normalized-Laplacian Fiedler vector. Labels are 0..k-1, numbered by first channel.
std::vector<int> cluster_subspaces(const Matrix& coefs, int k, double eps = 1e-10);

/// Fraction of positions where the labelings agree, maximized over relabelings of b.
double label_agreement(std::span<const int> a, std::span<const int> b);

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  EmptyListRule empty_rule = EmptyListRule::None;
  std::size_t s_bound = 5;
  double mean_delay = 0.0;
  double delay_ci = 0.0;  // half-width of a normal 95% interval on the mean delay
  std::vector<long> delays;
  std::size_t missed = 0;
  double runtime_total = 0.0;
  double runtime_per_step = 0.0;
  double rho_to_truth = 0.0;    // gamma_distance(estimate, truth)
  double rho_from_truth = 0.0;  // gamma_distance(truth, estimate)
};

/// Evaluates one online run against the true change-points of a stream of length n.
MetricsReport evaluate_run(std::span<const DetectionRecord> records,
                           std::span<const TimeIndex> est, std::span<const TimeIndex> truth,
                           std::size_t n, std::size_t s);

/// Columns: t, lcp, F, n_candidates.
void write_trace_tsv(std::ostream& out, std::span<const DetectionRecord> records);

}  // namespace dssl
