#pragma once

#include "dssl/types.hpp"

#include <map>
#include <set>
#include <span>

namespace dssl {

/// Sufficient statistic of the samples in (start, end]: G = sum of y y' over the segment.
struct SegmentGram {
  TimeIndex start = 0;  // exclusive
  TimeIndex end = 0;    // inclusive
  Matrix gram;

  std::size_t length() const { return end - start; }
  Eigen::Index dim() const { return gram.rows(); }
};

struct GramStoreOptions {
  /// Keep raw samples for every index after the oldest retained prefix.
  bool retain_raw = true;
  /// Recompute the current prefix from retained raw samples every this many pushes (0 disables).
  std::size_t refresh_interval = 1024;
};

/// Append-only p-channel sample buffer with retained prefix Gram matrices.
///
/// Prefix G(t) = sum_{s<=t} y_s y_s'. Any segment statistic is a difference of two
/// retained prefixes. Prefixes are released with evict_except() once the detector no
/// longer needs them, so memory stays proportional to the live candidate set.
class GramStore {
 public:
  explicit GramStore(Eigen::Index p, GramStoreOptions opts = {});

  /// Appends one sample. Throws InputError (and leaves the store untouched) on a
  /// dimension mismatch or a non-finite entry.
  void push(std::span<const double> y);
  void push(const Vector& y);

  Eigen::Index dim() const { return p_; }
  TimeIndex size() const { return n_; }

  /// G(end) - G(start). Throws InvariantError if either prefix has been evicted.
  SegmentGram segment(TimeIndex start, TimeIndex end) const;

  bool has_prefix(TimeIndex t) const { return prefixes_.count(t) != 0; }
  const Matrix& prefix(TimeIndex t) const;

  /// Releases every prefix (and raw sample) not needed by an index in keep. The
  /// current index is always kept.
  void evict_except(const std::set<TimeIndex>& keep);

  std::size_t retained_prefix_count() const { return prefixes_.size(); }
  std::vector<TimeIndex> retained_indices() const;

  /// Rebuilds G(t) from the oldest retained prefix and retained raw samples, using the
  /// same summation order as push(). Empty matrix if the raw samples are gone.
  Matrix recompute_prefix(TimeIndex t) const;

  /// Raw sample y_t (1-based); throws InvariantError if not retained.
  const Vector& sample(TimeIndex t) const;
  bool has_sample(TimeIndex t) const { return raw_.count(t) != 0; }

 private:
  Eigen::Index p_;
  GramStoreOptions opts_;
  TimeIndex n_ = 0;
  Matrix current_;
  std::map<TimeIndex, Matrix> prefixes_;
  std::map<TimeIndex, Vector> raw_;
};

}  // namespace dssl
