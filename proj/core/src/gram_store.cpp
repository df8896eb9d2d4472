#include "dssl/gram_store.hpp"

#include <cmath>
#include <string>

namespace dssl {

GramStore::GramStore(Eigen::Index p, GramStoreOptions opts)
    : p_(p), opts_(opts), current_(Matrix::Zero(p, p)) {
  if (p < 1) throw InputError("channel count must be positive");
  prefixes_.emplace(0, current_);
}

void GramStore::push(std::span<const double> y) {
  if (static_cast<Eigen::Index>(y.size()) != p_) {
    throw InputError("sample has " + std::to_string(y.size()) + " entries, expected " +
                     std::to_string(p_));
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw InputError("sample contains a non-finite entry");
  }
  const Eigen::Map<const Vector> v(y.data(), p_);
  current_.noalias() += v * v.transpose();
  ++n_;
  prefixes_[n_] = current_;
  if (opts_.retain_raw) raw_.emplace(n_, v);

  // Recomputation follows push() order exactly, so any mismatch is a bookkeeping bug.
  if (opts_.retain_raw && opts_.refresh_interval > 0 && n_ % opts_.refresh_interval == 0) {
    Matrix check = recompute_prefix(n_);
    if (check.size() != 0 && check != current_) {
      throw InvariantError("prefix Gram diverged from raw-sample recomputation");
    }
  }
}

void GramStore::push(const Vector& y) { push(std::span<const double>(y.data(), y.size())); }

const Matrix& GramStore::prefix(TimeIndex t) const {
  auto it = prefixes_.find(t);
  if (it == prefixes_.end()) {
    throw InvariantError("prefix Gram for t=" + std::to_string(t) + " is not retained");
  }
  return it->second;
}

SegmentGram GramStore::segment(TimeIndex start, TimeIndex end) const {
  if (!(start < end && end <= n_)) {
    throw InvariantError("invalid segment (" + std::to_string(start) + ", " +
                         std::to_string(end) + "] for stream of length " + std::to_string(n_));
  }
  SegmentGram seg;
  seg.start = start;
  seg.end = end;
  seg.gram = prefix(end) - prefix(start);
  return seg;
}

void GramStore::evict_except(const std::set<TimeIndex>& keep) {
  for (auto it = prefixes_.begin(); it != prefixes_.end();) {
    if (it->first != n_ && keep.count(it->first) == 0) {
      it = prefixes_.erase(it);
    } else {
      ++it;
    }
  }
  const TimeIndex oldest = prefixes_.begin()->first;
  raw_.erase(raw_.begin(), raw_.upper_bound(oldest));
}

std::vector<TimeIndex> GramStore::retained_indices() const {
  std::vector<TimeIndex> out;
  out.reserve(prefixes_.size());
  for (const auto& [t, g] : prefixes_) out.push_back(t);
  return out;
}

Matrix GramStore::recompute_prefix(TimeIndex t) const {
  if (t > n_) return {};
  auto base = prefixes_.begin();
  if (base->first > t) return {};
  Matrix g = base->second;
  for (TimeIndex s = base->first + 1; s <= t; ++s) {
    auto it = raw_.find(s);
    if (it == raw_.end()) return {};
    g.noalias() += it->second * it->second.transpose();
  }
  return g;
}

const Vector& GramStore::sample(TimeIndex t) const {
  auto it = raw_.find(t);
  if (it == raw_.end()) {
    throw InvariantError("raw sample t=" + std::to_string(t) + " is not retained");
  }
  return it->second;
}

}  // namespace dssl
