#include "dssl/pelt.hpp"

#include "dssl/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

namespace dssl {

void PenaltyConfig::validate() const {
  if (!(lambda1_rate >= 0.0) || !std::isfinite(lambda1_rate)) {
    throw InputError("lambda1_0 must be a finite nonnegative number");
  }
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) {
    throw InputError("lambda2 must be a finite positive number");
  }
  if (!(k_factor >= 0.0 && k_factor < 1.0)) throw InputError("k_factor must lie in [0, 1)");
  if (!std::is_sorted(lag_offsets.begin(), lag_offsets.end())) {
    throw InputError("lag offsets must be sorted ascending");
  }
  if (std::find(lag_offsets.begin(), lag_offsets.end(), 0) != lag_offsets.end()) {
    throw InputError("lag offsets must be positive");
  }
  if (min_seg_len < 1) throw InputError("min_seg_len must be at least 1");
}

OnlineDetector::OnlineDetector(Eigen::Index p, PenaltyConfig penalty, SolverConfig solver,
                               DetectorOptions options)
    : penalty_(std::move(penalty)),
      solver_(solver),
      options_(options),
      threads_(options.threads == 0 ? default_thread_count() : options.threads),
      store_(p, options.store) {
  penalty_.validate();
  solver_.validate();
  objective_.push_back(-penalty_.lambda2);
  back_.push_back(0);
  candidates_.push_back(Candidate{});
  if (!penalty_.lag_offsets.empty()) max_lag_ = penalty_.lag_offsets.back();
}

bool OnlineDetector::eligible(TimeIndex tau, TimeIndex n) const {
  return tau == 0 || n - tau >= penalty_.min_seg_len;
}

void OnlineDetector::admit(TimeIndex tau) {
  if (tau != 0 && tau < penalty_.min_seg_len) return;
  auto pos = std::lower_bound(candidates_.begin(), candidates_.end(), tau,
                              [](const Candidate& c, TimeIndex t) { return c.tau < t; });
  if (pos != candidates_.end() && pos->tau == tau) return;
  Candidate fresh;
  fresh.tau = tau;
  candidates_.insert(pos, std::move(fresh));
}

bool OnlineDetector::keep_condition(const Candidate& c, TimeIndex m) const {
  for (const auto& [when, cost] : c.history) {
    if (when == m) {
      return objective_[c.tau] + cost + penalty_.pruning_constant() < objective_[m];
    }
  }
  return false;
}

DetectionRecord OnlineDetector::push(const Vector& y) {
  return push(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

DetectionRecord OnlineDetector::push(std::span<const double> y) {
  const auto started = std::chrono::steady_clock::now();
  store_.push(y);
  const TimeIndex n = store_.size();

  std::vector<std::size_t> scored;
  for (std::size_t k = 0; k < candidates_.size(); ++k) {
    if (eligible(candidates_[k].tau, n)) scored.push_back(k);
  }

  std::vector<SegmentCost> costs(scored.size());
  parallel_for(scored.size(), threads_, [&](std::size_t k) {
    const Candidate& c = candidates_[scored[k]];
    const SegmentGram seg = store_.segment(c.tau, n);
    costs[k] = segment_cost(seg, penalty_.lambda1_rate, solver_, c.has_warm ? &c.warm : nullptr);
  });

  // Ascending tau with strict comparison: ties go to the earliest change.
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  int nonconverged = 0;
  for (std::size_t k = 0; k < scored.size(); ++k) {
    const double total = objective_[candidates_[scored[k]].tau] + costs[k].cost + penalty_.lambda2;
    if (total < best) {
      best = total;
      best_k = k;
    }
    nonconverged += costs[k].nonconverged;
  }
  if (!std::isfinite(best)) throw InvariantError("no finite candidate objective");
  const TimeIndex tau_hat = candidates_[scored[best_k]].tau;
  objective_.push_back(best);
  back_.push_back(tau_hat);
  fits_[n] = costs[best_k].coefs;

  const std::size_t evaluated = candidates_.size();
  for (std::size_t k = 0; k < scored.size(); ++k) {
    Candidate& c = candidates_[scored[k]];
    c.history.emplace_back(n, costs[k].cost);
    while (!c.history.empty() && c.history.front().first + max_lag_ < n) c.history.pop_front();
    c.warm = std::move(costs[k].coefs);
    c.has_warm = true;
  }

  if (options_.mode == SearchMode::Pruned) {
    std::vector<Candidate> survivors;
    survivors.reserve(candidates_.size() + penalty_.lag_offsets.size() + 1);
    for (Candidate& c : candidates_) {
      bool keep = !eligible(c.tau, n) || keep_condition(c, n);
      for (std::size_t lag : penalty_.lag_offsets) {
        if (keep || lag >= n) break;
        keep = keep_condition(c, n - lag);
      }
      if (keep) survivors.push_back(std::move(c));
    }
    candidates_ = std::move(survivors);
    // Lagged horizons re-admit n - lag, so a point pruned early gets another look once
    // more post-change samples have arrived.
    for (std::size_t lag : penalty_.lag_offsets) {
      if (lag < n) admit(n - lag);
    }
  }
  admit(n);

  DetectionRecord rec;
  rec.t = n;
  rec.lcp = tau_hat;
  rec.objective = best;
  rec.n_candidates = evaluated;
  rec.n_scored = scored.size();
  rec.change_points = change_points_at(n);
  rec.nonconverged = nonconverged;

  // Retain statistics for live candidates and the current segmentation only.
  // Indices n + 1 - max_lag .. n may still be re-admitted at a later horizon.
  std::set<TimeIndex> keep_grams(rec.change_points.begin(), rec.change_points.end());
  std::vector<TimeIndex> roots;
  for (const Candidate& c : candidates_) roots.push_back(c.tau);
  if (options_.mode == SearchMode::Pruned) {
    for (TimeIndex t = n + 1 > max_lag_ ? n + 1 - max_lag_ : 0; t <= n; ++t) roots.push_back(t);
  }
  roots.push_back(n);
  std::set<TimeIndex> keep_fits;
  for (TimeIndex root : roots) {
    keep_grams.insert(root);
    for (TimeIndex t = root; t > 0 && keep_fits.insert(t).second; t = back_[t]) {
    }
  }
  store_.evict_except(keep_grams);
  std::erase_if(fits_, [&](const auto& kv) { return keep_fits.count(kv.first) == 0; });

  rec.step_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

std::vector<TimeIndex> OnlineDetector::candidates() const {
  std::vector<TimeIndex> out;
  out.reserve(candidates_.size());
  for (const Candidate& c : candidates_) out.push_back(c.tau);
  return out;
}

std::vector<TimeIndex> OnlineDetector::change_points_at(TimeIndex t) const {
  std::vector<TimeIndex> out;
  for (TimeIndex cur = back_.at(t); cur > 0; cur = back_[cur]) out.push_back(cur);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<TimeIndex> OnlineDetector::change_points() const {
  return change_points_at(store_.size());
}

std::vector<CoefficientMatrix> OnlineDetector::segment_coefficients() const {
  std::vector<CoefficientMatrix> out;
  for (TimeIndex t = store_.size(); t > 0; t = back_[t]) {
    auto it = fits_.find(t);
    if (it == fits_.end()) throw InvariantError("fit for a live segment was evicted");
    out.push_back(it->second);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

StreamResult run_with_mode(const Matrix& samples, const PenaltyConfig& penalty,
                           const SolverConfig& solver, std::size_t threads, SearchMode mode) {
  if (samples.rows() == 0 || samples.cols() == 0) throw InputError("empty sample matrix");
  DetectorOptions opts;
  opts.mode = mode;
  opts.threads = threads;
  opts.store.retain_raw = false;
  OnlineDetector det(samples.cols(), penalty, solver, opts);
  StreamResult out;
  out.records.reserve(static_cast<std::size_t>(samples.rows()));
  Vector row;
  for (Eigen::Index t = 0; t < samples.rows(); ++t) {
    row = samples.row(t).transpose();
    out.records.push_back(det.push(row));
  }
  out.change_points = det.change_points();
  out.objective = det.objective();
  out.segments = det.segment_coefficients();
  return out;
}

}  // namespace

StreamResult run_stream(const Matrix& samples, const PenaltyConfig& penalty,
                        const SolverConfig& solver, std::size_t threads) {
  return run_with_mode(samples, penalty, solver, threads, SearchMode::Pruned);
}

StreamResult run_op_reference(const Matrix& samples, const PenaltyConfig& penalty,
                              const SolverConfig& solver, std::size_t threads) {
  return run_with_mode(samples, penalty, solver, threads, SearchMode::Exhaustive);
}

double gamma_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty()) return 0.0;
  if (b.empty()) return 1.0;
  double worst = 0.0;
  for (double x : a) {
    double nearest = std::numeric_limits<double>::infinity();
    for (double y : b) nearest = std::min(nearest, std::abs(x - y));
    worst = std::max(worst, nearest);
  }
  return worst;
}

}  // namespace dssl
