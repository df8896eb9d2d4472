#include "dssl/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

namespace dssl {
namespace {

bool near_any(TimeIndex x, std::span<const TimeIndex> pool, std::size_t s) {
  return std::any_of(pool.begin(), pool.end(), [&](TimeIndex y) {
    const TimeIndex d = x > y ? x - y : y - x;
    return d <= s;
  });
}

std::vector<double> relative(std::span<const TimeIndex> cps, std::size_t n) {
  std::vector<double> out;
  out.reserve(cps.size());
  for (TimeIndex c : cps) out.push_back(static_cast<double>(c) / static_cast<double>(n));
  return out;
}

// Renumbers labels 0.. in order of first appearance.
std::vector<int> canonical(const std::vector<int>& labels) {
  std::vector<int> out(labels.size());
  std::vector<int> seen(labels.size() + 1, -1);
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw InputError("labels must be non-negative");
    const auto l = static_cast<std::size_t>(labels[i]);
    if (l >= seen.size()) seen.resize(l + 1, -1);
    if (seen[l] < 0) seen[l] = next++;
    out[i] = seen[l];
  }
  return out;
}

std::vector<std::vector<int>> components(const Matrix& w, double eps) {
  const auto p = static_cast<int>(w.rows());
  std::vector<int> comp(static_cast<std::size_t>(p), -1);
  std::vector<std::vector<int>> out;
  for (int root = 0; root < p; ++root) {
    if (comp[static_cast<std::size_t>(root)] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{root};
    comp[static_cast<std::size_t>(root)] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      out.back().push_back(u);
      for (int v = 0; v < p; ++v) {
        if (comp[static_cast<std::size_t>(v)] < 0 && w(u, v) > eps) {
          comp[static_cast<std::size_t>(v)] = id;
          stack.push_back(v);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

std::pair<std::vector<int>, std::vector<int>> fiedler_split(const Matrix& w,
                                                            const std::vector<int>& group) {
  const auto m = static_cast<Eigen::Index>(group.size());
  Matrix sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      sub(a, b) = a == b ? 0.0 : w(group[static_cast<std::size_t>(a)], group[static_cast<std::size_t>(b)]);
  const Vector deg = sub.rowwise().sum();
  Vector inv_sqrt(m);
  for (Eigen::Index a = 0; a < m; ++a) inv_sqrt[a] = deg[a] > 0.0 ? 1.0 / std::sqrt(deg[a]) : 0.0;
  Matrix lap = -(inv_sqrt.asDiagonal() * sub * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;

  Eigen::SelfAdjointEigenSolver<Matrix> es(lap);
  Vector u = es.eigenvectors().col(1);
  for (Eigen::Index a = 0; a < m; ++a)
    if (inv_sqrt[a] > 0.0) u[a] *= inv_sqrt[a];

  double cut = 0.0;
  const auto pos = (u.array() >= 0.0).count();
  if (pos == 0 || pos == m) {
    std::vector<double> sorted(u.data(), u.data() + m);
    std::nth_element(sorted.begin(), sorted.begin() + m / 2, sorted.end());
    cut = sorted[static_cast<std::size_t>(m / 2)];
  }
  std::vector<int> lo, hi;
  for (Eigen::Index a = 0; a < m; ++a) (u[a] >= cut ? hi : lo).push_back(group[static_cast<std::size_t>(a)]);
  if (lo.empty() || hi.empty()) {
    // Constant vector: fall back to halving by index.
    lo.assign(group.begin(), group.begin() + m / 2);
    hi.assign(group.begin() + m / 2, group.end());
  }
  return {lo, hi};
}

}  // namespace

PrecisionRecall precision_recall(std::span<const TimeIndex> est, std::span<const TimeIndex> truth,
                                 std::size_t s) {
  PrecisionRecall out;
  if (est.empty() && truth.empty()) {
    out.precision = out.recall = 1.0;
    out.rule = EmptyListRule::Both;
    return out;
  }
  if (est.empty()) {
    out.precision = 1.0;
    out.rule = EmptyListRule::NoEstimates;
    return out;
  }
  if (truth.empty()) {
    out.recall = 1.0;
    out.rule = EmptyListRule::NoTruth;
    return out;
  }
  const auto hits = std::count_if(est.begin(), est.end(), [&](TimeIndex e) { return near_any(e, truth, s); });
  const auto found = std::count_if(truth.begin(), truth.end(), [&](TimeIndex c) { return near_any(c, est, s); });
  out.precision = static_cast<double>(hits) / static_cast<double>(est.size());
  out.recall = static_cast<double>(found) / static_cast<double>(truth.size());
  return out;
}

DelayReport detection_delay(std::span<const TimeIndex> lcp_trace,
                            std::span<const TimeIndex> truth, std::size_t s) {
  std::vector<TimeIndex> sorted(truth.begin(), truth.end());
  std::sort(sorted.begin(), sorted.end());
  DelayReport out;
  double sum = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const TimeIndex tau = sorted[k];
    const TimeIndex stop = k + 1 < sorted.size() ? sorted[k + 1] : lcp_trace.size() + 1;
    long delay = -1;
    for (TimeIndex t = std::max<TimeIndex>(tau, 1); t < stop && t <= lcp_trace.size(); ++t) {
      const TimeIndex l = lcp_trace[t - 1];
      if ((l > tau ? l - tau : tau - l) <= s) {
        delay = static_cast<long>(t - tau);
        break;
      }
    }
    out.delays.push_back(delay);
    if (delay >= 0) {
      ++out.detected;
      sum += static_cast<double>(delay);
    } else {
      ++out.missed;
    }
  }
  out.mean = out.detected ? sum / static_cast<double>(out.detected) : 0.0;
  return out;
}

bool SubspaceCheck::all_nontrivial() const {
  return std::all_of(nontrivial.begin(), nontrivial.end(), [](bool b) { return b; });
}

SubspaceCheck subspace_detection_check(const Matrix& coefs, std::span<const int> labels, double eps) {
  if (coefs.rows() != coefs.cols() || static_cast<std::size_t>(coefs.rows()) != labels.size())
    throw InputError("coefficient matrix and labels disagree in size");
  SubspaceCheck out;
  double cross = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < coefs.rows(); ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < coefs.cols(); ++j) {
      const double a = std::abs(coefs(i, j));
      total += a;
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) cross += a;
      any = any || a > eps;
    }
    out.nontrivial.push_back(any);
  }
  out.cross_mass = total > 0.0 ? cross / total : 0.0;
  return out;
}

std::vector<int> cluster_subspaces(const Matrix& coefs, int k, double eps) {
  if (coefs.rows() != coefs.cols()) throw InputError("coefficient matrix must be square");
  if (k < 1 || k > coefs.rows()) throw InputError("cluster count must lie in [1, p]");
  const Matrix w = coefs.cwiseAbs() + coefs.cwiseAbs().transpose();
  auto groups = components(w, eps);

  auto by_first = [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); };
  while (static_cast<int>(groups.size()) > k) {
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() < b.size() : a.front() < b.front();
    });
    groups[1].insert(groups[1].end(), groups[0].begin(), groups[0].end());
    std::sort(groups[1].begin(), groups[1].end());
    groups.erase(groups.begin());
  }
  while (static_cast<int>(groups.size()) < k) {
    std::sort(groups.begin(), groups.end(), by_first);
    std::size_t pick = 0;
    for (std::size_t g = 1; g < groups.size(); ++g)
      if (groups[g].size() > groups[pick].size()) pick = g;
    auto [lo, hi] = fiedler_split(w, groups[pick]);
    groups[pick] = std::move(lo);
    groups.push_back(std::move(hi));
  }

  std::vector<int> labels(static_cast<std::size_t>(coefs.rows()), 0);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int i : groups[g]) labels[static_cast<std::size_t>(i)] = static_cast<int>(g);
  return canonical(labels);
}

double label_agreement(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InputError("label vectors differ in length");
  if (a.empty()) return 1.0;
  const auto ca = canonical(std::vector<int>(a.begin(), a.end()));
  const auto cb = canonical(std::vector<int>(b.begin(), b.end()));
  const int ka = *std::max_element(ca.begin(), ca.end()) + 1;
  const int kb = *std::max_element(cb.begin(), cb.end()) + 1;
  const int k = std::max(ka, kb);
  // counts[x][y]: positions with a == x and b == y.
  std::vector<std::vector<long>> counts(static_cast<std::size_t>(k), std::vector<long>(static_cast<std::size_t>(k), 0));
  for (std::size_t i = 0; i < ca.size(); ++i) ++counts[static_cast<std::size_t>(ca[i])][static_cast<std::size_t>(cb[i])];

  long best = 0;
  if (k <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      long m = 0;
      for (int x = 0; x < k; ++x) m += counts[static_cast<std::size_t>(x)][static_cast<std::size_t>(perm[static_cast<std::size_t>(x)])];
      best = std::max(best, m);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    // Greedy matching on the largest overlaps.
    std::set<int> used_a, used_b;
    for (int round = 0; round < k; ++round) {
      long top = -1;
      int bx = 0, by = 0;
      for (int x = 0; x < k; ++x)
        for (int y = 0; y < k; ++y)
          if (!used_a.count(x) && !used_b.count(y) && counts[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] > top) {
            top = counts[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
            bx = x;
            by = y;
          }
      used_a.insert(bx);
      used_b.insert(by);
      best += top;
    }
  }
  return static_cast<double>(best) / static_cast<double>(a.size());
}

MetricsReport evaluate_run(std::span<const DetectionRecord> records,
                           std::span<const TimeIndex> est, std::span<const TimeIndex> truth,
                           std::size_t n, std::size_t s) {
  if (n == 0) throw InputError("stream length must be positive");
  MetricsReport r;
  r.s_bound = s;
  const auto pr = precision_recall(est, truth, s);
  r.precision = pr.precision;
  r.recall = pr.recall;
  r.empty_rule = pr.rule;

  std::vector<TimeIndex> trace;
  trace.reserve(records.size());
  for (const auto& rec : records) {
    trace.push_back(rec.lcp);
    r.runtime_total += rec.step_seconds;
  }
  r.runtime_per_step = records.empty() ? 0.0 : r.runtime_total / static_cast<double>(records.size());

  const auto d = detection_delay(trace, truth, s);
  r.delays = d.delays;
  r.missed = d.missed;
  r.mean_delay = d.mean;
  if (d.detected > 1) {
    double ss = 0.0;
    for (long x : d.delays)
      if (x >= 0) ss += (static_cast<double>(x) - d.mean) * (static_cast<double>(x) - d.mean);
    const double sd = std::sqrt(ss / static_cast<double>(d.detected - 1));
    r.delay_ci = 1.96 * sd / std::sqrt(static_cast<double>(d.detected));
  }

  const auto ge = relative(est, n);
  const auto gt = relative(truth, n);
  r.rho_to_truth = gamma_distance(ge, gt);
  r.rho_from_truth = gamma_distance(gt, ge);
  return r;
}

void write_trace_tsv(std::ostream& out, std::span<const DetectionRecord> records) {
  out << "t\tlcp\tF\tn_candidates\n";
  const auto old = out.precision(17);
  for (const auto& rec : records)
    out << rec.t << '\t' << rec.lcp << '\t' << rec.objective << '\t' << rec.n_candidates << '\n';
  out.precision(old);
}

}  // namespace dssl
