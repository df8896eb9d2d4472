#include "dssl/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dssl {
namespace {

constexpr double kMinMeanSquare = 1e-12;

void require_ascending(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw InputError(std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0)
      throw InputError(std::string(name) + " grid values must be finite and non-negative");
    if (i > 0 && !(v[i - 1] < v[i])) throw InputError(std::string(name) + " grid must be strictly ascending");
  }
}

PenaltyConfig with(const PenaltyConfig& base, double l1, double l2) {
  PenaltyConfig pc = base;
  pc.lambda1_rate = l1;
  pc.lambda2 = l2;
  return pc;
}

}  // namespace

void TuneGrid::validate() const {
  require_ascending(lambda1_candidates, "lambda1");
  require_ascending(lambda2_candidates, "lambda2");
  if (lambda2_candidates.front() <= 0.0) throw InputError("lambda2 grid values must be positive");
  if (streams.empty()) throw InputError("tuning needs at least one labeled stream");
  for (const auto& s : streams) {
    if (s.samples.rows() == 0) throw InputError("labeled stream is empty");
    for (TimeIndex c : s.change_points)
      if (c == 0 || c >= static_cast<TimeIndex>(s.samples.rows()))
        throw InputError("true change-point outside the stream");
  }
}

double bic_criterion(double np, double mean_square, std::span<const std::size_t> df,
                     std::span<const std::size_t> seg_lengths, bool* clamped) {
  if (df.size() != seg_lengths.size()) throw InputError("df and segment lengths differ in count");
  const bool low = mean_square < kMinMeanSquare;
  if (clamped) *clamped = low;
  double value = np * std::log(low ? kMinMeanSquare : mean_square);
  for (std::size_t c = 0; c < df.size(); ++c)
    value += static_cast<double>(df[c]) * std::log(static_cast<double>(seg_lengths[c]));
  return value;
}

BicReport bic_score(std::span<const TimeIndex> change_points,
                    std::span<const CoefficientMatrix> coefs, const Matrix& samples) {
  const auto n = static_cast<TimeIndex>(samples.rows());
  const Eigen::Index p = samples.cols();
  if (coefs.size() != change_points.size() + 1)
    throw InputError("need one coefficient matrix per segment");
  std::vector<TimeIndex> bounds{0};
  bounds.insert(bounds.end(), change_points.begin(), change_points.end());
  bounds.push_back(n);

  BicReport r;
  double sse = 0.0;
  for (std::size_t c = 0; c < coefs.size(); ++c) {
    if (!(bounds[c] < bounds[c + 1])) throw InputError("segmentation must be strictly increasing");
    const Matrix& b = coefs[c].coefs;
    if (b.rows() != p || b.cols() != p) throw InputError("coefficient matrix has wrong dimension");
    const auto len = bounds[c + 1] - bounds[c];
    const auto y = samples.middleRows(static_cast<Eigen::Index>(bounds[c]), static_cast<Eigen::Index>(len));
    sse += (y - y * b.transpose()).squaredNorm();
    const std::size_t df = coefs[c].nonzeros(1e-10);
    r.df_per_segment.push_back(df);
    r.seg_lengths.push_back(len);
  }
  const double np = static_cast<double>(n) * static_cast<double>(p);
  r.bic_value = bic_criterion(np, sse / np, r.df_per_segment, r.seg_lengths, &r.clamped);
  return r;
}

std::size_t lcp_disagreement(std::span<const DetectionRecord> records,
                             std::span<const TimeIndex> truth, std::size_t s) {
  std::vector<TimeIndex> sorted(truth.begin(), truth.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t count = 0;
  for (const auto& rec : records) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), rec.t);
    const TimeIndex want = it == sorted.begin() ? 0 : *std::prev(it);
    const TimeIndex d = rec.lcp > want ? rec.lcp - want : want - rec.lcp;
    if (d > s) ++count;
  }
  return count;
}

double geometric_median(std::span<const double> grid) {
  if (grid.empty()) throw InputError("empty grid");
  std::vector<double> v(grid.begin(), grid.end());
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  return std::sqrt(v[m - 1] * v[m]);
}

Lambda1Selection select_lambda1(const TuneGrid& grid, double lambda2_provisional,
                                const PenaltyConfig& base, const SolverConfig& solver,
                                std::size_t threads) {
  grid.validate();
  Lambda1Selection out;
  out.lambda2_provisional = lambda2_provisional;
  bool found = false;
  double best = 0.0;
  for (double l1 : grid.lambda1_candidates) {
    const PenaltyConfig pc = with(base, l1, lambda2_provisional);
    std::vector<BicReport> reports;
    double sum = 0.0;
    for (const auto& s : grid.streams) {
      const StreamResult res = run_stream(s.samples, pc, solver, threads);
      BicReport r = bic_score(res.change_points, res.segments, s.samples);
      r.lambda1_0 = l1;
      sum += r.bic_value;
      reports.push_back(std::move(r));
    }
    const double mean = sum / static_cast<double>(grid.streams.size());
    out.scores.push_back({l1, mean});
    out.details.push_back(std::move(reports));
    if (std::isfinite(mean) && (!found || mean < best)) {
      best = mean;
      out.lambda1_0 = l1;
      found = true;
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg << "every lambda1 grid value produced a non-finite BIC:";
    for (const auto& g : out.scores) msg << ' ' << g.value << "->" << g.score;
    throw InputError(msg.str());
  }
  return out;
}

Lambda2Selection select_lambda2(const TuneGrid& grid, double lambda1_0, const PenaltyConfig& base,
                                const SolverConfig& solver, std::size_t threads) {
  grid.validate();
  Lambda2Selection out;
  bool found = false;
  double best = 0.0;
  for (double l2 : grid.lambda2_candidates) {
    const PenaltyConfig pc = with(base, lambda1_0, l2);
    std::size_t total = 0;
    for (const auto& s : grid.streams) {
      const StreamResult res = run_stream(s.samples, pc, solver, threads);
      total += lcp_disagreement(res.records, s.change_points, grid.s_bound);
    }
    const auto score = static_cast<double>(total);
    out.scores.push_back({l2, score});
    if (!found || score <= best) {
      best = score;
      out.lambda2 = l2;
      found = true;
    }
  }
  return out;
}

TuneResult tune(const TuneGrid& grid, const PenaltyConfig& base, const SolverConfig& solver,
                std::size_t threads) {
  grid.validate();
  TuneResult r;
  r.lambda1 = select_lambda1(grid, geometric_median(grid.lambda2_candidates), base, solver, threads);
  r.lambda2 = select_lambda2(grid, r.lambda1.lambda1_0, base, solver, threads);
  return r;
}

}  // namespace dssl
