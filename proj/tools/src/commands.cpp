#include "commands.hpp"

#include "json_out.hpp"

#include <CLI11.hpp>

#include "dssl/csv.hpp"
#include "dssl/datagen.hpp"
#include "dssl/metrics.hpp"
#include "dssl/pelt.hpp"
#include "dssl/tuner.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace dssl::cli {
namespace {

struct ModelFlags {
  double lambda1 = 0.0028;
  double lambda2 = 2.2;
  double k_factor = 2.0 / 3.0;
  std::string lags = "5,10,15";
  std::size_t min_seg_len = 2;
  double tol = 1e-6;
  int max_iter = 1000;

  void attach(CLI::App* app) {
    app->add_option("--lambda1-0", lambda1, "sparsity rate; segment penalty is rate * length")->capture_default_str();
    app->add_option("--lambda2", lambda2, "per-segment penalty")->capture_default_str();
    app->add_option("--k-factor", k_factor, "pruning constant as a fraction of lambda2")->capture_default_str();
    app->add_option("--lags", lags, "comma-separated pruning horizons, or 'none'")->capture_default_str();
    app->add_option("--min-seg-len", min_seg_len, "shortest segment scored after a change")->capture_default_str();
    app->add_option("--tol", tol, "coordinate-descent tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter, "coordinate-descent sweep cap")->capture_default_str();
  }

  PenaltyConfig penalty() const;
  SolverConfig solver() const {
    SolverConfig s;
    s.tol = tol;
    s.max_iter = max_iter;
    s.validate();
    return s;
  }
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  if (text.empty() || text == "none") return out;
  const auto parsed = parse_numeric_row(text);
  if (!parsed) throw InputError(std::string("cannot parse ") + what + " list '" + text + "'");
  for (double v : *parsed)
    if (!std::isfinite(v)) throw InputError(std::string(what) + " values must be finite");
  return *parsed;
}

PenaltyConfig ModelFlags::penalty() const {
  PenaltyConfig pc;
  pc.lambda1_rate = lambda1;
  pc.lambda2 = lambda2;
  pc.k_factor = k_factor;
  pc.min_seg_len = min_seg_len;
  pc.lag_offsets.clear();
  for (double v : parse_list(lags, "lag")) {
    if (v < 1.0 || v != std::floor(v)) throw InputError("lags must be positive integers");
    pc.lag_offsets.push_back(static_cast<std::size_t>(v));
  }
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw InputError("lambda1-0 must be non-negative");
  pc.validate();
  return pc;
}

Json cps_json(std::span<const TimeIndex> cps) {
  Json a = Json::array();
  for (TimeIndex c : cps) a.push_back(c);
  return a;
}

Json truth_json(const SimulatedStream& s) {
  Json j;
  j["case"] = s.case_id;
  j["sigma"] = s.sigma;
  j["seed"] = s.seed;
  j["length"] = s.truth.length;
  j["p"] = s.samples.cols();
  j["change_points"] = cps_json(s.truth.change_points);
  j["gamma"] = s.truth.gamma();
  j["regime_of_segment"] = s.truth.regime_of_segment;
  j["subspace_labels"] = s.truth.subspace_labels;
  return j;
}

std::vector<TimeIndex> read_truth(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open truth file " + path);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::exception& e) {
    throw InputError("truth file " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("change_points") || !j["change_points"].is_array())
    throw InputError("truth file " + path + " has no change_points array");
  std::vector<TimeIndex> out;
  for (const auto& v : j["change_points"]) {
    if (!v.is_number_unsigned()) throw InputError("truth file " + path + ": change_points must be non-negative integers");
    out.push_back(v.get<TimeIndex>());
  }
  return out;
}

Matrix read_matrix(const std::string& path, std::istream& stdin_stream) {
  if (path == "-") return read_csv(stdin_stream);
  std::ifstream f(path);
  if (!f) throw InputError("cannot open input " + path);
  return read_csv(f);
}

// Returns `fallback` for "" or "-", otherwise opens the file.
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InputError("cannot open output " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

Json metrics_json(const MetricsReport& m, bool timing) {
  Json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  switch (m.empty_rule) {
    case EmptyListRule::None: j["empty_rule"] = nullptr; break;
    case EmptyListRule::NoEstimates: j["empty_rule"] = "no_estimates"; break;
    case EmptyListRule::NoTruth: j["empty_rule"] = "no_truth"; break;
    case EmptyListRule::Both: j["empty_rule"] = "both_empty"; break;
  }
  j["s_bound"] = m.s_bound;
  j["mean_delay"] = m.mean_delay;
  j["delay_ci"] = m.delay_ci;
  j["delays"] = m.delays;
  j["missed"] = m.missed;
  j["runtime_total"] = timing ? Json(m.runtime_total) : Json(nullptr);
  j["runtime_per_step"] = timing ? Json(m.runtime_per_step) : Json(nullptr);
  j["rho_to_truth"] = m.rho_to_truth;
  j["rho_from_truth"] = m.rho_from_truth;
  return j;
}

SimulatedStream simulate(int case_id, double sigma, std::uint64_t seed, std::size_t channels) {
  if (channels != 0) {
    if (case_id != 2) throw InputError("--channels applies to case 2 only");
    if (channels < 4 || channels % 2 != 0) throw InputError("--channels must be an even number >= 4");
    auto s = gen_case2_scaled(channels, sigma, seed);
    s.sigma = sigma;
    s.seed = seed;
    return s;
  }
  return simulate_case(case_id, sigma, seed);
}

// ---- simulate ----

struct SimulateArgs {
  int case_id = 1;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  std::string output = ".";
  std::size_t channels = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const SimulatedStream s = simulate(a.case_id, a.sigma, a.seed, a.channels);
  const std::filesystem::path dir(a.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + a.output);
  {
    std::ofstream f(dir / "data.csv");
    if (!f) throw InputError("cannot write " + (dir / "data.csv").string());
    write_csv(f, s.samples, true);
  }
  {
    std::ofstream f(dir / "truth.json");
    if (!f) throw InputError("cannot write " + (dir / "truth.json").string());
    f << dump(truth_json(s)) << '\n';
  }
  Json r;
  r["data"] = (dir / "data.csv").string();
  r["truth"] = (dir / "truth.json").string();
  r["rows"] = s.samples.rows();
  r["cols"] = s.samples.cols();
  out << dump(r) << '\n';
  return kOk;
}

// ---- detect ----

struct DetectArgs {
  std::string input;
  std::string output;
  std::string truth;
  std::string trace;
  std::size_t s_bound = 5;
  bool timing = false;
  ModelFlags model;
};

int cmd_detect(const DetectArgs& a, std::istream& in, std::ostream& out) {
  const PenaltyConfig penalty = a.model.penalty();
  const SolverConfig solver = a.model.solver();
  std::optional<std::vector<TimeIndex>> truth;
  if (!a.truth.empty()) truth = read_truth(a.truth);

  std::ifstream file;
  std::istream* src = &in;
  if (a.input != "-") {
    file.open(a.input);
    if (!file) throw InputError("cannot open input " + a.input);
    src = &file;
  }
  OutputTarget target(a.output, out);
  std::ostream& o = target.get();

  CsvRowReader reader(*src);
  std::optional<OnlineDetector> det;
  std::vector<DetectionRecord> records;
  std::vector<double> row;
  while (reader.next(row)) {
    if (!det) det.emplace(static_cast<Eigen::Index>(row.size()), penalty, solver);
    DetectionRecord rec;
    try {
      rec = det->push(row);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(reader.line_number()) + ": " + e.what());
    }
    Json line;
    line["t"] = rec.t;
    line["lcp"] = rec.lcp;
    line["F"] = rec.objective;
    line["candidates"] = rec.n_candidates;
    line["cps"] = cps_json(rec.change_points);
    line["step_ms"] = a.timing ? Json(rec.step_seconds * 1e3) : Json(nullptr);
    o << dump(line) << '\n';
    o.flush();
    rec.change_points.clear();
    rec.change_points.shrink_to_fit();
    records.push_back(std::move(rec));
  }

  Json summary;
  const TimeIndex n = det ? det->size() : 0;
  const std::vector<TimeIndex> cps = det ? det->change_points() : std::vector<TimeIndex>{};
  summary["n"] = n;
  summary["p"] = det ? det->store().dim() : 0;
  summary["cps"] = cps_json(cps);
  summary["F"] = det ? Json(det->objective().back()) : Json(nullptr);
  Json segs = Json::array();
  if (det) {
    for (const auto& seg : det->segment_coefficients()) {
      const auto p = static_cast<double>(seg.dim());
      const std::size_t nz = seg.nonzeros();
      Json s;
      s["start"] = seg.start;
      s["end"] = seg.end;
      s["nonzeros"] = nz;
      s["density"] = p > 1 ? static_cast<double>(nz) / (p * (p - 1)) : 0.0;
      segs.push_back(s);
    }
  }
  summary["segments"] = segs;
  int nonconverged = 0;
  double total = 0.0;
  for (const auto& r : records) {
    nonconverged += r.nonconverged;
    total += r.step_seconds;
  }
  summary["nonconverged"] = nonconverged;
  summary["total_ms"] = a.timing ? Json(total * 1e3) : Json(nullptr);
  if (truth && n > 0) summary["metrics"] = metrics_json(evaluate_run(records, cps, *truth, n, a.s_bound), a.timing);
  Json wrap;
  wrap["summary"] = summary;
  o << dump(wrap) << '\n';
  o.flush();

  if (!a.trace.empty()) {
    std::ofstream f(a.trace);
    if (!f) throw InputError("cannot open trace output " + a.trace);
    write_trace_tsv(f, records);
  }
  return kOk;
}

// ---- tune ----

struct TuneArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> truths;
  int case_id = 1;
  double sigma = 0.05;
  std::uint64_t seed = 1000;
  std::size_t reps = 3;
  std::size_t channels = 0;
  std::string lambda1_grid = "0.0007,0.0014,0.0028,0.0056,0.0112";
  std::string lambda2_grid = "0.5,1,2.2,4,8";
  std::size_t s_bound = 5;
  std::string output;
  ModelFlags model;
};

int cmd_tune(const TuneArgs& a, std::istream& in, std::ostream& out) {
  TuneGrid grid;
  grid.lambda1_candidates = parse_list(a.lambda1_grid, "lambda1 grid");
  grid.lambda2_candidates = parse_list(a.lambda2_grid, "lambda2 grid");
  grid.s_bound = a.s_bound;
  if (!a.inputs.empty()) {
    if (a.truths.size() != a.inputs.size())
      throw InputError("each --input needs a matching --truth file");
    for (std::size_t i = 0; i < a.inputs.size(); ++i) {
      auto cps = read_truth(a.truths[i]);
      grid.streams.push_back({read_matrix(a.inputs[i], in), std::move(cps)});
    }
  } else {
    if (a.reps == 0) throw InputError("--reps must be positive");
    for (std::size_t r = 0; r < a.reps; ++r) {
      auto s = simulate(a.case_id, a.sigma, a.seed + r, a.channels);
      grid.streams.push_back({std::move(s.samples), s.truth.change_points});
    }
  }
  const PenaltyConfig base = a.model.penalty();
  const TuneResult res = tune(grid, base, a.model.solver());

  Json j;
  j["lambda1_0"] = res.lambda1.lambda1_0;
  j["lambda2"] = res.lambda2.lambda2;
  j["lambda2_provisional"] = res.lambda1.lambda2_provisional;
  j["streams"] = grid.streams.size();
  j["s_bound"] = grid.s_bound;
  Json l1 = Json::array();
  for (std::size_t g = 0; g < res.lambda1.scores.size(); ++g) {
    Json e;
    e["lambda1_0"] = res.lambda1.scores[g].value;
    e["bic"] = res.lambda1.scores[g].score;
    Json per = Json::array();
    for (const auto& b : res.lambda1.details[g]) {
      Json d;
      d["bic"] = b.bic_value;
      d["df_per_segment"] = b.df_per_segment;
      d["seg_lengths"] = b.seg_lengths;
      d["clamped"] = b.clamped;
      per.push_back(d);
    }
    e["per_stream"] = per;
    l1.push_back(e);
  }
  j["lambda1_scores"] = l1;
  Json l2 = Json::array();
  for (const auto& g : res.lambda2.scores) {
    Json e;
    e["lambda2"] = g.value;
    e["disagreement"] = static_cast<std::size_t>(g.score);
    l2.push_back(e);
  }
  j["lambda2_scores"] = l2;

  OutputTarget target(a.output, out);
  target.get() << dump(j) << '\n';
  return kOk;
}

// ---- bench ----

struct BenchArgs {
  std::string input;
  int case_id = 1;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  std::size_t channels = 0;
  std::string output;
  bool timing = false;
  ModelFlags model;
};

Json run_json(const StreamResult& r, bool timing) {
  Json j;
  j["cps"] = cps_json(r.change_points);
  j["F"] = r.objective.back();
  std::size_t evals = 0;
  double total = 0.0;
  Json cands = Json::array();
  Json steps = Json::array();
  for (const auto& rec : r.records) {
    evals += rec.n_scored;
    total += rec.step_seconds;
    cands.push_back(rec.n_candidates);
    steps.push_back(rec.step_seconds * 1e3);
  }
  j["cost_evaluations"] = evals;
  j["candidates"] = cands;
  j["step_ms"] = timing ? steps : Json(nullptr);
  j["total_ms"] = timing ? Json(total * 1e3) : Json(nullptr);
  return j;
}

double total_seconds(const StreamResult& r) {
  double t = 0.0;
  for (const auto& rec : r.records) t += rec.step_seconds;
  return t;
}

int cmd_bench(const BenchArgs& a, std::istream& in, std::ostream& out) {
  const PenaltyConfig penalty = a.model.penalty();
  const SolverConfig solver = a.model.solver();
  const Matrix samples = !a.input.empty() ? read_matrix(a.input, in)
                                          : simulate(a.case_id, a.sigma, a.seed, a.channels).samples;
  if (samples.rows() == 0) throw InputError("bench input has no rows");

  const StreamResult pelt = run_stream(samples, penalty, solver);
  const StreamResult op = run_op_reference(samples, penalty, solver);

  const double fp = pelt.objective.back();
  const double fo = op.objective.back();
  const double gap = std::abs(fp - fo) / std::max(1.0, std::abs(fo));

  Json j;
  j["n"] = samples.rows();
  j["p"] = samples.cols();
  j["pelt"] = run_json(pelt, a.timing);
  j["op"] = run_json(op, a.timing);
  j["equal_objective"] = gap <= 1e-8;
  j["equal_segmentation"] = pelt.change_points == op.change_points;
  j["relative_gap"] = gap;
  const auto work = [](const StreamResult& r) {
    std::size_t e = 0;
    for (const auto& rec : r.records) e += rec.n_scored;
    return static_cast<double>(e);
  };
  j["work_ratio"] = work(pelt) / work(op);
  j["time_ratio"] = a.timing ? Json(total_seconds(pelt) / total_seconds(op)) : Json(nullptr);

  OutputTarget target(a.output, out);
  target.get() << dump(j) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online structural change-point detection in high-dimensional streams", "dssl"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "write a simulated stream and its ground truth");
  s->add_option("--case", sim.case_id, "scenario 1, 2 or 3")->capture_default_str();
  s->add_option("--sigma", sim.sigma, "noise scale")->capture_default_str();
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--output", sim.output, "output directory")->capture_default_str();
  s->add_option("--channels", sim.channels, "channel count override for case 2");

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "run online detection over a CSV stream");
  d->add_option("--input", det.input, "CSV path, or - for stdin")->required();
  d->add_option("--output", det.output, "JSONL path (default stdout)");
  d->add_option("--truth", det.truth, "truth.json for metrics in the summary");
  d->add_option("--trace", det.trace, "write a t/lcp/F/candidates TSV here");
  d->add_option("--s-bound", det.s_bound, "matching tolerance for metrics")->capture_default_str();
  d->add_flag("--timing", det.timing, "record wall-clock step times");
  det.model.attach(d);

  TuneArgs tn;
  auto* t = app.add_subcommand("tune", "select lambda1-0 by BIC, then lambda2 by lcp agreement");
  t->add_option("--input", tn.inputs, "labeled CSV streams (repeatable)");
  t->add_option("--truth", tn.truths, "truth.json per input, in the same order");
  t->add_option("--case", tn.case_id, "simulate streams from this scenario when no input is given")->capture_default_str();
  t->add_option("--sigma", tn.sigma)->capture_default_str();
  t->add_option("--seed", tn.seed, "seed of the first simulated stream")->capture_default_str();
  t->add_option("--reps", tn.reps, "number of simulated streams")->capture_default_str();
  t->add_option("--channels", tn.channels, "channel count override for case 2");
  t->add_option("--lambda1-grid", tn.lambda1_grid)->capture_default_str();
  t->add_option("--lambda2-grid", tn.lambda2_grid)->capture_default_str();
  t->add_option("--s-bound", tn.s_bound)->capture_default_str();
  t->add_option("--output", tn.output, "report path (default stdout)");
  tn.model.attach(t);

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "compare pruned detection against the exhaustive recursion");
  b->add_option("--input", bn.input, "CSV path, or - for stdin");
  b->add_option("--case", bn.case_id)->capture_default_str();
  b->add_option("--sigma", bn.sigma)->capture_default_str();
  b->add_option("--seed", bn.seed)->capture_default_str();
  b->add_option("--channels", bn.channels, "channel count override for case 2");
  b->add_option("--output", bn.output, "report path (default stdout)");
  b->add_flag("--timing", bn.timing, "record wall-clock times");
  bn.model.attach(b);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*s) return cmd_simulate(sim, out);
    if (*d) return cmd_detect(det, in, out);
    if (*t) return cmd_tune(tn, in, out);
    if (*b) return cmd_bench(bn, in, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInputError;
}

}  // namespace dssl::cli
