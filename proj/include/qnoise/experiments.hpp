#pragma once

// Config-driven experiment runs behind the command-line tool. Each run
// validates its whole config first, then computes, and returns a JSON report,
// a flat CSV table and an exit code; nothing here touches the filesystem
// except write_outputs and the optional dataset file of the train run.
//
// Stream layout under the master seed S:
//   invariance circuits  (S', ...) with S' = derive_key(S, {1})
//   shrinkage pairs      (S, {2, point, pair}), MC trials under (S, {2, point, pair, 1})
//   table instances      (S, {3, instance}), quadruples (S, {4, index})
//   train replicate r    data (S, {5, r}), test (S, {6, r}), corruption (S, {7, r}), fit (S, {8, r})

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnoise/analysis.hpp"
#include "qnoise/classifier.hpp"
#include "qnoise/dataset_io.hpp"
#include "qnoise/errors.hpp"
#include "qnoise/noise.hpp"
#include "qnoise/parallel.hpp"
#include "qnoise/random.hpp"
#include "qnoise/rng.hpp"
#include "qnoise/training.hpp"
#include "qnoise/version.hpp"

namespace qnoise::experiments {

using json = nlohmann::ordered_json;

enum ExitCode : int { kPass = 0, kVerificationFailure = 1, kUsageError = 2, kInfeasible = 3 };

// ---------------------------------------------------------------------------
// Output plumbing

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != columns_.size()) throw size_error("csv row width does not match header");
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string cell(double v) { return format_real(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(std::uint64_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }
inline std::string cell(const char* v) { return v; }
inline std::string cell(const std::string& v) { return v; }

struct RunResult {
  json report;
  CsvTable sweep;
  std::string dataset;  // dataset.txt contents; empty when the run emits none
  int exit_code = kPass;
};

/// Writes report.json, sweep.csv and (when present) dataset.txt into `dir`.
inline void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&dir](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw error("cannot write " + (dir / name).string());
    f << text;
  };
  put("report.json", r.report.dump(2) + "\n");
  put("sweep.csv", r.sweep.str());
  if (!r.dataset.empty()) put("dataset.txt", r.dataset);
}

inline json header(const char* command, std::uint64_t seed, const json& config) {
  json h;
  h["tool"] = "qnoise";
  h["version"] = kVersion;
  h["command"] = command;
  h["seed"] = seed;
  h["config"] = config;
  return h;
}

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw config_error(what);
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Sorted-sample quantile by nearest rank.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted.size() - 1) + 0.5));
  return sorted[std::min(idx, sorted.size() - 1)];
}

inline json distribution(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  json d;
  d["count"] = v.size();
  d["min"] = finite_or_null(detail::quantile(v, 0.0));
  d["q01"] = finite_or_null(detail::quantile(v, 0.01));
  d["median"] = finite_or_null(detail::quantile(v, 0.5));
  d["q99"] = finite_or_null(detail::quantile(v, 0.99));
  d["max"] = finite_or_null(detail::quantile(v, 1.0));
  return d;
}

inline std::vector<double> random_angles(std::size_t count, CounterRng& rng) {
  std::vector<double> theta(count);
  for (auto& t : theta) t = (2.0 * rng.uniform() - 1.0) * kPi;
  return theta;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// verify-theorem1: readout invariance under noise on wires 2..n

struct Theorem1Config {
  int n_qubits = 4;
  int max_qubits = 0;  // 0: same as n_qubits
  int layers = 3;      // entangling layers drawn uniformly from 1..layers
  int circuits = 10;
  int draws = 100;
  bool negative_controls = true;
  double tolerance = 1e-12;
  double control_threshold = 1e-3;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const {
    detail::require(n_qubits >= 2 && n_qubits <= kMaxQubits, "n_qubits must be in [2, 20]");
    detail::require(max_qubits == 0 || (max_qubits >= n_qubits && max_qubits <= kMaxQubits),
                    "max_qubits must be 0 or in [n_qubits, 20]");
    detail::require(layers >= 1, "layers must be >= 1");
    detail::require(circuits >= 1, "circuits must be >= 1");
    detail::require(draws >= 1, "draws must be >= 1");
    detail::require(tolerance >= 0.0, "tolerance must be >= 0");
    detail::require(control_threshold >= 0.0, "control_threshold must be >= 0");
  }

  json to_json() const {
    return {{"n_qubits", n_qubits},   {"max_qubits", max_qubits == 0 ? n_qubits : max_qubits},
            {"layers", layers},       {"circuits", circuits},
            {"draws", draws},         {"negative_controls", negative_controls},
            {"tolerance", tolerance}, {"control_threshold", control_threshold},
            {"threads", threads}};
  }
};

inline RunResult run_verify_theorem1(const Theorem1Config& cfg) {
  cfg.validate();
  InvarianceSweep sweep;
  sweep.min_qubits = cfg.n_qubits;
  sweep.max_qubits = cfg.max_qubits == 0 ? cfg.n_qubits : cfg.max_qubits;
  sweep.min_layers = 1;
  sweep.max_layers = cfg.layers;
  sweep.circuits = cfg.circuits;
  sweep.draws = cfg.draws;
  sweep.negative_controls = cfg.negative_controls;
  const InvarianceReport inv = verify_readout_invariance(sweep, derive_key(cfg.seed, {1}), cfg.threads);

  RunResult out;
  out.sweep = CsvTable({"circuit", "n_qubits", "layers", "draw", "post_circuit", "encoder_noise", "control_coupling",
                        "control_entangled_w"});
  json circuits = json::array();
  for (const auto& row : inv.rows) {
    for (std::size_t d = 0; d < row.draws.size(); ++d) {
      const auto& dv = row.draws[d];
      out.sweep.add({cell(row.circuit_index), cell(row.n_qubits), cell(row.layers), cell(d), cell(dv.post_circuit),
                     cell(dv.encoder_noise), cell(dv.control_coupling), cell(dv.control_entangled_w)});
    }
    circuits.push_back({{"circuit", row.circuit_index},
                        {"n_qubits", row.n_qubits},
                        {"layers", row.layers},
                        {"post_circuit_max", row.post_circuit_max},
                        {"encoder_noise_max", row.encoder_noise_max},
                        {"identity_noise_deviation", row.identity_noise_deviation}});
  }

  const double max_dev = inv.max_positive();
  const bool pass = max_dev <= cfg.tolerance;
  out.report = header("verify-theorem1", cfg.seed, cfg.to_json());
  out.report["max_deviation"] = max_dev;
  out.report["pass"] = pass;
  out.report["circuits"] = circuits;
  if (cfg.negative_controls) {
    // Hypothesis-violating cases: a deviation here is the expected outcome and
    // does not affect the exit status.
    double coupling = 0.0, entangled_w = 0.0;
    for (const auto& r : inv.rows) {
      coupling = std::max(coupling, r.control_coupling_max);
      entangled_w = std::max(entangled_w, r.control_entangled_w_max);
    }
    out.report["negative_controls"] = json::array(
        {{{"case", "entangling noise touching wire 1 (CNOT 2->1 after the noise)"},
          {"expected_failure", true},
          {"max_deviation", coupling},
          {"violation_observed", coupling > cfg.control_threshold}},
         {{"case", "encoder-side noise with entangled W"},
          {"expected_failure", true},
          {"max_deviation", entangled_w},
          {"violation_observed", entangled_w > cfg.control_threshold}}});
  }
  out.exit_code = pass ? kPass : kVerificationFailure;
  return out;
}

// ---------------------------------------------------------------------------
// verify-theorem2: shrinkage interval over a (p, q, mu, tau) grid

struct Theorem2Config {
  std::vector<double> p_values = {0.0, 0.05, 0.1, 0.2, 0.3};
  std::vector<double> q_values = {0.0, 0.1, 0.2, 0.3};
  std::vector<double> mu_values = {-3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0};
  std::vector<double> tau_values = {0.0, 0.3, 1.0};
  int pairs = 20;
  int n_qubits = 3;
  std::uint64_t trials = 10000;  // Monte Carlo trials per checked pair
  int mc_pairs = 1;              // pairs per point that also get a Monte Carlo estimate
  double mc_sigma = 5.0;
  double containment_tolerance = 1e-10;
  double mu0_tolerance = 1e-12;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const {
    auto in_range = [](const std::vector<double>& v, double lo, double hi) {
      return !v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return x >= lo && x <= hi; });
    };
    detail::require(in_range(p_values, 0.0, 1.0 / 3.0), "p_values must be non-empty and within [0, 1/3]");
    detail::require(in_range(q_values, 0.0, 1.0 / 3.0), "q_values must be non-empty and within [0, 1/3]");
    detail::require(in_range(mu_values, -kPi, kPi), "mu_values must be non-empty and within [-pi, pi]");
    detail::require(in_range(tau_values, 0.0, std::numeric_limits<double>::max()),
                    "tau_values must be non-empty, finite and >= 0");
    detail::require(pairs >= 1, "pairs must be >= 1");
    detail::require(n_qubits >= 1 && n_qubits <= kMaxQubits, "n_qubits must be in [1, 20]");
    detail::require(mc_pairs >= 0 && mc_pairs <= pairs, "mc_pairs must be in [0, pairs]");
    detail::require(mc_pairs == 0 || trials >= 2, "trials must be >= 2 when mc_pairs > 0");
    detail::require(mc_sigma > 0.0, "mc_sigma must be > 0");
  }

  json to_json() const {
    return {{"p_values", p_values},
            {"q_values", q_values},
            {"mu_values", mu_values},
            {"tau_values", tau_values},
            {"pairs", pairs},
            {"n_qubits", n_qubits},
            {"trials", trials},
            {"mc_pairs", mc_pairs},
            {"mc_sigma", mc_sigma},
            {"containment_tolerance", containment_tolerance},
            {"mu0_tolerance", mu0_tolerance},
            {"threads", threads}};
  }
};

struct ShrinkageRow {
  std::size_t point = 0;
  int pair = 0;
  double p = 0, q = 0, mu = 0, tau = 0;
  double eta = 0, delta = 0;
  bool degenerate = false;
  double margin = 0, corrupted_exact = 0, slack = 0;
  std::optional<double> mu0_residual;
  std::string sign_check;  // pass | fail | not_applicable | skipped_eta_nonpositive | skipped_degenerate
  bool mc_run = false;
  McEstimate mc;
  bool mc_ok = true;
};

inline std::vector<ShrinkageRow> shrinkage_point(const Theorem2Config& cfg, std::size_t point, double p, double q,
                                                 double mu, double tau) {
  const Ansatz ansatz(cfg.n_qubits);
  const NoiseModel model{BitflipChannel(p), CoherentChannel(mu, tau, q)};
  std::optional<ShrinkageConstants> k;
  try {
    k = shrinkage_constants(p, q, mu, tau);
  } catch (const degenerate_shrinkage_error&) {
  }
  std::vector<ShrinkageRow> rows;
  for (int pr = 0; pr < cfg.pairs; ++pr) {
    CounterRng rng(cfg.seed, {2, point, static_cast<std::uint64_t>(pr)});
    const auto theta = detail::random_angles(ansatz.parameter_count(), rng);
    const StateVector state = random_state(cfg.n_qubits, rng);
    ShrinkageRow r;
    r.point = point;
    r.pair = pr;
    r.p = p, r.q = q, r.mu = mu, r.tau = tau;
    r.margin = margin(ansatz, theta, state).value;
    r.corrupted_exact = corrupted_margin_exact(ansatz, theta, state, model).exact;
    if (k) {
      r.eta = k->eta;
      r.delta = k->delta;
      r.slack = containment_slack(r.corrupted_exact, r.margin, *k);
      if (!(k->eta > 0.0))
        r.sign_check = "skipped_eta_nonpositive";
      else if (std::abs(r.margin) > k->delta)
        r.sign_check = (r.corrupted_exact * r.margin > 0.0) ? "pass" : "fail";
      else
        r.sign_check = "not_applicable";
      if (mu == 0.0) r.mu0_residual = std::abs(r.corrupted_exact - k->eta * r.margin);
    } else {
      r.degenerate = true;
      r.eta = 0.0;
      r.delta = std::numeric_limits<double>::quiet_NaN();
      r.slack = std::numeric_limits<double>::quiet_NaN();
      r.sign_check = "skipped_degenerate";
    }
    if (pr < cfg.mc_pairs) {
      r.mc_run = true;
      r.mc = corrupted_margin_mc(ansatz, theta, state, model, cfg.trials,
                                 derive_key(cfg.seed, {2, point, static_cast<std::uint64_t>(pr), 1}));
      // Additive floor covers noiseless points where every trial is identical.
      r.mc_ok = std::abs(r.mc.estimate - r.corrupted_exact) <= cfg.mc_sigma * r.mc.standard_error + 1e-12;
    }
    rows.push_back(r);
  }
  return rows;
}

inline RunResult run_verify_theorem2(const Theorem2Config& cfg) {
  cfg.validate();
  struct Point {
    double p, q, mu, tau;
  };
  std::vector<Point> grid;
  for (double p : cfg.p_values)
    for (double q : cfg.q_values)
      for (double mu : cfg.mu_values)
        for (double tau : cfg.tau_values) grid.push_back({p, q, mu, tau});

  std::vector<std::vector<ShrinkageRow>> per_point(grid.size());
  parallel_for(grid.size(), cfg.threads, [&](std::size_t g) {
    per_point[g] = shrinkage_point(cfg, g, grid[g].p, grid[g].q, grid[g].mu, grid[g].tau);
  });

  RunResult out;
  out.sweep = CsvTable({"point", "p", "q", "mu", "tau", "pair", "eta", "delta", "margin", "corrupted_exact", "slack",
                        "contained", "mu0_residual", "sign_check", "mc_estimate", "mc_stderr", "mc_ok"});
  std::size_t rows = 0, containment_failures = 0, degenerate = 0, sign_checked = 0, sign_violations = 0,
              sign_skipped = 0, mc_checked = 0, mc_failures = 0, mu0_failures = 0, flipped_points = 0;
  double min_slack = std::numeric_limits<double>::infinity(), max_mu0 = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!per_point[g].empty() && per_point[g].front().eta < 0.0) ++flipped_points;
    for (const auto& r : per_point[g]) {
      ++rows;
      const bool contained = !r.degenerate && r.slack >= -cfg.containment_tolerance;
      if (r.degenerate)
        ++degenerate;
      else {
        min_slack = std::min(min_slack, r.slack);
        if (!contained) ++containment_failures;
      }
      if (r.mu0_residual) {
        max_mu0 = std::max(max_mu0, *r.mu0_residual);
        if (!(*r.mu0_residual <= cfg.mu0_tolerance)) ++mu0_failures;
      }
      if (r.sign_check == "pass" || r.sign_check == "fail") ++sign_checked;
      if (r.sign_check == "fail") ++sign_violations;
      if (r.sign_check.starts_with("skipped")) ++sign_skipped;
      if (r.mc_run) {
        ++mc_checked;
        if (!r.mc_ok) ++mc_failures;
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.sweep.add({cell(r.point), cell(r.p), cell(r.q), cell(r.mu), cell(r.tau), cell(r.pair), cell(r.eta),
                     cell(r.delta), cell(r.margin), cell(r.corrupted_exact), cell(r.slack),
                     cell(r.degenerate ? "skipped" : contained ? "true" : "false"),
                     r.mu0_residual ? cell(*r.mu0_residual) : cell(""), cell(r.sign_check),
                     cell(r.mc_run ? r.mc.estimate : nan), cell(r.mc_run ? r.mc.standard_error : nan),
                     cell(r.mc_run ? cell(r.mc_ok) : std::string())});
    }
  }

  const bool pass = containment_failures == 0 && mu0_failures == 0 && sign_violations == 0 && mc_failures == 0;
  out.report = header("verify-theorem2", cfg.seed, cfg.to_json());
  out.report["grid_points"] = grid.size();
  out.report["rows"] = rows;
  out.report["containment"] = {{"min_slack", detail::finite_or_null(min_slack)},
                               {"failures", containment_failures},
                               {"degenerate_rows", degenerate},
                               {"degenerate_reason", "eta = 0: offset bound undefined"}};
  out.report["mu_zero"] = {{"max_residual", max_mu0}, {"failures", mu0_failures}};
  out.report["sign_preservation"] = {
      {"checked", sign_checked},
      {"violations", sign_violations},
      {"skipped", sign_skipped},
      {"skip_reason", "eta <= 0 (p > 1/4 or strong coherent noise): the shrinkage factor flips sign"},
      {"points_with_sign_flip", flipped_points}};
  out.report["monte_carlo"] = {{"checked", mc_checked}, {"failures", mc_failures}, {"sigma", cfg.mc_sigma}};
  out.report["pass"] = pass;
  out.exit_code = pass ? kPass : kVerificationFailure;
  return out;
}

// ---------------------------------------------------------------------------
// verify-lemmas: conditional margin table identities and the quadruple bound

struct LemmasConfig {
  int instances = 10000;
  int quadruples = 100000;
  int n_qubits = 3;  // instance register size drawn uniformly from 1..n_qubits
  std::optional<double> mu;   // fixed mu; unset draws U(-pi, pi) per instance
  std::optional<double> tau;  // fixed tau; unset draws U(0, 2) per instance
  bool axis_symmetry = true;  // include the m01 = m02 identity in the verdict
  double tolerance = 1e-10;
  double quadruple_tolerance = 1e-12;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const {
    detail::require(instances >= 1, "instances must be >= 1");
    detail::require(quadruples >= 1, "quadruples must be >= 1");
    detail::require(n_qubits >= 1 && n_qubits <= kMaxQubits, "n_qubits must be in [1, 20]");
    detail::require(!mu || std::abs(*mu) <= kPi, "mu must be within [-pi, pi]");
    detail::require(!tau || (*tau >= 0.0 && std::isfinite(*tau)), "tau must be finite and >= 0");
    detail::require(tolerance >= 0.0 && quadruple_tolerance >= 0.0, "tolerances must be >= 0");
  }

  json to_json() const {
    return {{"instances", instances},
            {"quadruples", quadruples},
            {"n_qubits", n_qubits},
            {"mu", mu ? json(*mu) : json("random")},
            {"tau", tau ? json(*tau) : json("random")},
            {"axis_symmetry", axis_symmetry},
            {"tolerance", tolerance},
            {"quadruple_tolerance", quadruple_tolerance},
            {"threads", threads}};
  }
};

/// Zero-sum quadruple with every entry in [-1/2, 1/2], keyed by (seed, 4, index).
inline std::array<double, 4> random_zero_sum_quadruple(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, {4, index});
  for (;;) {
    const double a = rng.uniform() - 0.5, b = rng.uniform() - 0.5, c = rng.uniform() - 0.5;
    const double d = -((a + b) + c);
    if (std::abs(d) <= 0.5) return {a, b, c, d};
  }
}

inline RunResult run_verify_lemmas(const LemmasConfig& cfg) {
  cfg.validate();
  struct Instance {
    int n;
    double mu, tau;
    TableCheck check;
  };
  std::vector<Instance> inst(static_cast<std::size_t>(cfg.instances));
  parallel_for(inst.size(), cfg.threads, [&](std::size_t i) {
    CounterRng rng(cfg.seed, {3, i});
    Instance& r = inst[i];
    r.n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.n_qubits));
    r.mu = cfg.mu ? *cfg.mu : (2.0 * rng.uniform() - 1.0) * kPi;
    r.tau = cfg.tau ? *cfg.tau : 2.0 * rng.uniform();
    const Ansatz ansatz(r.n);
    const auto theta = detail::random_angles(ansatz.parameter_count(), rng);
    const StateVector state = random_state(r.n, rng);
    r.check = check_table(conditional_margin_table(ansatz, theta, state, r.mu, r.tau), r.mu, r.tau);
  });

  RunResult out;
  out.sweep = CsvTable({"instance", "n_qubits", "mu", "tau", "max_column_sum", "z_axis_residual", "x_y_axis_residual",
                        "m01_bound_excess", "m02_bound_excess", "m01_formula_residual", "m02_formula_residual",
                        "overlap_bound_excess"});
  struct Identity {
    const char* name;
    double TableCheck::*field;
    bool in_verdict;
  };
  const std::vector<Identity> identities = {
      {"column_zero_sum", &TableCheck::max_column_sum, true},
      {"m00_m03_equal_margin", &TableCheck::z_axis_residual, true},
      {"m01_equals_m02", &TableCheck::x_y_axis_residual, cfg.axis_symmetry},
      {"m01_bound", &TableCheck::m01_bound_excess, true},
      {"m02_bound", &TableCheck::m02_bound_excess, true},
      {"m01_formula", &TableCheck::m01_formula_residual, true},
      {"m02_formula", &TableCheck::m02_formula_residual, true},
      {"overlap_half_bound", &TableCheck::overlap_bound_excess, true}};
  std::vector<double> worst(identities.size(), -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> failures(identities.size(), 0);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto& r = inst[i];
    const auto& c = r.check;
    out.sweep.add({cell(i), cell(r.n), cell(r.mu), cell(r.tau), cell(c.max_column_sum), cell(c.z_axis_residual),
                   cell(c.x_y_axis_residual), cell(c.m01_bound_excess), cell(c.m02_bound_excess),
                   cell(c.m01_formula_residual), cell(c.m02_formula_residual), cell(c.overlap_bound_excess)});
    for (std::size_t k = 0; k < identities.size(); ++k) {
      const double v = c.*(identities[k].field);
      worst[k] = std::max(worst[k], v);
      if (!(v <= cfg.tolerance)) ++failures[k];
    }
  }
  bool pass = true;
  json table = json::array();
  for (std::size_t k = 0; k < identities.size(); ++k) {
    const bool ok = failures[k] == 0;
    if (identities[k].in_verdict && !ok) pass = false;
    table.push_back({{"identity", identities[k].name},
                     {"max_residual", worst[k]},
                     {"failures", failures[k]},
                     {"holds", ok},
                     {"in_verdict", identities[k].in_verdict}});
  }

  json quad = json::object();
  std::vector<std::vector<double>> slacks(2, std::vector<double>(static_cast<std::size_t>(cfg.quadruples)));
  parallel_for(static_cast<std::size_t>(cfg.quadruples), cfg.threads, [&](std::size_t i) {
    const auto v = random_zero_sum_quadruple(cfg.seed, i);
    slacks[0][i] = quadruple_bound(v[0], v[1], v[2], v[3], LossKind::hinge).slack();
    slacks[1][i] = quadruple_bound(v[0], v[1], v[2], v[3], LossKind::logistic).slack();
  });
  for (int l = 0; l < 2; ++l) {
    const auto kind = l == 0 ? LossKind::hinge : LossKind::logistic;
    const auto fails = static_cast<std::size_t>(std::count_if(
        slacks[l].begin(), slacks[l].end(), [&](double s) { return !(s >= -cfg.quadruple_tolerance); }));
    if (fails) pass = false;
    json d = detail::distribution(slacks[l]);
    d["failures"] = fails;
    quad[to_string(kind)] = d;
  }

  out.report = header("verify-lemmas", cfg.seed, cfg.to_json());
  out.report["table_identities"] = table;
  out.report["quadruple_slack"] = quad;
  out.report["pass"] = pass;
  out.exit_code = pass ? kPass : kVerificationFailure;
  return out;
}

// ---------------------------------------------------------------------------
// train: clean, noisy and regularized fits on small datasets

struct TrainConfig {
  int n_qubits = 2;
  int n_train = 20;
  int n_test = 1000;
  double margin_gap = 0.1;
  bool entangle = true;
  double p = 0.1;
  std::string loss = "logistic";
  double step_size = 4.0;
  int iterations = 1000;
  int restarts = 2;
  double init_scale = kPi;
  std::string gradient = "parameter_shift";
  bool regularized = true;
  int replicates = 20;
  int log_every = 100;
  double identity_tolerance = 1e-10;
  std::string dataset;  // optional input file; replaces generated training data
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const {
    detail::require(n_qubits >= 1 && n_qubits <= kMaxQubits, "n_qubits must be in [1, 20]");
    detail::require(n_train >= 1, "n_train must be >= 1");
    detail::require(n_test >= 0, "n_test must be >= 0");
    detail::require(margin_gap >= 0.0 && margin_gap < 0.5, "margin_gap must be in [0, 0.5)");
    detail::require(!entangle || n_qubits >= 2 || !dataset.empty(), "entangle needs n_qubits >= 2");
    detail::require(p >= 0.0 && p <= 1.0 / 3.0, "p must be within [0, 1/3]");
    detail::require(loss == "hinge" || loss == "logistic", "loss must be hinge or logistic");
    detail::require(step_size > 0.0, "step_size must be > 0");
    detail::require(iterations >= 1, "iterations must be >= 1");
    detail::require(restarts >= 1, "restarts must be >= 1");
    detail::require(init_scale >= 0.0, "init_scale must be >= 0");
    detail::require(gradient == "parameter_shift" || gradient == "finite_difference",
                    "gradient must be parameter_shift or finite_difference");
    detail::require(replicates >= 1, "replicates must be >= 1");
    detail::require(log_every >= 0, "log_every must be >= 0");
  }

  json to_json() const {
    return {{"n_qubits", n_qubits},     {"n_train", n_train},
            {"n_test", n_test},         {"margin_gap", margin_gap},
            {"entangle", entangle},     {"p", p},
            {"loss", loss},             {"step_size", step_size},
            {"iterations", iterations}, {"restarts", restarts},
            {"init_scale", init_scale}, {"gradient", gradient},
            {"regularized", regularized}, {"replicates", replicates},
            {"log_every", log_every},   {"identity_tolerance", identity_tolerance},
            {"dataset", dataset},       {"threads", threads}};
  }
};

struct FitSummary {
  std::string name;
  FitResult fit;
  double train_risk = 0;            // clean R_N
  double train_corrupted_risk = 0;  // R~_N on the corrupted draw
  double train_accuracy = 0;
  double train_mean_abs_margin = 0;
  double test_risk = std::numeric_limits<double>::quiet_NaN();
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
  double test_mean_abs_margin = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> identity_residual_max;  // over logged thetas; unset when p >= 1/4
};

inline RunResult run_train(const TrainConfig& cfg) {
  cfg.validate();
  const LossKind kind = parse_loss(cfg.loss);
  const bool has_lambda = cfg.p < 0.25;

  std::optional<QuantumDataset> file_data;
  if (!cfg.dataset.empty()) {
    std::ifstream f(cfg.dataset);
    if (!f) throw config_error("cannot open dataset file '" + cfg.dataset + "'");
    try {
      file_data = read_dataset(f);
    } catch (const error& e) {
      throw config_error(e.what());
    }
    if (file_data->empty()) throw config_error("dataset file '" + cfg.dataset + "' has no items");
  }
  const int n = file_data ? file_data->n_qubits() : cfg.n_qubits;
  const Ansatz ansatz(n);

  // Data generation is sequential and completes before any fitting so an
  // infeasible spec fails fast.
  struct Replicate {
    QuantumDataset train, test, corrupted;
    std::vector<double> planted;
    std::vector<FitSummary> fits;
  };
  std::vector<Replicate> reps(static_cast<std::size_t>(cfg.replicates));
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (file_data) {
      reps[r].train = *file_data;
    } else {
      DatasetSpec spec{cfg.n_qubits, static_cast<std::size_t>(cfg.n_train), {}, cfg.margin_gap, cfg.entangle};
      auto gen = generate_dataset(spec, derive_key(cfg.seed, {5, r}));
      reps[r].train = std::move(gen.data);
      reps[r].planted = gen.planted_theta;
      if (cfg.n_test > 0) {
        spec.n_items = static_cast<std::size_t>(cfg.n_test);
        spec.planted_theta = reps[r].planted;
        reps[r].test = generate_dataset(spec, derive_key(cfg.seed, {6, r})).data;
      }
    }
    reps[r].corrupted = corrupt_dataset(reps[r].train, BitflipChannel(cfg.p), derive_key(cfg.seed, {7, r}));
  }

  FitConfig fc;
  fc.step_size = cfg.step_size;
  fc.iterations = cfg.iterations;
  fc.restarts = cfg.restarts;
  fc.init_scale = cfg.init_scale;
  fc.log_every = cfg.log_every;
  fc.gradient = cfg.gradient == "parameter_shift" ? GradientMethod::parameter_shift : GradientMethod::finite_difference;

  parallel_for(reps.size(), cfg.threads, [&](std::size_t r) {
    Replicate& rep = reps[r];
    FitConfig local = fc;
    local.seed = derive_key(cfg.seed, {8, r});
    auto summarize = [&](std::string name, const RiskObjective& obj) {
      FitSummary s;
      s.name = std::move(name);
      s.fit = fit(obj, local);
      const auto& th = s.fit.theta;
      s.train_risk = empirical_risk(ansatz, th, rep.train, kind);
      s.train_corrupted_risk = corrupted_empirical_risk(ansatz, th, rep.corrupted, kind);
      s.train_accuracy = accuracy(ansatz, th, rep.train);
      s.train_mean_abs_margin = mean_abs_margin(ansatz, th, rep.train);
      if (!rep.test.empty()) {
        s.test_risk = empirical_risk(ansatz, th, rep.test, kind);
        s.test_accuracy = accuracy(ansatz, th, rep.test);
        s.test_mean_abs_margin = mean_abs_margin(ansatz, th, rep.test);
      }
      if (has_lambda) {
        double worst = 0.0;
        auto probe = [&](const std::vector<double>& t) {
          worst = std::max(worst, expected_corrupted_risk(ansatz, t, rep.train, kind, cfg.p).identity_residual);
        };
        for (const auto& t : s.fit.logged_thetas) probe(t);
        probe(th);
        s.identity_residual_max = worst;
      }
      rep.fits.push_back(std::move(s));
    };
    summarize("clean", RiskObjective::empirical(ansatz, rep.train, kind));
    summarize("noisy", RiskObjective::empirical(ansatz, rep.corrupted, kind));
    if (cfg.regularized && has_lambda) summarize("regularized", RiskObjective::regularized(ansatz, rep.train, kind, cfg.p));
  });

  RunResult out;
  out.sweep = CsvTable({"replicate", "fit", "objective", "best_restart", "train_risk", "train_corrupted_risk",
                        "train_accuracy", "train_mean_abs_margin", "test_risk", "test_accuracy",
                        "test_mean_abs_margin", "identity_residual_max"});
  json replicates = json::array();
  double clean_margin = 0.0, noisy_margin = 0.0, worst_identity = 0.0;
  std::size_t noisy_below = 0;
  const double nrep = static_cast<double>(reps.size());
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& rep = reps[r];
    json jr;
    jr["replicate"] = r;
    jr["planted_theta"] = rep.planted;
    jr["corruption"] = rep.corrupted.corruption;
    json fits = json::object();
    for (const auto& s : rep.fits) {
      out.sweep.add({cell(r), cell(s.name), cell(s.fit.objective), cell(s.fit.best_restart), cell(s.train_risk),
                     cell(s.train_corrupted_risk), cell(s.train_accuracy), cell(s.train_mean_abs_margin),
                     cell(s.test_risk), cell(s.test_accuracy), cell(s.test_mean_abs_margin),
                     s.identity_residual_max ? cell(*s.identity_residual_max) : cell("")});
      json trace = json::array();
      const std::size_t stride = cfg.log_every > 0 ? static_cast<std::size_t>(cfg.log_every) : s.fit.trace.size();
      for (std::size_t i = 0; i < s.fit.trace.size(); i += std::max<std::size_t>(stride, 1))
        trace.push_back(detail::finite_or_null(s.fit.trace[i]));
      fits[s.name] = {{"theta", s.fit.theta},
                      {"objective", s.fit.objective},
                      {"best_restart", s.fit.best_restart},
                      {"restart_objectives", s.fit.restart_objectives},
                      {"objective_trace", trace},
                      {"logged_thetas", s.fit.logged_thetas},
                      {"train_risk", s.train_risk},
                      {"train_corrupted_risk", s.train_corrupted_risk},
                      {"train_mean_abs_margin", s.train_mean_abs_margin},
                      {"test_risk", detail::finite_or_null(s.test_risk)},
                      {"test_mean_abs_margin", detail::finite_or_null(s.test_mean_abs_margin)},
                      {"identity_residual_max", s.identity_residual_max ? json(*s.identity_residual_max) : json()}};
      if (s.identity_residual_max) worst_identity = std::max(worst_identity, *s.identity_residual_max);
    }
    jr["fits"] = fits;
    replicates.push_back(jr);
    const double c = rep.fits[0].train_mean_abs_margin, z = rep.fits[1].train_mean_abs_margin;
    clean_margin += c / nrep;
    noisy_margin += z / nrep;
    if (z < c) ++noisy_below;
  }

  const bool identity_ok = !has_lambda || worst_identity <= cfg.identity_tolerance;
  out.report = header("train", cfg.seed, cfg.to_json());
  out.report["summary"] = {
      {"clean_mean_abs_train_margin", clean_margin},
      {"noisy_mean_abs_train_margin", noisy_margin},
      {"noisy_below_clean", noisy_below},
      {"noisy_below_clean_fraction", static_cast<double>(noisy_below) / nrep},
      {"identity_residual_max", has_lambda ? json(worst_identity) : json()},
      {"identity_checked", has_lambda},
      {"identity_skip_reason", has_lambda ? json() : json("lambda = 4p/(1-4p) is undefined for p >= 1/4")},
      {"identity_ok", identity_ok}};
  out.report["replicates"] = replicates;
  out.report["pass"] = identity_ok;

  std::ostringstream ds;
  write_dataset(ds, reps.front().train);
  out.dataset = ds.str();
  out.exit_code = identity_ok ? kPass : kVerificationFailure;
  return out;
}

}  // namespace qnoise::experiments
