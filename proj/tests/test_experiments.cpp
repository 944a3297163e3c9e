#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qnoise/experiments.hpp"

using namespace qnoise;
using namespace qnoise::experiments;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t column(const CsvTable& t, const std::string& name) {
  const auto& c = t.columns();
  return static_cast<std::size_t>(std::find(c.begin(), c.end(), name) - c.begin());
}

Theorem2Config small_grid() {
  Theorem2Config c;
  c.p_values = {0.0, 0.1, 0.3};
  c.q_values = {0.0, 0.3};
  c.mu_values = {-3.0, 0.0, 1.0};
  c.tau_values = {0.0, 0.5};
  c.pairs = 4;
  c.trials = 2000;
  return c;
}

TrainConfig small_train() {
  TrainConfig c;
  c.n_train = 8;
  c.n_test = 50;
  c.iterations = 40;
  c.replicates = 2;
  c.log_every = 10;
  return c;
}

}  // namespace

TEST(Csv, Layout) {
  CsvTable t({"a", "b"});
  t.add({cell(1), cell(0.1)});
  t.add({cell(true), cell("x")});
  EXPECT_EQ(t.str(), "a,b\n1,0.10000000000000001\ntrue,x\n");
  EXPECT_THROW(t.add({"1"}), size_error);
}

TEST(Header, CarriesProvenance) {
  Theorem1Config cfg;
  cfg.circuits = 2;
  cfg.draws = 3;
  cfg.seed = 77;
  const auto r = run_verify_theorem1(cfg);
  EXPECT_EQ(r.report["tool"], "qnoise");
  EXPECT_EQ(r.report["version"], kVersion);
  EXPECT_EQ(r.report["command"], "verify-theorem1");
  EXPECT_EQ(r.report["seed"], 77u);
  EXPECT_EQ(r.report["config"]["draws"], 3);
}

TEST(Validation, RejectsBadConfigs) {
  Theorem1Config t1;
  t1.n_qubits = 1;
  EXPECT_THROW(run_verify_theorem1(t1), config_error);
  Theorem2Config t2;
  t2.p_values = {0.4};
  EXPECT_THROW(run_verify_theorem2(t2), config_error);
  t2 = Theorem2Config{};
  t2.mc_pairs = 30;
  EXPECT_THROW(run_verify_theorem2(t2), config_error);
  LemmasConfig lm;
  lm.tau = -1.0;
  EXPECT_THROW(run_verify_lemmas(lm), config_error);
  TrainConfig tr;
  tr.loss = "square";
  EXPECT_THROW(run_train(tr), config_error);
  tr = TrainConfig{};
  tr.margin_gap = 0.5;
  EXPECT_THROW(run_train(tr), config_error);
  tr = TrainConfig{};
  tr.dataset = "/nonexistent/data.txt";
  EXPECT_THROW(run_train(tr), config_error);
}

TEST(Theorem1, PassesAndFlagsControls) {
  Theorem1Config cfg;
  cfg.max_qubits = 5;
  cfg.circuits = 6;
  cfg.draws = 10;
  const auto r = run_verify_theorem1(cfg);
  EXPECT_EQ(r.exit_code, kPass);
  EXPECT_LE(r.report["max_deviation"].get<double>(), 1e-12);
  EXPECT_EQ(r.sweep.rows().size(), 60u);
  for (const auto& c : r.report["negative_controls"]) EXPECT_TRUE(c["violation_observed"].get<bool>());
}

TEST(Theorem1, CsvIsThreadIndependent) {
  Theorem1Config cfg;
  cfg.circuits = 5;
  cfg.draws = 8;
  const auto a = run_verify_theorem1(cfg);
  cfg.threads = 3;
  const auto b = run_verify_theorem1(cfg);
  EXPECT_EQ(a.sweep.str(), b.sweep.str());
}

TEST(Theorem2, SmallGrid) {
  const auto cfg = small_grid();
  const auto r = run_verify_theorem2(cfg);
  EXPECT_EQ(r.exit_code, kPass);
  EXPECT_EQ(r.report["grid_points"], 36u);
  EXPECT_EQ(r.report["rows"], 144u);
  EXPECT_EQ(r.report["containment"]["failures"], 0u);
  EXPECT_EQ(r.report["monte_carlo"]["checked"], 36u);
  const auto& t = r.sweep;
  const auto mu = column(t, "mu"), p = column(t, "p"), q = column(t, "q"), res = column(t, "mu0_residual"),
             sign = column(t, "sign_check");
  for (const auto& row : t.rows()) {
    if (row[mu] == "0") {
      ASSERT_FALSE(row[res].empty());
      EXPECT_LE(std::stod(row[res]), 1e-12);
    } else {
      EXPECT_TRUE(row[res].empty());
    }
    // With p > 1/4 the bitflip factor is negative; the coherent factor can flip it back.
    if (row[p] == "0.29999999999999999" && row[q] == "0") {
      EXPECT_EQ(row[sign], "skipped_eta_nonpositive");
    }
    EXPECT_NE(row[sign], "fail");
  }
}

TEST(Theorem2, NegativeEtaBelowQuarterIsSkipped) {
  // p = 0.1, q = 0.3, mu = -3: strong coherent noise flips the shrinkage factor.
  Theorem2Config cfg;
  cfg.p_values = {0.1};
  cfg.q_values = {0.3};
  cfg.mu_values = {-3.0};
  cfg.tau_values = {0.0};
  cfg.pairs = 5;
  const auto r = run_verify_theorem2(cfg);
  EXPECT_EQ(r.exit_code, kPass);
  EXPECT_EQ(r.report["sign_preservation"]["skipped"], 5u);
  EXPECT_EQ(r.report["sign_preservation"]["points_with_sign_flip"], 1u);
}

TEST(Theorem2, DegenerateRowsAreReported) {
  Theorem2Config cfg;
  cfg.p_values = {0.25};
  cfg.q_values = {0.1};
  cfg.mu_values = {0.5};
  cfg.tau_values = {0.2};
  cfg.pairs = 3;
  const auto r = run_verify_theorem2(cfg);
  EXPECT_EQ(r.report["containment"]["degenerate_rows"], 3u);
  EXPECT_TRUE(r.report["containment"]["min_slack"].is_null());
  EXPECT_EQ(r.exit_code, kPass);
}

TEST(Theorem2, CsvIsThreadIndependent) {
  auto cfg = small_grid();
  const auto a = run_verify_theorem2(cfg);
  cfg.threads = 4;
  const auto b = run_verify_theorem2(cfg);
  EXPECT_EQ(a.sweep.str(), b.sweep.str());
}

TEST(Lemmas, AxisSymmetryFailsOnlyWithNonzeroSine) {
  LemmasConfig cfg;
  cfg.instances = 300;
  cfg.quadruples = 2000;
  const auto r = run_verify_lemmas(cfg);
  EXPECT_EQ(r.exit_code, kVerificationFailure);
  for (const auto& id : r.report["table_identities"]) {
    if (id["identity"] == "m01_equals_m02")
      EXPECT_FALSE(id["holds"].get<bool>());
    else
      EXPECT_TRUE(id["holds"].get<bool>()) << id["identity"];
  }
  cfg.axis_symmetry = false;
  EXPECT_EQ(run_verify_lemmas(cfg).exit_code, kPass);
  cfg.axis_symmetry = true;
  cfg.mu = 0.0;
  EXPECT_EQ(run_verify_lemmas(cfg).exit_code, kPass);
}

TEST(Lemmas, QuadruplesStayInDomain) {
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const auto v = random_zero_sum_quadruple(3, i);
    EXPECT_EQ(v[0] + v[1] + v[2] + v[3] == 0.0 || std::abs(v[0] + v[1] + v[2] + v[3]) < 1e-16, true);
    for (double x : v) EXPECT_LE(std::abs(x), 0.5);
  }
}

TEST(Train, SmallRunIsReproducible) {
  auto cfg = small_train();
  const auto a = run_train(cfg);
  EXPECT_EQ(a.exit_code, kPass);
  EXPECT_EQ(a.sweep.rows().size(), 6u);
  EXPECT_LE(a.report["summary"]["identity_residual_max"].get<double>(), 1e-10);
  cfg.threads = 2;
  const auto b = run_train(cfg);
  EXPECT_EQ(a.sweep.str(), b.sweep.str());
  EXPECT_EQ(a.dataset, b.dataset);
  EXPECT_EQ(a.report.dump(), [&] {
    auto rb = b.report;
    rb["config"]["threads"] = 1;
    return rb.dump();
  }());
}

TEST(Train, NoNoiseMakesNoisyFitEqualClean) {
  auto cfg = small_train();
  cfg.p = 0.0;
  const auto r = run_train(cfg);
  for (const auto& rep : r.report["replicates"]) {
    EXPECT_EQ(rep["fits"]["clean"]["theta"], rep["fits"]["noisy"]["theta"]);
    EXPECT_EQ(rep["fits"]["clean"]["identity_residual_max"].get<double>(), 0.0);
    EXPECT_EQ(rep["fits"]["regularized"]["theta"], rep["fits"]["clean"]["theta"]);
  }
  EXPECT_EQ(r.report["summary"]["noisy_below_clean"], 0u);
}

TEST(Train, LargeNoiseSkipsIdentity) {
  auto cfg = small_train();
  cfg.p = 0.3;
  const auto r = run_train(cfg);
  EXPECT_EQ(r.exit_code, kPass);
  EXPECT_FALSE(r.report["summary"]["identity_checked"].get<bool>());
  EXPECT_TRUE(r.report["summary"]["identity_residual_max"].is_null());
  EXPECT_EQ(r.sweep.rows().size(), 4u);
}

TEST(Train, InfeasibleGap) {
  auto cfg = small_train();
  cfg.margin_gap = 0.4999;
  EXPECT_THROW(run_train(cfg), infeasible_spec_error);
}

TEST(Train, DatasetFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "qnoise_test_train";
  std::filesystem::remove_all(dir);
  auto cfg = small_train();
  const auto first = run_train(cfg);
  write_outputs(first, dir);
  EXPECT_EQ(slurp(dir / "dataset.txt"), first.dataset);
  EXPECT_EQ(slurp(dir / "sweep.csv"), first.sweep.str());
  EXPECT_EQ(nlohmann::ordered_json::parse(slurp(dir / "report.json")), first.report);

  cfg.dataset = (dir / "dataset.txt").string();
  cfg.replicates = 1;
  const auto again = run_train(cfg);
  EXPECT_EQ(again.dataset, first.dataset);
  EXPECT_EQ(again.report["replicates"][0]["fits"]["clean"]["theta"], first.report["replicates"][0]["fits"]["clean"]["theta"]);

  std::ofstream(dir / "bad.txt") << "1 1 2 0 0 0\n";
  cfg.dataset = (dir / "bad.txt").string();
  EXPECT_THROW(run_train(cfg), config_error);
  std::filesystem::remove_all(dir);
}

TEST(Outputs, RerunIsByteIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "qnoise_test_rerun";
  std::filesystem::remove_all(dir);
  const auto cfg = small_grid();
  write_outputs(run_verify_theorem2(cfg), dir / "a");
  write_outputs(run_verify_theorem2(cfg), dir / "b");
  EXPECT_EQ(slurp(dir / "a" / "sweep.csv"), slurp(dir / "b" / "sweep.csv"));
  EXPECT_EQ(slurp(dir / "a" / "report.json"), slurp(dir / "b" / "report.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "a" / "dataset.txt"));
  std::filesystem::remove_all(dir);
}
