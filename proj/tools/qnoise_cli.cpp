// Command-line front end: parses flags and INI config, runs one experiment,
// writes report.json / sweep.csv / dataset.txt into --out.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qnoise/experiments.hpp"

namespace ex = qnoise::experiments;

namespace {

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sub->add_option("--out", c.out, "Output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statevector experiments for single-qubit noise on binary quantum classifiers"};
  app.set_config("--config", "", "INI file with one [section] per subcommand; flags override it");
  app.set_version_flag("--version", std::string(qnoise::kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);

  // One Common per subcommand: CLI11 fills config sections into every
  // subcommand, parsed or not.
  Common c1, c2, c3, c4;

  ex::Theorem1Config t1;
  auto* s1 = app.add_subcommand("verify-theorem1", "Readout invariance under noise on wires 2..n");
  add_common(s1, c1);
  s1->add_option("--n_qubits", t1.n_qubits, "Register size (lower end when max_qubits is set)")->capture_default_str();
  s1->add_option("--max_qubits", t1.max_qubits, "Upper register size; 0 uses n_qubits")->capture_default_str();
  s1->add_option("--layers", t1.layers, "Entangling layers drawn from 1..layers")->capture_default_str();
  s1->add_option("--circuits", t1.circuits, "Random circuits")->capture_default_str();
  s1->add_option("--draws,--trials", t1.draws, "Noise draws per circuit")->capture_default_str();
  s1->add_option("--negative_controls", t1.negative_controls, "Run hypothesis-violating controls")->capture_default_str();
  s1->add_option("--tolerance", t1.tolerance, "Pass threshold on the max deviation")->capture_default_str();
  s1->add_option("--control_threshold", t1.control_threshold, "Deviation that counts as a visible violation")
      ->capture_default_str();

  ex::Theorem2Config t2;
  auto* s2 = app.add_subcommand("verify-theorem2", "Shrinkage interval of the corrupted margin over a grid");
  add_common(s2, c2);
  s2->add_option("--p_values", t2.p_values, "Bit-flip probabilities")->delimiter(',')->capture_default_str();
  s2->add_option("--q_values", t2.q_values, "Coherent-error probabilities")->delimiter(',')->capture_default_str();
  s2->add_option("--mu_values", t2.mu_values, "Rotation means")->delimiter(',')->capture_default_str();
  s2->add_option("--tau_values", t2.tau_values, "Jitter standard deviations")->delimiter(',')->capture_default_str();
  s2->add_option("--pairs", t2.pairs, "Random (theta, state) pairs per grid point")->capture_default_str();
  s2->add_option("--n_qubits", t2.n_qubits, "Register size")->capture_default_str();
  s2->add_option("--trials", t2.trials, "Monte Carlo trials per checked pair")->capture_default_str();
  s2->add_option("--mc_pairs", t2.mc_pairs, "Pairs per point checked by Monte Carlo")->capture_default_str();
  s2->add_option("--mc_sigma", t2.mc_sigma, "Allowed Monte Carlo deviation in standard errors")->capture_default_str();
  s2->add_option("--containment_tolerance", t2.containment_tolerance, "Allowed negative slack")->capture_default_str();
  s2->add_option("--mu0_tolerance", t2.mu0_tolerance, "Allowed residual on mu = 0 rows")->capture_default_str();

  ex::LemmasConfig lm;
  auto* s3 = app.add_subcommand("verify-lemmas", "Conditional margin identities and the zero-sum quadruple bound");
  add_common(s3, c3);
  s3->add_option("--instances,--trials", lm.instances, "Random table instances")->capture_default_str();
  s3->add_option("--quadruples", lm.quadruples, "Random zero-sum quadruples")->capture_default_str();
  s3->add_option("--n_qubits", lm.n_qubits, "Largest register size")->capture_default_str();
  s3->add_option("--mu", lm.mu, "Fixed rotation mean (default: random per instance)");
  s3->add_option("--tau", lm.tau, "Fixed jitter (default: random per instance)");
  s3->add_option("--axis_symmetry", lm.axis_symmetry, "Include m01 = m02 in the verdict")->capture_default_str();
  s3->add_option("--tolerance", lm.tolerance, "Table identity tolerance")->capture_default_str();
  s3->add_option("--quadruple_tolerance", lm.quadruple_tolerance, "Allowed negative quadruple slack")
      ->capture_default_str();

  ex::TrainConfig tr;
  auto* s4 = app.add_subcommand("train", "Clean, noisy and regularized fits");
  add_common(s4, c4);
  s4->add_option("--n_qubits", tr.n_qubits, "Register size")->capture_default_str();
  s4->add_option("--n_train", tr.n_train, "Training items")->capture_default_str();
  s4->add_option("--n_test", tr.n_test, "Test items (0 disables)")->capture_default_str();
  s4->add_option("--margin_gap", tr.margin_gap, "Minimum planted |margin| of generated items")->capture_default_str();
  s4->add_option("--entangle", tr.entangle, "Pass generated states through an entangling circuit")
      ->capture_default_str();
  s4->add_option("--p", tr.p, "Bit-flip probability")->capture_default_str();
  s4->add_option("--loss", tr.loss, "hinge or logistic")->capture_default_str();
  s4->add_option("--step_size", tr.step_size, "Gradient step")->capture_default_str();
  s4->add_option("--iterations", tr.iterations, "Gradient steps per restart")->capture_default_str();
  s4->add_option("--restarts", tr.restarts, "Restarts per fit")->capture_default_str();
  s4->add_option("--init_scale", tr.init_scale, "Half-width of random restart initializations")->capture_default_str();
  s4->add_option("--gradient", tr.gradient, "parameter_shift or finite_difference")->capture_default_str();
  s4->add_option("--regularized", tr.regularized, "Also fit the regularized objective")->capture_default_str();
  s4->add_option("--replicates,--trials", tr.replicates, "Independent datasets")->capture_default_str();
  s4->add_option("--log_every", tr.log_every, "Theta logging interval (iterations)")->capture_default_str();
  s4->add_option("--identity_tolerance", tr.identity_tolerance, "Allowed expected-risk identity residual")
      ->capture_default_str();
  s4->add_option("--dataset", tr.dataset, "Training data file; replaces generated data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ex::kPass : ex::kUsageError;
  }

  try {
    ex::RunResult result;
    const Common* common = nullptr;
    if (s1->parsed()) {
      common = &c1;
      t1.seed = c1.seed, t1.threads = c1.threads;
      result = ex::run_verify_theorem1(t1);
    } else if (s2->parsed()) {
      common = &c2;
      t2.seed = c2.seed, t2.threads = c2.threads;
      result = ex::run_verify_theorem2(t2);
    } else if (s3->parsed()) {
      common = &c3;
      lm.seed = c3.seed, lm.threads = c3.threads;
      result = ex::run_verify_lemmas(lm);
    } else {
      common = &c4;
      tr.seed = c4.seed, tr.threads = c4.threads;
      result = ex::run_train(tr);
    }
    ex::write_outputs(result, common->out);
    std::cout << result.report["command"].get<std::string>() << ": " << (result.exit_code == 0 ? "pass" : "FAIL")
              << " (report: " << common->out << "/report.json)\n";
    return result.exit_code;
  } catch (const qnoise::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ex::kUsageError;
  } catch (const qnoise::infeasible_spec_error& e) {
    std::cerr << "infeasible experiment: " << e.what() << "\n";
    return ex::kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kVerificationFailure;
  }
}
