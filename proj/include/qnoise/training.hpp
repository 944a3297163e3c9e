#pragma once

// Risk minimization on quantum datasets whose first qubit may be hit by a
// random Pauli before the classifier sees it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnoise/circuit.hpp"
#include "qnoise/classifier.hpp"
#include "qnoise/errors.hpp"
#include "qnoise/noise.hpp"
#include "qnoise/random.hpp"
#include "qnoise/rng.hpp"
#include "qnoise/statevec.hpp"

namespace qnoise {

// ---------------------------------------------------------------------------
// Losses

enum class LossKind { hinge, logistic };

inline std::string to_string(LossKind k) { return k == LossKind::hinge ? "hinge" : "logistic"; }

inline LossKind parse_loss(const std::string& name) {
  if (name == "hinge") return LossKind::hinge;
  if (name == "logistic") return LossKind::logistic;
  throw domain_error("unknown loss '" + name + "' (expected hinge or logistic)");
}

/// Margins times labels live in [-1/2, 1/2]; the endpoints are reachable, so
/// the domain is closed.
inline constexpr double kLossDomain = 0.5;
inline constexpr double kLossDomainSlack = 1e-12;

inline void check_loss_domain(double t) {
  if (!(std::abs(t) <= kLossDomain + kLossDomainSlack))
    throw domain_error("loss argument " + std::to_string(t) + " outside [-1/2, 1/2]");
}

/// hinge: (1 - t)_+ ; logistic: log(1 + e^{-t}) / log 2. Both have l(0) = 1.
inline double loss(LossKind kind, double t) {
  check_loss_domain(t);
  if (kind == LossKind::hinge) return std::max(0.0, 1.0 - t);
  return std::log1p(std::exp(-t)) / std::log(2.0);
}

/// d loss / dt. The hinge subgradient at the kink t = 1 is taken as 0.
inline double loss_derivative(LossKind kind, double t) {
  check_loss_domain(t);
  if (kind == LossKind::hinge) return t < 1.0 ? -1.0 : 0.0;
  return -1.0 / ((1.0 + std::exp(t)) * std::log(2.0));
}

/// [l(t/3) + l(-t/3)] / 2, the per-item floor on the noise penalty.
inline double symmetric_floor(LossKind kind, double t) { return 0.5 * (loss(kind, t / 3.0) + loss(kind, -t / 3.0)); }

struct QuadrupleBound {
  double lhs = 0.0;  // mean of l over the four values
  double rhs = 0.0;  // symmetric_floor(|a|)
  double slack() const { return lhs - rhs; }
};

/// Evaluates mean(l(a), l(b), l(c), l(d)) against [l(|a|/3) + l(-|a|/3)]/2
/// for a zero-sum quadruple.
inline QuadrupleBound quadruple_bound(double a, double b, double c, double d, LossKind kind) {
  if (!(std::abs(a + b + c + d) <= 1e-12)) throw domain_error("quadruple must sum to zero");
  QuadrupleBound r;
  r.lhs = 0.25 * (loss(kind, a) + loss(kind, b) + loss(kind, c) + loss(kind, d));
  r.rhs = symmetric_floor(kind, std::abs(a));
  return r;
}

// ---------------------------------------------------------------------------
// Datasets

struct LabeledState {
  StateVector state;
  int label;  // -1 or +1
};

/// Items plus, when corrupted, the Pauli index applied to each item's first qubit.
struct QuantumDataset {
  std::vector<LabeledState> items;
  std::vector<int> corruption;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  bool corrupted() const { return !corruption.empty(); }
  int n_qubits() const { return items.empty() ? 0 : items.front().state.n_qubits(); }

  void validate() const {
    for (const auto& it : items) {
      if (it.label != 1 && it.label != -1) throw domain_error("labels must be -1 or +1");
      if (it.state.n_qubits() != n_qubits()) throw size_error("all dataset states must share a qubit count");
    }
    if (corrupted() && corruption.size() != items.size()) throw size_error("corruption record length mismatch");
  }
};

/// Replaces each state by (sigma_{C_i} x I)|psi_i> with i.i.d. C_i; draw i uses
/// the stream keyed by (seed, i).
inline QuantumDataset corrupt_dataset(const QuantumDataset& clean, const BitflipChannel& channel, std::uint64_t seed) {
  QuantumDataset out;
  out.items.reserve(clean.size());
  out.corruption.reserve(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    CounterRng rng(seed, {static_cast<std::uint64_t>(i)});
    const int j = sample_bitflip(channel, rng).pauli_index;
    LabeledState item = clean.items[i];
    if (j != 0) item.state.apply_single_inplace(pauli_gate(j), 1);
    out.items.push_back(std::move(item));
    out.corruption.push_back(j);
  }
  return out;
}

struct DatasetSpec {
  int n_qubits = 2;
  std::size_t n_items = 20;
  std::vector<double> planted_theta;  // empty: drawn from the seed
  double margin_gap = 0.0;
  bool entangle = false;
};

struct GeneratedDataset {
  QuantumDataset data;
  std::vector<double> planted_theta;
  std::uint64_t attempts = 0;
};

inline constexpr std::uint64_t kMaxRejectionFactor = 100;  // > 99% rejection is infeasible

/// Draws random product states (optionally pushed through a random entangling
/// circuit), labels them with the planted classifier and drops items whose
/// planted margin is below the gap.
inline GeneratedDataset generate_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.n_qubits < 1 || spec.n_qubits > kMaxQubits) throw size_error("dataset qubit count out of range");
  if (spec.n_items < 1) throw empty_input_error("dataset must have at least one item");
  if (spec.entangle && spec.n_qubits < 2) throw domain_error("entangled data needs at least two qubits");
  if (!(spec.margin_gap >= 0.0)) throw domain_error("margin gap must be >= 0");
  const Ansatz ansatz(spec.n_qubits);
  GeneratedDataset out;
  out.planted_theta = spec.planted_theta;
  if (out.planted_theta.empty()) {
    CounterRng rng(seed, {0xFFFFFFFFULL});
    out.planted_theta.resize(ansatz.parameter_count());
    for (auto& t : out.planted_theta) t = (2.0 * rng.uniform() - 1.0) * kPi;
  }
  ansatz.check_theta(out.planted_theta);
  const std::uint64_t budget = kMaxRejectionFactor * spec.n_items;
  while (out.data.size() < spec.n_items && out.attempts < budget) {
    CounterRng rng(seed, {out.attempts++});
    StateVector s = random_product_state(spec.n_qubits, rng);
    if (spec.entangle) random_entangling_circuit(spec.n_qubits, 1, rng).apply_inplace(s);
    const Margin m = margin(ansatz, out.planted_theta, s);
    if (std::abs(m.value) < spec.margin_gap) continue;
    out.data.items.push_back({std::move(s), classify(m)});
  }
  if (out.data.size() < spec.n_items)
    throw infeasible_spec_error("margin gap " + std::to_string(spec.margin_gap) + " rejected more than 99% of " +
                                std::to_string(budget) + " draws");
  return out;
}

// ---------------------------------------------------------------------------
// Risks

inline void check_training_inputs(const Ansatz& ansatz, const QuantumDataset& data) {
  if (data.empty()) throw empty_input_error("risk of an empty dataset");
  if (!ansatz.product_form()) throw unsupported_configuration_error("classifier must be product-form");
  if (data.n_qubits() != ansatz.n_qubits()) throw size_error("dataset and ansatz register sizes differ");
}

/// (1/N) sum_i l(m_theta(psi_i) Y_i)
inline double empirical_risk(const Ansatz& ansatz, std::span<const double> theta, const QuantumDataset& data,
                             LossKind kind) {
  check_training_inputs(ansatz, data);
  double acc = 0.0;
  for (const auto& it : data.items) acc += loss(kind, margin(ansatz, theta, it.state).value * it.label);
  return acc / static_cast<double>(data.size());
}

/// Empirical risk on a dataset that went through corrupt_dataset.
inline double corrupted_empirical_risk(const Ansatz& ansatz, std::span<const double> theta,
                                       const QuantumDataset& corrupted, LossKind kind) {
  if (!corrupted.corrupted()) throw domain_error("dataset carries no corruption record");
  return empirical_risk(ansatz, theta, corrupted, kind);
}

struct RiskReport {
  double empirical = 0.0;            // R_N
  double expected_corrupted = 0.0;   // E[R~_N | data], by direct weighting
  double penalty = 0.0;              // P_N, mean quarter-sum over sigma_j-conjugated margins
  double penalty_lower_bound = 0.0;  // (1/N) sum symmetric_floor(|m_i|)
  double lambda = 0.0;               // 4p / (1 - 4p)
  double identity_residual = 0.0;    // |expected_corrupted - (1-4p)(R_N + lambda P_N)|
};

/// Exact conditional expectation of the corrupted risk given the clean data.
inline RiskReport expected_corrupted_risk(const Ansatz& ansatz, std::span<const double> theta,
                                          const QuantumDataset& data, LossKind kind, double p) {
  check_training_inputs(ansatz, data);
  const BitflipChannel channel(p);
  if (!(p < 0.25)) throw domain_error("lambda = 4p/(1-4p) needs p < 1/4, got p=" + std::to_string(p));
  const auto w = pauli_masses(p);
  RiskReport r;
  r.lambda = 4.0 * p / (1.0 - 4.0 * p);
  const double n = static_cast<double>(data.size());
  for (const auto& it : data.items) {
    double losses[4];
    for (int j = 0; j < 4; ++j) losses[j] = loss(kind, margin_conjugated(ansatz, theta, it.state, j).value * it.label);
    r.empirical += losses[0] / n;
    r.expected_corrupted += (w[0] * losses[0] + w[1] * losses[1] + w[2] * losses[2] + w[3] * losses[3]) / n;
    r.penalty += 0.25 * (losses[0] + losses[1] + losses[2] + losses[3]) / n;
    const double m = margin(ansatz, theta, it.state).value;
    r.penalty_lower_bound += symmetric_floor(kind, std::abs(m)) / n;
  }
  r.identity_residual = std::abs(r.expected_corrupted - (1.0 - 4.0 * p) * (r.empirical + r.lambda * r.penalty));
  return r;
}

// ---------------------------------------------------------------------------
// Objectives and gradients

enum class GradientMethod { parameter_shift, finite_difference };

/// sum_k w_k l(m_theta(state_k) y_k) over an explicit weighted item list.
class RiskObjective {
 public:
  struct Term {
    StateVector state;
    int label;
    double weight;
  };

  RiskObjective(Ansatz ansatz, LossKind kind, std::vector<Term> terms)
      : ansatz_(std::move(ansatz)), kind_(kind), terms_(std::move(terms)) {
    if (terms_.empty()) throw empty_input_error("objective has no terms");
  }

  /// R_N on `data` (clean or corrupted).
  static RiskObjective empirical(const Ansatz& ansatz, const QuantumDataset& data, LossKind kind) {
    check_training_inputs(ansatz, data);
    std::vector<Term> terms;
    const double w = 1.0 / static_cast<double>(data.size());
    for (const auto& it : data.items) terms.push_back({it.state, it.label, w});
    return RiskObjective(ansatz, kind, std::move(terms));
  }

  /// R_N + lambda P_N, expanded over the four Pauli-conjugated copies of each item.
  static RiskObjective regularized(const Ansatz& ansatz, const QuantumDataset& data, LossKind kind, double p) {
    check_training_inputs(ansatz, data);
    if (!(p >= 0.0 && p < 0.25)) throw domain_error("regularized objective needs 0 <= p < 1/4");
    const double lambda = 4.0 * p / (1.0 - 4.0 * p);
    const double n = static_cast<double>(data.size());
    std::vector<Term> terms;
    for (const auto& it : data.items) {
      terms.push_back({it.state, it.label, (1.0 + 0.25 * lambda) / n});
      if (lambda == 0.0) continue;
      for (int j = 1; j < 4; ++j) terms.push_back({apply_single(it.state, pauli_gate(j), 1), it.label, 0.25 * lambda / n});
    }
    return RiskObjective(ansatz, kind, std::move(terms));
  }

  const Ansatz& ansatz() const { return ansatz_; }
  LossKind loss_kind() const { return kind_; }
  std::size_t parameter_count() const { return ansatz_.parameter_count(); }

  double value(std::span<const double> theta) const {
    double acc = 0.0;
    for (const auto& t : terms_) acc += t.weight * loss(kind_, margin(ansatz_, theta, t.state).value * t.label);
    return acc;
  }

  /// Parameter-shift gradient: every parameter drives one exp(-i phi sigma/2)
  /// rotation, so dm/dphi = [m(phi + pi/2) - m(phi - pi/2)] / 2 exactly.
  std::vector<double> gradient_parameter_shift(std::span<const double> theta) const {
    ansatz_.check_theta(theta);
    std::vector<double> dloss(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const auto& t = terms_[i];
      dloss[i] = t.weight * t.label * loss_derivative(kind_, margin(ansatz_, theta, t.state).value * t.label);
    }
    std::vector<double> grad(theta.size(), 0.0);
    std::vector<double> shifted(theta.begin(), theta.end());
    for (std::size_t k = 0; k < theta.size(); ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < terms_.size(); ++i) {
        shifted[k] = theta[k] + kPi / 2.0;
        const double plus = margin(ansatz_, shifted, terms_[i].state).value;
        shifted[k] = theta[k] - kPi / 2.0;
        const double minus = margin(ansatz_, shifted, terms_[i].state).value;
        acc += dloss[i] * 0.5 * (plus - minus);
      }
      shifted[k] = theta[k];
      grad[k] = acc;
    }
    return grad;
  }

  std::vector<double> gradient_finite_difference(std::span<const double> theta, double h = 1e-5) const {
    std::vector<double> grad(theta.size(), 0.0);
    std::vector<double> shifted(theta.begin(), theta.end());
    for (std::size_t k = 0; k < theta.size(); ++k) {
      shifted[k] = theta[k] + h;
      const double plus = value(shifted);
      shifted[k] = theta[k] - h;
      const double minus = value(shifted);
      shifted[k] = theta[k];
      grad[k] = (plus - minus) / (2.0 * h);
    }
    return grad;
  }

  std::vector<double> gradient(std::span<const double> theta, GradientMethod method) const {
    return method == GradientMethod::parameter_shift ? gradient_parameter_shift(theta)
                                                     : gradient_finite_difference(theta);
  }

 private:
  Ansatz ansatz_;
  LossKind kind_;
  std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// Fitting

struct FitConfig {
  double step_size = 0.5;
  int iterations = 200;
  int restarts = 3;
  GradientMethod gradient = GradientMethod::parameter_shift;
  std::uint64_t seed = 1;
  double init_scale = kPi;  // restarts after the first start uniform in [-scale, scale]
  int log_every = 0;        // record theta every k iterations of the best restart; 0 disables

  void validate() const {
    if (!(step_size > 0.0)) throw domain_error("step size must be > 0");
    if (iterations < 1) throw domain_error("iterations must be >= 1");
    if (restarts < 1) throw domain_error("restarts must be >= 1");
    if (!(init_scale >= 0.0)) throw domain_error("init scale must be >= 0");
    if (log_every < 0) throw domain_error("log interval must be >= 0");
  }
};

struct FitResult {
  std::vector<double> theta;            // best iterate over all restarts
  double objective = 0.0;               // objective at theta
  int best_restart = 0;
  std::vector<double> trace;            // per-iteration objective of the best restart (index 0 = init)
  std::vector<double> restart_objectives;
  std::vector<std::vector<double>> logged_thetas;  // iterates 0, k, 2k, ... of the best restart
};

class optimization_error : public error {
 public:
  optimization_error(const std::string& what, std::vector<double> trace) : error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Plain gradient descent with a fixed step. Restart 0 starts at theta = 0;
/// restart r > 0 starts from a uniform draw keyed by (seed, r).
inline FitResult fit(const RiskObjective& objective, const FitConfig& config) {
  config.validate();
  const std::size_t k = objective.parameter_count();
  FitResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.restarts; ++r) {
    std::vector<double> theta(k, 0.0);
    if (r > 0) {
      CounterRng rng(config.seed, {static_cast<std::uint64_t>(r)});
      for (auto& t : theta) t = (2.0 * rng.uniform() - 1.0) * config.init_scale;
    }
    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(config.iterations) + 1);
    double value = objective.value(theta);
    trace.push_back(value);
    std::vector<double> best_theta = theta;
    double best_value = value;
    std::vector<std::vector<double>> logged;
    if (config.log_every > 0) logged.push_back(theta);
    for (int it = 0; it < config.iterations; ++it) {
      const auto g = objective.gradient(theta, config.gradient);
      for (std::size_t i = 0; i < k; ++i) theta[i] -= config.step_size * g[i];
      const bool finite = std::all_of(theta.begin(), theta.end(), [](double t) { return std::isfinite(t); });
      value = finite ? objective.value(theta) : std::numeric_limits<double>::quiet_NaN();
      trace.push_back(value);
      if (!std::isfinite(value))
        throw optimization_error("objective diverged at iteration " + std::to_string(it + 1), std::move(trace));
      if (value < best_value) {
        best_value = value;
        best_theta = theta;
      }
      if (config.log_every > 0 && (it + 1) % config.log_every == 0) logged.push_back(theta);
    }
    best.restart_objectives.push_back(best_value);
    if (best_value < best.objective) {
      best.objective = best_value;
      best.theta = std::move(best_theta);
      best.best_restart = r;
      best.trace = std::move(trace);
      best.logged_thetas = std::move(logged);
    }
  }
  return best;
}

/// Mean |m_theta(psi_i)| over a dataset.
inline double mean_abs_margin(const Ansatz& ansatz, std::span<const double> theta, const QuantumDataset& data) {
  if (data.empty()) throw empty_input_error("mean margin of an empty dataset");
  double acc = 0.0;
  for (const auto& it : data.items) acc += std::abs(margin(ansatz, theta, it.state).value);
  return acc / static_cast<double>(data.size());
}

/// Fraction of items where classify(m_theta(psi)) equals the label.
inline double accuracy(const Ansatz& ansatz, std::span<const double> theta, const QuantumDataset& data) {
  if (data.empty()) throw empty_input_error("accuracy of an empty dataset");
  std::size_t hits = 0;
  for (const auto& it : data.items) hits += classify(margin(ansatz, theta, it.state)) == it.label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace qnoise
