#pragma once

// Exact and sampled averages of the classifier margin under the wire-1 noise
// model, plus the closed-form shrinkage bounds they must satisfy.
//
// Exact averaging enumerates the 4 Pauli outcomes x 4 rotation axes. For a
// fixed axis the readout probability after exp(-i t/2 sigma) is a first-order
// trigonometric polynomial in t,
//
//   P(t) = (A + B)/2 + cos t (A - B)/2 + sin t (2H - A - B)/2,
//
// with A = P(0), B = P(pi), H = P(pi/2). The Gaussian jitter then enters only
// through E[cos(mu + eps)] and E[sin(mu + eps)].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qnoise/circuit.hpp"
#include "qnoise/classifier.hpp"
#include "qnoise/errors.hpp"
#include "qnoise/noise.hpp"
#include "qnoise/parallel.hpp"
#include "qnoise/random.hpp"
#include "qnoise/rng.hpp"
#include "qnoise/stats.hpp"
#include "qnoise/statevec.hpp"

namespace qnoise {

// ---------------------------------------------------------------------------
// Closed-form shrinkage constants

/// The corrupted margin satisfies m~ in eta * [m - delta, m + delta].
struct ShrinkageConstants {
  double eta = 1.0;
  double delta = 0.0;
};

inline ShrinkageConstants shrinkage_constants(double p, double q, double mu, double tau) {
  const double damp = std::exp(-0.5 * tau * tau);
  ShrinkageConstants k;
  k.eta = (1.0 - 4.0 * p) * (1.0 - 2.0 * q * (1.0 - std::cos(mu) * damp));
  if (k.eta == 0.0) throw degenerate_shrinkage_error("shrinkage factor eta is zero; delta is undefined");
  k.delta = 2.0 * q * std::abs(std::sin(mu)) * damp / k.eta;
  return k;
}

inline ShrinkageConstants shrinkage_constants(const NoiseModel& model) {
  return shrinkage_constants(model.bitflip.p(), model.coherent.q(), model.coherent.mu(), model.coherent.tau());
}

/// Signed distance of `value` inside the interval eta*[m - delta, m + delta];
/// negative when outside. Works for either sign of eta.
inline double containment_slack(double value, double margin_value, const ShrinkageConstants& k) {
  const double a = k.eta * (margin_value - k.delta);
  const double b = k.eta * (margin_value + k.delta);
  return std::min(value - std::min(a, b), std::max(a, b) - value);
}

// ---------------------------------------------------------------------------
// Exact channel averaging

/// E_eps[ P(first qubit = 1) ] for `post_circuit` followed by
/// exp(-i (mu + eps)/2 sigma_axis) on wire 1.
inline double jitter_averaged_probability(const StateVector& post_circuit, int axis, double mu, double tau) {
  const double a = prob_first_qubit_one(post_circuit);
  if (axis == 0) return a;
  const double b = prob_first_qubit_one(apply_single(post_circuit, coherent_gate(axis, kPi), 1));
  const double h = prob_first_qubit_one(apply_single(post_circuit, coherent_gate(axis, kPi / 2.0), 1));
  const auto [cos_mean, sin_mean] = gaussian_trig_expectations(mu, tau);
  return 0.5 * (a + b) + 0.5 * cos_mean * (a - b) + 0.5 * sin_mean * (2.0 * h - a - b);
}

/// Conditional margins m^{jl} = E[P(1) | C = j, C' = l] - 1/2, with the
/// jitter integrated analytically.
struct ConditionalMarginTable {
  std::array<std::array<double, 4>, 4> m{};  // [pauli j][axis l]
  double margin = 0.0;                        // noiseless m(x)
  cplx overlap{};                             // Psi_1^dagger Psi_2, Psi = W|x>

  double column_sum(int l) const { return m[0][l] + m[1][l] + m[2][l] + m[3][l]; }
};

inline ConditionalMarginTable conditional_margin_table(const Ansatz& ansatz, std::span<const double> theta,
                                                       const StateVector& state, double mu, double tau) {
  if (!ansatz.product_form())
    throw unsupported_configuration_error("exact channel averaging needs a product-form ansatz");
  const Circuit w = ansatz.circuit(theta);
  ConditionalMarginTable t;
  for (int j = 0; j < 4; ++j) {
    StateVector chi = apply_single(state, pauli_gate(j), 1);
    w.apply_inplace(chi);
    if (j == 0) {
      t.margin = prob_first_qubit_one(chi) - 0.5;
      // <Psi|sigma_1 x I|Psi> = 2 Re(Psi_1^dagger Psi_2), <Psi|sigma_2 x I|Psi> = 2 Im(...)
      t.overlap = {0.5 * inner_product(chi, apply_single(chi, pauli_gate(1), 1)).real(),
                   0.5 * inner_product(chi, apply_single(chi, pauli_gate(2), 1)).real()};
    }
    for (int l = 0; l < 4; ++l) t.m[j][l] = jitter_averaged_probability(chi, l, mu, tau) - 0.5;
  }
  return t;
}

/// Residuals of the structural identities of the table. Each field is <= 0 up
/// to rounding when its identity holds.
///
/// Rotations about x and y move the readout through different components of
/// the overlap z = Psi_1^dagger Psi_2:
///   m^{01} = E[cos] m - E[sin] Im z,   m^{02} = E[cos] m + E[sin] Re z,
/// so m^{01} = m^{02} only when E[sin] = 0 or Re z = -Im z. Both stay within
/// |sin mu| e^{-tau^2/2} / 2 of E[cos] m.
struct TableCheck {
  double max_column_sum = 0.0;        // max_l |sum_j m^{jl}|
  double z_axis_residual = 0.0;       // max(|m00 - m|, |m03 - m|)
  double x_y_axis_residual = 0.0;     // |m01 - m02|
  double m01_bound_excess = 0.0;      // |m01 - E[cos] m| - |sin mu| e^{-tau^2/2} / 2
  double m02_bound_excess = 0.0;      // |m02 - E[cos] m| - |sin mu| e^{-tau^2/2} / 2
  double m01_formula_residual = 0.0;  // |m01 - (E[cos] m - E[sin] Im z)|
  double m02_formula_residual = 0.0;  // |m02 - (E[cos] m + E[sin] Re z)|
  double overlap_bound_excess = 0.0;  // |z| - 1/2

  /// Every identity, including m01 = m02.
  bool holds(double tol) const { return x_y_axis_residual <= tol && holds_except_axis_symmetry(tol); }

  bool holds_except_axis_symmetry(double tol) const {
    return max_column_sum <= tol && z_axis_residual <= tol && m01_bound_excess <= tol && m02_bound_excess <= tol &&
           m01_formula_residual <= tol && m02_formula_residual <= tol && overlap_bound_excess <= tol;
  }
};

inline TableCheck check_table(const ConditionalMarginTable& t, double mu, double tau) {
  TableCheck c;
  for (int l = 0; l < 4; ++l) c.max_column_sum = std::max(c.max_column_sum, std::abs(t.column_sum(l)));
  c.z_axis_residual = std::max(std::abs(t.m[0][0] - t.margin), std::abs(t.m[0][3] - t.margin));
  c.x_y_axis_residual = std::abs(t.m[0][1] - t.m[0][2]);
  const auto [cos_mean, sin_mean] = gaussian_trig_expectations(mu, tau);
  const double radius = 0.5 * std::abs(std::sin(mu)) * std::exp(-0.5 * tau * tau);
  c.m01_bound_excess = std::abs(t.m[0][1] - cos_mean * t.margin) - radius;
  c.m02_bound_excess = std::abs(t.m[0][2] - cos_mean * t.margin) - radius;
  c.m01_formula_residual = std::abs(t.m[0][1] - (cos_mean * t.margin - sin_mean * t.overlap.imag()));
  c.m02_formula_residual = std::abs(t.m[0][2] - (cos_mean * t.margin + sin_mean * t.overlap.real()));
  c.overlap_bound_excess = std::abs(t.overlap) - 0.5;
  return c;
}

struct CorruptedMargin {
  double exact = 0.0;
};

/// Full expectation of the corrupted margin over (C, C', eps).
inline CorruptedMargin corrupted_margin_exact(const Ansatz& ansatz, std::span<const double> theta,
                                              const StateVector& state, const NoiseModel& model) {
  const auto table = conditional_margin_table(ansatz, theta, state, model.coherent.mu(), model.coherent.tau());
  const auto wj = pauli_masses(model.bitflip.p());
  const auto wl = pauli_masses(model.coherent.q());
  double acc = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int l = 0; l < 4; ++l) acc += wj[j] * wl[l] * table.m[j][l];
  return {acc};
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t trials = 0;
};

inline constexpr std::uint64_t kMcChunk = 4096;

/// Sample mean of the readout margin with fresh (C, C', eps) per trial. Trial
/// k draws from the stream keyed by (seed, k); chunk statistics are merged in
/// chunk order, so the result does not depend on `threads`.
inline McEstimate corrupted_margin_mc(const Ansatz& ansatz, std::span<const double> theta, const StateVector& state,
                                      const NoiseModel& model, std::uint64_t trials, std::uint64_t seed,
                                      unsigned threads = 1) {
  if (trials < 1) throw domain_error("Monte Carlo needs at least one trial");
  ansatz.check_theta(theta);
  if (state.n_qubits() != ansatz.n_qubits()) throw size_error("state and ansatz register sizes differ");
  const Circuit w = ansatz.circuit(theta);
  const std::array<Gate, 4> paulis = {pauli_gate(0), pauli_gate(1), pauli_gate(2), pauli_gate(3)};
  const std::size_t chunks = static_cast<std::size_t>((trials + kMcChunk - 1) / kMcChunk);
  std::vector<RunningStats> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    StateVector work = state;
    RunningStats stats;
    const std::uint64_t begin = c * kMcChunk;
    const std::uint64_t end = std::min<std::uint64_t>(trials, begin + kMcChunk);
    for (std::uint64_t k = begin; k < end; ++k) {
      CounterRng rng(seed, {k});
      const NoiseRealization draw = sample_noise(model, rng);
      work.assign(state);
      if (draw.pauli_index != 0) work.apply_single_inplace(paulis[draw.pauli_index], 1);
      w.apply_inplace(work);
      if (draw.axis_index != 0) work.apply_single_inplace(coherent_gate(draw.axis_index, model.coherent.mu() + draw.jitter), 1);
      stats.add(prob_first_qubit_one(work) - 0.5);
    }
    partial[c] = stats;
  });
  RunningStats total;
  for (const auto& s : partial) total.merge(s);
  return {total.mean(), total.standard_error(), total.count()};
}

// ---------------------------------------------------------------------------
// Readout invariance under noise on the other wires

/// A noise unitary of the form U_1 x U_{2:n}. `others` acts on wires 2..n only
/// and may entangle them.
struct SplitNoise {
  Gate first;
  Circuit others;
};

inline SplitNoise identity_noise(int n_qubits) { return {pauli_gate(0), Circuit(n_qubits)}; }

/// Random U_1 and random U_{2:n}; with `entangle_others`, U_{2:n} also contains
/// CNOTs among wires 2..n.
inline SplitNoise random_split_noise(int n_qubits, CounterRng& rng, bool entangle_others = false) {
  SplitNoise u{random_unitary(2, rng), random_local_layer(n_qubits, 2, rng)};
  if (entangle_others && n_qubits >= 3) {
    for (int w = 2; w < n_qubits; ++w) u.others.add_cnot(w, w + 1);
    u.others.append(random_local_layer(n_qubits, 2, rng));
  }
  return u;
}

namespace detail {
inline void apply_noise(StateVector& s, const SplitNoise& u, bool include_others) {
  s.apply_single_inplace(u.first, 1);
  if (include_others) u.others.apply_inplace(s);
}
}  // namespace detail

/// |P(U W x) - P(U' W x)| with U' = U_1 x I. `coupling`, when given, is applied
/// after the noise in both arms; a coupling that touches wire 1 breaks the
/// invariance and serves as a negative control.
inline double post_circuit_noise_deviation(const Circuit& w, const StateVector& input, const SplitNoise& u,
                                           const Circuit* coupling = nullptr) {
  StateVector full = w.apply(input);
  StateVector reduced = full;
  detail::apply_noise(full, u, true);
  detail::apply_noise(reduced, u, false);
  if (coupling) {
    coupling->apply_inplace(full);
    coupling->apply_inplace(reduced);
  }
  return std::abs(prob_first_qubit_one(full) - prob_first_qubit_one(reduced));
}

/// |P(U W V x) - P(U' W V' x)|. Zero when W is a product of single-qubit gates.
inline double encoder_noise_deviation(const Circuit& w, const StateVector& input, const SplitNoise& u,
                                      const SplitNoise& v) {
  StateVector full = input;
  StateVector reduced = input;
  detail::apply_noise(full, v, true);
  detail::apply_noise(reduced, v, false);
  w.apply_inplace(full);
  w.apply_inplace(reduced);
  detail::apply_noise(full, u, true);
  detail::apply_noise(reduced, u, false);
  return std::abs(prob_first_qubit_one(full) - prob_first_qubit_one(reduced));
}

struct InvarianceSweep {
  int min_qubits = 4;
  int max_qubits = 4;
  int min_layers = 1;
  int max_layers = 3;
  int circuits = 1;
  int draws = 100;
  bool negative_controls = true;
};

struct DrawDeviation {
  double post_circuit = 0.0;
  double encoder_noise = 0.0;
  double control_coupling = 0.0;
  double control_entangled_w = 0.0;
};

/// Per-circuit maxima. Positive cases must vanish; negative controls are
/// expected to deviate.
struct InvarianceRow {
  int circuit_index = 0;
  int n_qubits = 0;
  int layers = 0;
  double post_circuit_max = 0.0;         // entangled W, noise after W
  double encoder_noise_max = 0.0;        // product W, noise before and after W
  double identity_noise_deviation = 0.0; // U_{2:n} = I
  double control_coupling_max = 0.0;     // entangling noise touching wire 1
  double control_entangled_w_max = 0.0;  // encoder noise with entangled W
  std::vector<DrawDeviation> draws;
};

struct InvarianceReport {
  std::vector<InvarianceRow> rows;

  double max_positive() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max({m, r.post_circuit_max, r.encoder_noise_max, r.identity_noise_deviation});
    return m;
  }
  double max_control() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max({m, r.control_coupling_max, r.control_entangled_w_max});
    return m;
  }
};

inline InvarianceRow verify_readout_invariance_one(const InvarianceSweep& cfg, std::uint64_t seed, int index) {
  CounterRng rng(seed, {0x7431ULL, static_cast<std::uint64_t>(index)});
  InvarianceRow row;
  row.circuit_index = index;
  const int span_q = cfg.max_qubits - cfg.min_qubits + 1;
  const int span_l = cfg.max_layers - cfg.min_layers + 1;
  row.n_qubits = cfg.min_qubits + static_cast<int>(rng() % static_cast<std::uint64_t>(span_q));
  row.layers = cfg.min_layers + static_cast<int>(rng() % static_cast<std::uint64_t>(span_l));
  const int n = row.n_qubits;

  const Circuit entangled_w = random_entangling_circuit(n, row.layers, rng);
  const Circuit product_w = random_local_layer(n, 1, rng);
  const StateVector input = random_state(n, rng);
  Circuit coupling(n);
  coupling.add_cnot(2, 1);

  SplitNoise no_others = identity_noise(n);
  no_others.first = random_unitary(2, rng);
  row.identity_noise_deviation = post_circuit_noise_deviation(entangled_w, input, no_others);

  row.draws.reserve(static_cast<std::size_t>(cfg.draws));
  for (int d = 0; d < cfg.draws; ++d) {
    const SplitNoise u = random_split_noise(n, rng, d % 2 == 1);
    const SplitNoise v = random_split_noise(n, rng, d % 2 == 1);
    DrawDeviation dev;
    dev.post_circuit = post_circuit_noise_deviation(entangled_w, input, u);
    dev.encoder_noise = encoder_noise_deviation(product_w, input, u, v);
    if (cfg.negative_controls) {
      dev.control_coupling = post_circuit_noise_deviation(entangled_w, input, u, &coupling);
      dev.control_entangled_w = encoder_noise_deviation(entangled_w, input, u, v);
    }
    row.post_circuit_max = std::max(row.post_circuit_max, dev.post_circuit);
    row.encoder_noise_max = std::max(row.encoder_noise_max, dev.encoder_noise);
    row.control_coupling_max = std::max(row.control_coupling_max, dev.control_coupling);
    row.control_entangled_w_max = std::max(row.control_entangled_w_max, dev.control_entangled_w);
    row.draws.push_back(dev);
  }
  return row;
}

inline InvarianceReport verify_readout_invariance(const InvarianceSweep& cfg, std::uint64_t seed, unsigned threads = 1) {
  if (cfg.min_qubits < 2 || cfg.max_qubits < cfg.min_qubits || cfg.max_qubits > kMaxQubits)
    throw size_error("invariance check needs 2 <= min_qubits <= max_qubits");
  if (cfg.min_layers < 0 || cfg.max_layers < cfg.min_layers) throw domain_error("invalid layer range");
  if (cfg.circuits < 1 || cfg.draws < 1) throw domain_error("circuits and draws must be >= 1");
  InvarianceReport report;
  report.rows.resize(static_cast<std::size_t>(cfg.circuits));
  parallel_for(report.rows.size(), threads,
               [&](std::size_t i) { report.rows[i] = verify_readout_invariance_one(cfg, seed, static_cast<int>(i)); });
  return report;
}

}  // namespace qnoise
