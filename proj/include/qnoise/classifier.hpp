#pragma once

// Single-qubit-readout binary classifier: encoder, product-form ansatz, the
// margin m = P(first qubit reads 1) - 1/2 and its sign.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnoise/circuit.hpp"
#include "qnoise/errors.hpp"
#include "qnoise/noise.hpp"
#include "qnoise/statevec.hpp"

namespace qnoise {

struct EncoderSpec {
  enum class Kind { per_qubit_angle, raw_state };

  Kind kind = Kind::per_qubit_angle;
  int n_qubits = 1;
  /// feature k is written to wire feature_wires[k]; empty means feature k -> wire k+1.
  std::vector<int> feature_wires;
};

/// Per-qubit angle encoding: Ry(x_k) on the mapped wire, starting from |0...0>.
inline StateVector encode(std::span<const double> features, const EncoderSpec& spec) {
  if (spec.kind != EncoderSpec::Kind::per_qubit_angle) throw unsupported_configuration_error("raw-state encoder takes a state, not features");
  if (features.size() != static_cast<std::size_t>(spec.n_qubits))
    throw size_error("feature dimension " + std::to_string(features.size()) + " != qubit count " + std::to_string(spec.n_qubits));
  if (!spec.feature_wires.empty() && spec.feature_wires.size() != features.size())
    throw size_error("feature-to-wire map has the wrong length");
  StateVector s(spec.n_qubits);
  for (std::size_t k = 0; k < features.size(); ++k) {
    const int wire = spec.feature_wires.empty() ? static_cast<int>(k) + 1 : spec.feature_wires[k];
    s.apply_single_inplace(ry_gate(features[k]), wire);
  }
  return s;
}

/// Raw-state encoding: passthrough after size and norm checks.
inline StateVector encode(const StateVector& state, const EncoderSpec& spec) {
  if (spec.kind != EncoderSpec::Kind::raw_state) throw unsupported_configuration_error("angle encoder takes features, not a state");
  if (state.n_qubits() != spec.n_qubits) throw size_error("state qubit count does not match encoder");
  if (!(std::abs(state.norm_squared() - 1.0) <= kNormalizationTolerance)) throw normalization_error("raw input state is not normalized");
  return state;
}

/// Margin value, bounded by +-1/2.
struct Margin {
  double value = 0.0;
};

/// sign with the tie-break sign(0) = -1.
inline int classify(Margin m) { return m.value > 0.0 ? +1 : -1; }

/// W(theta) = W_1 x ... x W_n with W_k = Rz(alpha_k) Ry(beta_k) Rz(gamma_k),
/// optionally followed by CNOTs. theta is laid out as
/// (alpha_1, beta_1, gamma_1, alpha_2, ...).
class Ansatz {
 public:
  explicit Ansatz(int n_qubits, std::vector<std::pair<int, int>> entanglers = {})
      : n_qubits_(n_qubits), entanglers_(std::move(entanglers)) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) throw size_error("ansatz qubit count out of range");
    for (auto [c, t] : entanglers_)
      if (c < 1 || c > n_qubits || t < 1 || t > n_qubits || c == t) throw index_error("invalid entangler placement");
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t parameter_count() const { return 3 * static_cast<std::size_t>(n_qubits_); }
  bool product_form() const { return entanglers_.empty(); }
  const std::vector<std::pair<int, int>>& entanglers() const { return entanglers_; }

  /// Fused W_k for one wire.
  Gate wire_unitary(int wire, std::span<const double> theta) const {
    check_theta(theta);
    const std::size_t base = 3 * static_cast<std::size_t>(wire - 1);
    return rz_gate(theta[base]).then_after(ry_gate(theta[base + 1])).then_after(rz_gate(theta[base + 2]));
  }

  Circuit circuit(std::span<const double> theta) const {
    check_theta(theta);
    Circuit c(n_qubits_);
    for (int w = 1; w <= n_qubits_; ++w) c.add(wire_unitary(w, theta), w);
    for (auto [ctl, tgt] : entanglers_) c.add_cnot(ctl, tgt);
    return c;
  }

  void apply_inplace(StateVector& state, std::span<const double> theta) const {
    if (state.n_qubits() != n_qubits_) throw size_error("state and ansatz register sizes differ");
    for (int w = 1; w <= n_qubits_; ++w) state.apply_single_inplace(wire_unitary(w, theta), w);
    if (!entanglers_.empty()) {
      const Gate cx = cnot_gate();
      for (auto [ctl, tgt] : entanglers_) state.apply_two_inplace(cx, ctl, tgt);
    }
  }

  void check_theta(std::span<const double> theta) const {
    if (theta.size() != parameter_count())
      throw shape_error("expected " + std::to_string(parameter_count()) + " parameters, got " + std::to_string(theta.size()));
  }

 private:
  int n_qubits_;
  std::vector<std::pair<int, int>> entanglers_;
};

inline Margin margin(const Ansatz& ansatz, std::span<const double> theta, const StateVector& state) {
  ansatz.check_theta(theta);
  StateVector out = state;
  ansatz.apply_inplace(out, theta);
  return {prob_first_qubit_one(out) - 0.5};
}

/// Margin of (sigma_j x I)|state>. Needs a product-form ansatz.
inline Margin margin_conjugated(const Ansatz& ansatz, std::span<const double> theta, const StateVector& state, int j) {
  if (!ansatz.product_form())
    throw unsupported_configuration_error("conjugated margins are defined for product-form ansatz only");
  const Gate sigma = pauli_gate(j);
  if (j == 0) return margin(ansatz, theta, state);
  return margin(ansatz, theta, apply_single(state, sigma, 1));
}

}  // namespace qnoise
