#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qnoise/errors.hpp"
#include "qnoise/random.hpp"
#include "qnoise/rng.hpp"
#include "qnoise/statevec.hpp"

namespace qnoise {

inline Gate rx_gate(double angle) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  return Gate(2, {c, cplx{0.0, -s}, cplx{0.0, -s}, c});
}

inline Gate ry_gate(double angle) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  return Gate(2, {c, -s, s, c});
}

inline Gate rz_gate(double angle) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  return Gate(2, {cplx{c, -s}, 0.0, 0.0, cplx{c, s}});
}

/// Control is the first wire of the pair.
inline Gate cnot_gate() {
  return Gate(4, {1.0, 0.0, 0.0, 0.0,  //
                  0.0, 1.0, 0.0, 0.0,  //
                  0.0, 0.0, 0.0, 1.0,  //
                  0.0, 0.0, 1.0, 0.0});
}

struct Operation {
  Gate gate;
  int first;
  int second = 0;  // 0 for single-qubit operations

  bool is_two_qubit() const { return second != 0; }
};

/// Ordered list of gate placements on a fixed register.
class Circuit {
 public:
  explicit Circuit(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) throw size_error("circuit qubit count out of range");
  }

  int n_qubits() const { return n_qubits_; }
  const std::vector<Operation>& operations() const { return ops_; }
  bool empty() const { return ops_.empty(); }

  Circuit& add(const Gate& g, int wire) {
    check_wire(wire);
    if (g.arity() != 1) throw size_error("expected a single-qubit gate");
    ops_.push_back({g, wire, 0});
    return *this;
  }

  Circuit& add(const Gate& g, int first, int second) {
    check_wire(first);
    check_wire(second);
    if (first == second) throw index_error("two-qubit gate needs distinct wires");
    if (g.arity() != 2) throw size_error("expected a two-qubit gate");
    ops_.push_back({g, first, second});
    return *this;
  }

  Circuit& add_cnot(int control, int target) { return add(cnot_gate(), control, target); }

  Circuit& append(const Circuit& other) {
    if (other.n_qubits_ != n_qubits_) throw size_error("cannot append circuits on different registers");
    ops_.insert(ops_.end(), other.ops_.begin(), other.ops_.end());
    return *this;
  }

  bool has_entangler() const {
    for (const auto& op : ops_)
      if (op.is_two_qubit()) return true;
    return false;
  }

  void apply_inplace(StateVector& state) const {
    if (state.n_qubits() != n_qubits_) throw size_error("circuit and state register sizes differ");
    for (const auto& op : ops_) {
      if (op.is_two_qubit())
        state.apply_two_inplace(op.gate, op.first, op.second);
      else
        state.apply_single_inplace(op.gate, op.first);
    }
  }

  StateVector apply(StateVector state) const {
    apply_inplace(state);
    return state;
  }

 private:
  void check_wire(int wire) const {
    if (wire < 1 || wire > n_qubits_)
      throw index_error("wire " + std::to_string(wire) + " outside [1, " + std::to_string(n_qubits_) + "]");
  }

  int n_qubits_;
  std::vector<Operation> ops_;
};

/// One Haar-random single-qubit gate on every wire in [from, n].
inline Circuit random_local_layer(int n_qubits, int from_wire, CounterRng& rng) {
  Circuit c(n_qubits);
  for (int w = from_wire; w <= n_qubits; ++w) c.add(random_unitary(2, rng), w);
  return c;
}

/// `layers` repetitions of (random local layer, CNOT chain 1->2->...->n),
/// closed by one more random local layer.
inline Circuit random_entangling_circuit(int n_qubits, int layers, CounterRng& rng) {
  if (n_qubits < 2) throw size_error("an entangling circuit needs at least two qubits");
  Circuit c(n_qubits);
  for (int l = 0; l < layers; ++l) {
    c.append(random_local_layer(n_qubits, 1, rng));
    for (int w = 1; w < n_qubits; ++w) c.add_cnot(w, w + 1);
  }
  c.append(random_local_layer(n_qubits, 1, rng));
  return c;
}

}  // namespace qnoise
