#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qnoise/qnoise.hpp"

using namespace qnoise;

namespace {

const double kR = 1.0 / std::sqrt(2.0);

StateVector state_of(std::vector<cplx> a) { return StateVector::from_amplitudes(std::move(a)); }

void expect_amps(const StateVector& s, const std::vector<cplx>& want, double tol = 1e-15) {
  ASSERT_EQ(s.dimension(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(s[i].real(), want[i].real(), tol) << "index " << i;
    EXPECT_NEAR(s[i].imag(), want[i].imag(), tol) << "index " << i;
  }
}

}  // namespace

TEST(BasisState, OneQubit) { expect_amps(basis_state(1), {1.0, 0.0}); }

TEST(BasisState, TwoQubits) { expect_amps(basis_state(2), {1.0, 0.0, 0.0, 0.0}); }

TEST(BasisState, RangeEnforced) {
  EXPECT_THROW(basis_state(21), size_error);
  EXPECT_THROW(basis_state(0), size_error);
  EXPECT_NO_THROW(basis_state(20));
}

TEST(FromAmplitudes, RejectsBadInput) {
  EXPECT_THROW(StateVector::from_amplitudes({1.0, 0.0, 0.0}), size_error);
  EXPECT_THROW(StateVector::from_amplitudes({1.0, 1.0}), normalization_error);
  EXPECT_NEAR(StateVector::from_amplitudes({1.0, 1.0}, true).norm_squared(), 1.0, 1e-15);
}

TEST(Gate, RejectsNonUnitary) {
  EXPECT_THROW(Gate(2, {1.0, 1.0, 0.0, 1.0}), unitarity_error);
  EXPECT_THROW(Gate(3, {1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0}), size_error);
}

TEST(ApplySingle, PauliXOnWireOne) {
  expect_amps(apply_single(basis_state(2), pauli_gate(1), 1), {0.0, 0.0, 1.0, 0.0});
}

TEST(ApplySingle, PauliZPhaseOnWireTwo) {
  const StateVector s = state_of({kR, kR, 0.0, 0.0});
  expect_amps(apply_single(s, pauli_gate(3), 2), {kR, -kR, 0.0, 0.0});
}

TEST(ApplySingle, WireOutOfRange) {
  EXPECT_THROW(apply_single(basis_state(2), pauli_gate(1), 0), index_error);
  EXPECT_THROW(apply_single(basis_state(2), pauli_gate(1), 3), index_error);
  EXPECT_THROW(apply_single(basis_state(2), cnot_gate(), 1), size_error);
}

TEST(ApplySingle, MatchesEmbeddedMatrixOracle) {
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    CounterRng rng(11, {trial});
    const int n = 1 + static_cast<int>(trial % 4);
    const StateVector s = random_state(n, rng);
    const Gate g = random_unitary(2, rng);
    for (int w = 1; w <= n; ++w) {
      const auto want = oracle::matvec(oracle::embed_single(g, w, n), oracle::amps(s));
      EXPECT_LE(oracle::max_diff(oracle::amps(apply_single(s, g, w)), want), 1e-12);
    }
  }
}

TEST(ApplySingle, ThreeQubitKronOracle) {
  CounterRng rng(3, {0});
  const StateVector s = random_state(3, rng);
  const Gate g = random_unitary(2, rng);
  const Gate id = pauli_gate(0);
  const std::vector<Matrix> full = {kron_product({g, id, id}), kron_product({id, g, id}), kron_product({id, id, g})};
  for (int w = 1; w <= 3; ++w) {
    const auto want = oracle::matvec(full[w - 1], oracle::amps(s));
    EXPECT_LE(oracle::max_diff(oracle::amps(apply_single(s, g, w)), want), 1e-12);
  }
}

TEST(ApplyTwo, CnotTruthTable) {
  expect_amps(apply_two(state_of({0.0, 0.0, 1.0, 0.0}), cnot_gate(), 1, 2), {0.0, 0.0, 0.0, 1.0});
  expect_amps(apply_two(state_of({0.0, 1.0, 0.0, 0.0}), cnot_gate(), 1, 2), {0.0, 1.0, 0.0, 0.0});
  // Reversed roles: control on wire 2.
  expect_amps(apply_two(state_of({0.0, 1.0, 0.0, 0.0}), cnot_gate(), 2, 1), {0.0, 0.0, 0.0, 1.0});
}

TEST(ApplyTwo, BellPreparation) {
  const StateVector s = state_of({kR, 0.0, kR, 0.0});
  expect_amps(apply_two(s, cnot_gate(), 1, 2), {kR, 0.0, 0.0, kR});
}

TEST(ApplyTwo, EqualOrInvalidWires) {
  EXPECT_THROW(apply_two(basis_state(3), cnot_gate(), 2, 2), index_error);
  EXPECT_THROW(apply_two(basis_state(3), cnot_gate(), 1, 4), index_error);
  EXPECT_THROW(apply_two(basis_state(3), pauli_gate(1), 1, 2), size_error);
}

TEST(ApplyTwo, RandomOnWiresTwoThreeMatchesEmbedding) {
  CounterRng rng(5, {0});
  const StateVector s = random_state(3, rng);
  const Gate g = random_unitary(4, rng);
  const auto want = oracle::matvec(oracle::embed_two(g, 2, 3, 3), oracle::amps(s));
  EXPECT_LE(oracle::max_diff(oracle::amps(apply_two(s, g, 2, 3)), want), 1e-12);
  // Same thing written as identity on wire 1 times the 4x4 block.
  const Matrix block = g.matrix();
  Matrix full(8, 8);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) full(r, c) = full(4 + r, 4 + c) = block(r, c);
  EXPECT_LE(oracle::max_diff(oracle::matvec(full, oracle::amps(s)), want), 1e-12);
}

TEST(ApplyTwo, AllOrderedPairsMatchEmbedding) {
  for (std::uint64_t trial = 0; trial < 60; ++trial) {
    CounterRng rng(17, {trial});
    const int n = 2 + static_cast<int>(trial % 3);
    const StateVector s = random_state(n, rng);
    const Gate g = random_unitary(4, rng);
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b) {
        if (a == b) continue;
        const auto want = oracle::matvec(oracle::embed_two(g, a, b, n), oracle::amps(s));
        EXPECT_LE(oracle::max_diff(oracle::amps(apply_two(s, g, a, b)), want), 1e-12) << a << "," << b;
      }
  }
}

TEST(KronProduct, IdentityTimesIdentity) {
  EXPECT_EQ(max_abs_diff(kron_product({pauli_gate(0), pauli_gate(0)}), Matrix::identity(4)), 0.0);
}

TEST(KronProduct, XTensorZBlockForm) {
  const Matrix m = kron_product({pauli_gate(1), pauli_gate(3)});
  const Matrix want(4, 4, {0.0, 0.0, 1.0, 0.0,   //
                           0.0, 0.0, 0.0, -1.0,  //
                           1.0, 0.0, 0.0, 0.0,   //
                           0.0, -1.0, 0.0, 0.0});
  EXPECT_EQ(max_abs_diff(m, want), 0.0);
}

TEST(KronProduct, AgreesWithSequentialApplication) {
  CounterRng rng(9, {0});
  const Gate g = random_unitary(2, rng), h = random_unitary(2, rng);
  const StateVector s = random_state(2, rng);
  const auto via_matrix = oracle::matvec(kron_product({g, h}), oracle::amps(s));
  const auto via_kernel = oracle::amps(apply_single(apply_single(s, g, 1), h, 2));
  EXPECT_LE(oracle::max_diff(via_matrix, via_kernel), 1e-12);
}

TEST(KronProduct, MatchesEntrywiseOracleUpToFourWires) {
  for (std::uint64_t trial = 0; trial < 40; ++trial) {
    CounterRng rng(21, {trial});
    const int n = 1 + static_cast<int>(trial % 4);
    std::vector<Gate> gs;
    for (int k = 0; k < n; ++k) gs.push_back(random_unitary(2, rng));
    EXPECT_LE(max_abs_diff(kron_product(gs), oracle::kron_entrywise(gs)), 1e-12);
    StateVector s = random_state(n, rng);
    const auto want = oracle::matvec(kron_product(gs), oracle::amps(s));
    for (int w = 1; w <= n; ++w) s.apply_single_inplace(gs[w - 1], w);
    EXPECT_LE(oracle::max_diff(oracle::amps(s), want), 1e-12);
  }
}

TEST(KronProduct, SizeLimit) {
  std::vector<Gate> eleven(11, pauli_gate(0));
  EXPECT_THROW(kron_product(eleven), size_error);
  EXPECT_THROW(kron_product(std::span<const Gate>{}), size_error);
}

TEST(ProbFirstQubitOne, GroundState) { EXPECT_EQ(prob_first_qubit_one(basis_state(3)), 0.0); }

TEST(ProbFirstQubitOne, ExcitedFirstQubit) {
  EXPECT_EQ(prob_first_qubit_one(apply_single(basis_state(2), pauli_gate(1), 1)), 1.0);
}

TEST(ProbFirstQubitOne, Bell) { EXPECT_NEAR(prob_first_qubit_one(state_of({kR, 0.0, 0.0, kR})), 0.5, 1e-15); }

TEST(ProbFirstQubitOne, RejectsUnnormalized) {
  EXPECT_THROW(prob_first_qubit_one(StateVector::from_raw_amplitudes({1.0, 0.0, 0.0, 1e-4})), normalization_error);
  EXPECT_THROW(prob_first_qubit_one(StateVector::from_raw_amplitudes({0.5, 0.0})), normalization_error);
  // Deviations inside the 1e-9 tolerance are accepted.
  EXPECT_NO_THROW(prob_first_qubit_one(StateVector::from_raw_amplitudes({std::sqrt(1.0 + 1e-10), 0.0})));
}

TEST(ProbFirstQubitOne, ComplementSumsToOne) {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterRng rng(31, {trial});
    const StateVector s = random_state(1 + static_cast<int>(trial % 5), rng);
    const auto a = s.amplitudes();
    double upper = 0.0;
    for (std::size_t i = 0; i < a.size() / 2; ++i) upper += std::norm(a[i]);
    EXPECT_NEAR(prob_first_qubit_one(s) + upper, 1.0, 1e-12);
  }
}

TEST(ProbFirstQubitOne, DiagonalGatesOffWireOneDoNotMoveIt) {
  CounterRng rng(41, {0});
  const StateVector s = random_state(4, rng);
  const double p = prob_first_qubit_one(s);
  for (int w = 2; w <= 4; ++w) {
    EXPECT_NEAR(prob_first_qubit_one(apply_single(s, pauli_gate(3), w)), p, 1e-15);
    EXPECT_NEAR(prob_first_qubit_one(apply_single(s, rz_gate(0.7 * w), w)), p, 1e-15);
  }
}

TEST(InnerProduct, Basics) {
  CounterRng rng(1, {0});
  const StateVector s = random_state(3, rng);
  EXPECT_NEAR(std::abs(inner_product(s, s) - 1.0), 0.0, 1e-14);
  const StateVector zero = basis_state(2);
  const StateVector eleven = state_of({0.0, 0.0, 0.0, 1.0});
  EXPECT_EQ(inner_product(zero, eleven), cplx(0.0));
  EXPECT_THROW(inner_product(basis_state(2), basis_state(3)), size_error);
}

TEST(InnerProduct, MatchesDirectSummation) {
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    CounterRng rng(2, {trial});
    const StateVector a = random_state(3, rng), b = random_state(3, rng);
    cplx want{};
    for (std::size_t i = 0; i < 8; ++i) want += std::conj(a[i]) * b[i];
    EXPECT_LE(std::abs(inner_product(a, b) - want), 1e-15);
    EXPECT_LE(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))), 1e-15);
    EXPECT_LE(std::abs(inner_product(a, b)), 1.0 + 1e-12);
  }
}

TEST(Invariants, NormPreservedOverLongSequences) {
  CounterRng rng(77, {0});
  StateVector s = random_state(5, rng);
  for (int step = 0; step < 500; ++step) {
    if (rng() % 2) {
      s.apply_single_inplace(random_unitary(2, rng), 1 + static_cast<int>(rng() % 5));
    } else {
      const int a = 1 + static_cast<int>(rng() % 5);
      const int b = 1 + static_cast<int>((a + rng() % 4) % 5);
      s.apply_two_inplace(random_unitary(4, rng), a, b);
    }
  }
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
}
