#pragma once

// Haar-random unitaries and states, used by the data generator, the
// verification sweeps and the tests.

#include <cmath>
#include <vector>

#include "qnoise/rng.hpp"
#include "qnoise/statevec.hpp"

namespace qnoise {

/// Haar-distributed d x d unitary (d = 2 or 4) via Gram-Schmidt on a complex
/// Gaussian matrix, column by column.
inline Gate random_unitary(std::size_t dim, CounterRng& rng) {
  std::vector<cplx> cols(dim * dim);  // column-major scratch
  for (auto& v : cols) v = cplx{rng.normal(), rng.normal()};
  for (std::size_t c = 0; c < dim; ++c) {
    cplx* col = &cols[c * dim];
    for (std::size_t prev = 0; prev < c; ++prev) {
      const cplx* basis = &cols[prev * dim];
      cplx proj{};
      for (std::size_t r = 0; r < dim; ++r) proj += std::conj(basis[r]) * col[r];
      for (std::size_t r = 0; r < dim; ++r) col[r] -= proj * basis[r];
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < dim; ++r) nrm += std::norm(col[r]);
    nrm = std::sqrt(nrm);
    for (std::size_t r = 0; r < dim; ++r) col[r] /= nrm;
  }
  std::vector<cplx> row_major(dim * dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) row_major[r * dim + c] = cols[c * dim + r];
  return Gate(dim, row_major);
}

/// Haar-random pure state on n qubits (generally entangled).
inline StateVector random_state(int n_qubits, CounterRng& rng) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw size_error("qubit count out of range");
  std::vector<cplx> amps(std::size_t{1} << n_qubits);
  for (auto& a : amps) a = cplx{rng.normal(), rng.normal()};
  return StateVector::from_amplitudes(std::move(amps), true);
}

/// Tensor product of independent Haar-random single-qubit states.
inline StateVector random_product_state(int n_qubits, CounterRng& rng) {
  StateVector s(n_qubits);
  for (int w = 1; w <= n_qubits; ++w) s.apply_single_inplace(random_unitary(2, rng), w);
  return s;
}

}  // namespace qnoise
