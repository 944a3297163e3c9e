#pragma once

// Dense statevector engine.
//
// Wire numbering is 1-based. Wire 1 is the most significant bit of the
// amplitude index, so a state splits into blocks [upper; lower] where the
// lower half holds every basis state with the first qubit excited. The
// first-qubit projector is then a contiguous mask over the lower half.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnoise/errors.hpp"

namespace qnoise {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 20;
inline constexpr int kMaxOracleQubits = 10;
inline constexpr double kUnitarityTolerance = 1e-12;
inline constexpr double kNormalizationTolerance = 1e-9;

/// Row-major dense complex matrix. Used for explicit-operator oracles only;
/// simulation never materializes a 2^n x 2^n operator.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<cplx> values)
      : rows_(rows), cols_(cols), data_(values) {
    if (data_.size() != rows * cols) throw size_error("matrix initializer has wrong element count");
  }

  static Matrix identity(std::size_t dim) {
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Matrix adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw size_error("matrix product dimension mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t r = 0; r < a.rows_; ++r)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx v = a(r, k);
        if (v == cplx{}) continue;
        for (std::size_t c = 0; c < b.cols_; ++c) out(r, c) += v * b(k, c);
      }
    return out;
  }

  friend Matrix operator*(cplx s, Matrix m) {
    for (auto& v : m.data_) v *= s;
    return m;
  }

  /// Largest elementwise modulus of (a - b).
  friend double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw size_error("matrix shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data_.size(); ++i) worst = std::max(worst, std::abs(a.data_[i] - b.data_[i]));
    return worst;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// A validated 2x2 or 4x4 unitary. Storage is inline so gates are cheap to
/// build inside sampling loops.
class Gate {
 public:
  Gate(std::size_t dim, std::span<const cplx> row_major) : dim_(dim) {
    if (dim != 2 && dim != 4) throw size_error("gate must be 2x2 or 4x4, got dimension " + std::to_string(dim));
    if (row_major.size() != dim * dim) throw size_error("gate element count does not match dimension");
    for (std::size_t i = 0; i < row_major.size(); ++i) m_[i] = row_major[i];
    check_unitary();
  }

  Gate(std::size_t dim, std::initializer_list<cplx> row_major)
      : Gate(dim, std::span<const cplx>(row_major.begin(), row_major.size())) {}

  explicit Gate(const Matrix& m) : dim_(m.rows()) {
    if (m.rows() != m.cols() || (dim_ != 2 && dim_ != 4)) throw size_error("gate must be 2x2 or 4x4");
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) m_[r * dim_ + c] = m(r, c);
    check_unitary();
  }

  std::size_t dim() const { return dim_; }
  int arity() const { return dim_ == 2 ? 1 : 2; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return m_[r * dim_ + c]; }

  Matrix matrix() const {
    Matrix out(dim_, dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) out(r, c) = (*this)(r, c);
    return out;
  }

  /// max |(G^dagger G - I)_{rc}|
  double unitarity_defect() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) {
        cplx acc{};
        for (std::size_t k = 0; k < dim_; ++k) acc += std::conj((*this)(k, r)) * (*this)(k, c);
        if (r == c) acc -= 1.0;
        worst = std::max(worst, std::abs(acc));
      }
    return worst;
  }

  /// Product this * other (apply `other` first).
  Gate then_after(const Gate& other) const {
    if (other.dim_ != dim_) throw size_error("gate product dimension mismatch");
    std::array<cplx, 16> out{};
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c)
        for (std::size_t k = 0; k < dim_; ++k) out[r * dim_ + c] += (*this)(r, k) * other(k, c);
    return Gate(dim_, std::span<const cplx>(out.data(), dim_ * dim_));
  }

 private:
  void check_unitary() const {
    const double defect = unitarity_defect();
    if (!(defect <= kUnitarityTolerance))
      throw unitarity_error("gate is not unitary: max |G^dagger G - I| = " + std::to_string(defect));
  }

  std::size_t dim_;
  std::array<cplx, 16> m_{};
};

class StateVector {
 public:
  /// |0...0> on n qubits.
  explicit StateVector(int n_qubits) : n_qubits_(checked_qubits(n_qubits)), amps_(std::size_t{1} << n_qubits) {
    amps_[0] = 1.0;
  }

  /// Wraps explicit amplitudes. The length must be a power of two; the vector
  /// must be normalized unless `normalize` asks for it to be rescaled.
  static StateVector from_amplitudes(std::vector<cplx> amps, bool normalize = false) {
    std::size_t len = amps.size();
    int n = 0;
    while ((std::size_t{1} << n) < len) ++n;
    if (len == 0 || (std::size_t{1} << n) != len) throw size_error("amplitude count must be a power of two");
    StateVector s(checked_qubits(n), std::move(amps));
    const double nrm = s.norm_squared();
    if (normalize) {
      if (!(nrm > 0.0) || !std::isfinite(nrm)) throw normalization_error("cannot normalize a zero or non-finite vector");
      const double scale = 1.0 / std::sqrt(nrm);
      for (auto& a : s.amps_) a *= scale;
    } else if (!(std::abs(nrm - 1.0) <= kNormalizationTolerance)) {
      throw normalization_error("state is not normalized: norm^2 = " + std::to_string(nrm));
    }
    return s;
  }

  /// Wraps amplitudes without a norm check. Operations that need a
  /// normalized state still validate it.
  static StateVector from_raw_amplitudes(std::vector<cplx> amps) {
    std::size_t len = amps.size();
    int n = 0;
    while ((std::size_t{1} << n) < len) ++n;
    if (len == 0 || (std::size_t{1} << n) != len) throw size_error("amplitude count must be a power of two");
    return StateVector(checked_qubits(n), std::move(amps));
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const cplx> amplitudes() const { return amps_; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
  }

  /// In-place (I x .. x G x .. x I)|this>, G acting on `wire`.
  void apply_single_inplace(const Gate& g, int wire) {
    if (g.dim() != 2) throw size_error("single-qubit application needs a 2x2 gate");
    const std::size_t stride = bit_of(wire);
    const cplx g00 = g(0, 0), g01 = g(0, 1), g10 = g(1, 0), g11 = g(1, 1);
    const std::size_t dim = amps_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) {
        const cplx a0 = amps_[i];
        const cplx a1 = amps_[i + stride];
        amps_[i] = g00 * a0 + g01 * a1;
        amps_[i + stride] = g10 * a0 + g11 * a1;
      }
    }
  }

  /// In-place two-qubit gate. The gate's row index is 2*bit(first) + bit(second).
  void apply_two_inplace(const Gate& g, int first, int second) {
    if (g.dim() != 4) throw size_error("two-qubit application needs a 4x4 gate");
    if (first == second) throw index_error("two-qubit gate needs distinct wires, got " + std::to_string(first) + " twice");
    const std::size_t ma = bit_of(first);
    const std::size_t mb = bit_of(second);
    const std::size_t dim = amps_.size();
    for (std::size_t i = 0; i < dim; ++i) {
      if ((i & ma) || (i & mb)) continue;
      const std::size_t idx[4] = {i, i | mb, i | ma, i | ma | mb};
      cplx in[4];
      for (int k = 0; k < 4; ++k) in[k] = amps_[idx[k]];
      for (std::size_t r = 0; r < 4; ++r) {
        cplx acc{};
        for (std::size_t c = 0; c < 4; ++c) acc += g(r, c) * in[c];
        amps_[idx[r]] = acc;
      }
    }
  }

  /// Overwrites this state's amplitudes with `other`'s without reallocating
  /// when the sizes agree.
  void assign(const StateVector& other) {
    n_qubits_ = other.n_qubits_;
    amps_.assign(other.amps_.begin(), other.amps_.end());
  }

 private:
  StateVector(int n, std::vector<cplx> amps) : n_qubits_(n), amps_(std::move(amps)) {}

  static int checked_qubits(int n) {
    if (n < 1 || n > kMaxQubits)
      throw size_error("qubit count " + std::to_string(n) + " outside [1, " + std::to_string(kMaxQubits) + "]");
    return n;
  }

  std::size_t bit_of(int wire) const {
    if (wire < 1 || wire > n_qubits_)
      throw index_error("wire " + std::to_string(wire) + " outside [1, " + std::to_string(n_qubits_) + "]");
    return std::size_t{1} << (n_qubits_ - wire);
  }

  int n_qubits_;
  std::vector<cplx> amps_;
};

inline StateVector basis_state(int n_qubits) { return StateVector(n_qubits); }

inline StateVector apply_single(StateVector state, const Gate& gate, int wire) {
  state.apply_single_inplace(gate, wire);
  return state;
}

inline StateVector apply_two(StateVector state, const Gate& gate, int first, int second) {
  state.apply_two_inplace(gate, first, second);
  return state;
}

/// Explicit Kronecker product G_1 x G_2 x ... x G_n, wire 1 outermost.
inline Matrix kron_product(std::span<const Gate> gates) {
  const std::size_t n = gates.size();
  if (n < 1 || n > static_cast<std::size_t>(kMaxOracleQubits))
    throw size_error("explicit Kronecker product limited to 1.." + std::to_string(kMaxOracleQubits) + " factors");
  Matrix acc = gates[0].matrix();
  if (gates[0].dim() != 2) throw size_error("kron_product takes 2x2 gates");
  for (std::size_t k = 1; k < n; ++k) {
    const Gate& g = gates[k];
    if (g.dim() != 2) throw size_error("kron_product takes 2x2 gates");
    Matrix next(acc.rows() * 2, acc.cols() * 2);
    for (std::size_t r = 0; r < acc.rows(); ++r)
      for (std::size_t c = 0; c < acc.cols(); ++c)
        for (std::size_t gr = 0; gr < 2; ++gr)
          for (std::size_t gc = 0; gc < 2; ++gc) next(2 * r + gr, 2 * c + gc) = acc(r, c) * g(gr, gc);
    acc = std::move(next);
  }
  return acc;
}

inline Matrix kron_product(std::initializer_list<Gate> gates) {
  return kron_product(std::span<const Gate>(gates.begin(), gates.size()));
}

/// Dense matrix-vector product; oracle path for checking the in-place kernels.
inline StateVector apply_matrix(const Matrix& m, const StateVector& state) {
  if (m.rows() != state.dimension() || m.cols() != state.dimension())
    throw size_error("operator dimension does not match state");
  std::vector<cplx> out(state.dimension());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    cplx acc{};
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * state[c];
    out[r] = acc;
  }
  return StateVector::from_amplitudes(std::move(out), false);
}

/// <state| M_1 |state>, the probability of reading 1 on wire 1.
inline double prob_first_qubit_one(const StateVector& state) {
  const auto amps = state.amplitudes();
  double total = 0.0;
  double lower = 0.0;
  const std::size_t half = amps.size() / 2;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double w = std::norm(amps[i]);
    total += w;
    if (i >= half) lower += w;
  }
  if (!(std::abs(total - 1.0) <= kNormalizationTolerance))
    throw normalization_error("state is not normalized: norm^2 = " + std::to_string(total));
  return std::clamp(lower, 0.0, 1.0);
}

/// <a|b>, conjugate-linear in `a`.
inline cplx inner_product(const StateVector& a, const StateVector& b) {
  if (a.dimension() != b.dimension())
    throw size_error("inner product of states with dimensions " + std::to_string(a.dimension()) + " and " +
                     std::to_string(b.dimension()));
  cplx acc{};
  for (std::size_t i = 0; i < a.dimension(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

}  // namespace qnoise
