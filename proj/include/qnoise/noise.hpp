#pragma once

// Single-qubit noise model on wire 1: a random Pauli inserted on the encoder
// side (bit-flip channel) and a random-axis rotation with Gaussian angle
// jitter after the trained circuit (coherent channel).

#include <array>
#include <cmath>
#include <string>

#include "qnoise/errors.hpp"
#include "qnoise/rng.hpp"
#include "qnoise/statevec.hpp"

namespace qnoise {

inline constexpr double kPi = 3.14159265358979323846;

/// sigma_0 = I, sigma_1 = X, sigma_2 = Y, sigma_3 = Z.
inline Gate pauli_gate(int j) {
  const cplx i{0.0, 1.0};
  switch (j) {
    case 0: return Gate(2, {1.0, 0.0, 0.0, 1.0});
    case 1: return Gate(2, {0.0, 1.0, 1.0, 0.0});
    case 2: return Gate(2, {0.0, -i, i, 0.0});
    case 3: return Gate(2, {1.0, 0.0, 0.0, -1.0});
    default: throw index_error("Pauli index " + std::to_string(j) + " outside {0,1,2,3}");
  }
}

/// exp(-i angle/2 sigma_axis) for axis 1..3. Axis 0 would be a pure global
/// phase and is returned as the identity.
inline Gate coherent_gate(int axis, double angle) {
  if (axis < 0 || axis > 3) throw index_error("rotation axis " + std::to_string(axis) + " outside {0,1,2,3}");
  if (!std::isfinite(angle)) throw domain_error("rotation angle must be finite");
  if (axis == 0) return pauli_gate(0);
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const cplx mis{0.0, -s};  // -i sin
  switch (axis) {
    case 1: return Gate(2, {c, mis, mis, c});
    case 2: return Gate(2, {c, -s, s, c});
    default: return Gate(2, {cplx{c, -s}, 0.0, 0.0, cplx{c, s}});
  }
}

/// Outcome masses (1-3w, w, w, w) shared by both channels.
inline std::array<double, 4> pauli_masses(double w) { return {1.0 - 3.0 * w, w, w, w}; }

namespace detail {
inline int draw_four_way(double w, double u) {
  const double zero_mass = 1.0 - 3.0 * w;
  if (u < zero_mass) return 0;
  if (w <= 0.0) return 0;
  const int k = 1 + static_cast<int>((u - zero_mass) / w);
  return k > 3 ? 3 : k;
}
}  // namespace detail

class BitflipChannel {
 public:
  explicit BitflipChannel(double p = 0.0) : p_(p) {
    if (!(p >= 0.0 && p <= 1.0 / 3.0)) throw domain_error("bit-flip probability p=" + std::to_string(p) + " outside [0, 1/3]");
  }
  double p() const { return p_; }

  /// The margin keeps its sign only below p = 1/4, where 1-4p > 0.
  bool sign_preserving() const { return p_ < 0.25; }

 private:
  double p_;
};

class CoherentChannel {
 public:
  CoherentChannel() = default;
  CoherentChannel(double mu, double tau, double q) : mu_(mu), tau_(tau), q_(q) {
    if (!(mu >= -kPi && mu <= kPi)) throw domain_error("rotation offset mu=" + std::to_string(mu) + " outside [-pi, pi]");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw domain_error("jitter stddev tau must be finite and >= 0");
    if (!(q >= 0.0 && q <= 1.0 / 3.0)) throw domain_error("axis probability q=" + std::to_string(q) + " outside [0, 1/3]");
  }
  double mu() const { return mu_; }
  double tau() const { return tau_; }
  double q() const { return q_; }

 private:
  double mu_ = 0.0;
  double tau_ = 0.0;
  double q_ = 0.0;
};

/// Both channels together.
struct NoiseModel {
  BitflipChannel bitflip;
  CoherentChannel coherent;
};

/// One draw of (C, C', eps).
struct NoiseRealization {
  int pauli_index = 0;
  int axis_index = 0;
  double jitter = 0.0;
};

inline NoiseRealization sample_bitflip(const BitflipChannel& channel, CounterRng& rng) {
  NoiseRealization r;
  r.pauli_index = detail::draw_four_way(channel.p(), rng.uniform());
  return r;
}

/// Axis and jitter are drawn independently.
inline NoiseRealization sample_coherent(const CoherentChannel& channel, CounterRng& rng) {
  NoiseRealization r;
  r.axis_index = detail::draw_four_way(channel.q(), rng.uniform());
  r.jitter = channel.tau() > 0.0 ? rng.normal(0.0, channel.tau()) : 0.0;
  return r;
}

inline NoiseRealization sample_noise(const NoiseModel& model, CounterRng& rng) {
  NoiseRealization r = sample_bitflip(model.bitflip, rng);
  const NoiseRealization c = sample_coherent(model.coherent, rng);
  r.axis_index = c.axis_index;
  r.jitter = c.jitter;
  return r;
}

struct WeightedGate {
  double weight;
  Gate gate;
};

inline std::array<WeightedGate, 4> enumerate_bitflip(const BitflipChannel& channel) {
  const auto w = pauli_masses(channel.p());
  return {WeightedGate{w[0], pauli_gate(0)}, WeightedGate{w[1], pauli_gate(1)}, WeightedGate{w[2], pauli_gate(2)},
          WeightedGate{w[3], pauli_gate(3)}};
}

struct TrigExpectations {
  double cos_mean;  // E[cos(mu + eps)]
  double sin_mean;  // E[sin(mu + eps)]
};

/// Closed form for eps ~ N(0, tau^2): the characteristic function of eps
/// contributes the factor exp(-tau^2/2).
inline TrigExpectations gaussian_trig_expectations(double mu, double tau) {
  if (!(tau >= 0.0)) throw domain_error("tau must be >= 0");
  const double damp = std::exp(-0.5 * tau * tau);
  return {std::cos(mu) * damp, std::sin(mu) * damp};
}

}  // namespace qnoise
