// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>

namespace isocollapse {

enum class Particle { one = 1, two = 2 };
enum class Sign { plus, minus };

/// Raised when every amplitude of a state is exactly zero.
class DegenerateStateError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/*!
 * Two-particle product basis in the (n1, n2) eigenbasis. Slot order is fixed
 * everywhere in the library: (++), (+-), (-+), (--), first sign for
 * particle 1.
 */
inline constexpr std::size_t kSlotCount = 4;

/// Eigenvalue (+1/2 or -1/2) of n_a . S_a in the given slot.
constexpr double slot_eigenvalue(std::size_t slot, Particle particle) noexcept {
    const bool minus = particle == Particle::one ? (slot >= 2) : (slot % 2 == 1);
    return minus ? -0.5 : 0.5;
}

/// Angle between the two measurement axes and the collapse coupling.
class MeasurementFrame {
public:
    /// Throws std::invalid_argument unless theta in [0, pi] and coupling > 0.
    MeasurementFrame(double theta, double coupling);

    [[nodiscard]] double theta() const noexcept { return theta_; }
    [[nodiscard]] double coupling() const noexcept { return coupling_; }
    [[nodiscard]] double cos_theta() const noexcept;

private:
    double theta_;
    double coupling_;
};

/// Spacetime 4-volumes swept in R1 and R2 (units of 1/lambda^2).
struct VolumePair {
    double omega1 = 0.0;
    double omega2 = 0.0;

    [[nodiscard]] bool valid() const noexcept { return omega1 >= 0.0 && omega2 >= 0.0; }
    friend bool operator==(const VolumePair&, const VolumePair&) = default;
};

/*!
 * Unnormalized two-isospin state stored as log-magnitudes plus fixed unit
 * phases. A log-magnitude of -inf denotes an exactly vanishing amplitude.
 */
class StateAmplitudes {
public:
    using LogMagnitudes = std::array<double, kSlotCount>;
    using Phases = std::array<std::complex<double>, kSlotCount>;

    /// Throws DegenerateStateError if no log-magnitude is finite.
    StateAmplitudes(const LogMagnitudes& log_mag, const Phases& phase);

    [[nodiscard]] const LogMagnitudes& log_mag() const noexcept { return log_mag_; }
    [[nodiscard]] const Phases& phase() const noexcept { return phase_; }
    [[nodiscard]] double log_mag(std::size_t slot) const { return log_mag_.at(slot); }

    /// Linear-domain amplitude; overflows to inf for huge log-magnitudes.
    [[nodiscard]] std::complex<double> amplitude(std::size_t slot) const;

    /// Same phases, log-magnitudes shifted slot by slot.
    [[nodiscard]] StateAmplitudes shifted(const LogMagnitudes& delta) const;

private:
    LogMagnitudes log_mag_;
    Phases phase_;
};

/// Squared norm; `value` is empty when exp(log_value) is not representable.
struct NormSq {
    double log_value = 0.0;
    std::optional<double> value;
};

/// Stable log(sum(exp(x))) over extended reals; -inf when all terms are -inf.
double log_sum_exp(const double* first, const double* last) noexcept;

StateAmplitudes singlet_initial(const MeasurementFrame& frame);

/// Exact solution of the collapse dynamics at information values (xi1, xi2)
/// and volumes vol, starting from the singlet.
StateAmplitudes closed_form_state(const MeasurementFrame& frame, double xi1, double xi2,
                                  const VolumePair& vol);

NormSq norm_sq(const StateAmplitudes& state);

/// <n_a . S_a> for the normalized state, in [-1/2, 1/2].
double spin_expectation(const StateAmplitudes& state, Particle particle);

/// <P^{+/-}_{n_a}> for the normalized state, in [0, 1].
double projector_expectation(const StateAmplitudes& state, Particle particle, Sign sign);

/// <(n1 . S1)(n2 . S2)> for the normalized state, in [-1/4, 1/4].
double joint_spin_expectation(const StateAmplitudes& state);

/// Normalized slot probabilities |amp|^2 / <psi|psi>.
std::array<double, kSlotCount> slot_probabilities(const StateAmplitudes& state);

} // namespace isocollapse
