// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/state_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace isocollapse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_or_neg_inf(double x) {
    return x > 0.0 ? std::log(x) : kNegInf;
}

// Weights exp(2 log_mag - max) for each slot, together with their sum.
struct RelativeWeights {
    std::array<double, kSlotCount> w{};
    double total = 0.0;
};

RelativeWeights relative_weights(const StateAmplitudes& state) {
    std::array<double, kSlotCount> twice{};
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        twice[i] = 2.0 * state.log_mag()[i];
    }
    const double top = *std::max_element(twice.begin(), twice.end());
    if (!std::isfinite(top)) {
        throw DegenerateStateError("state has no finite amplitude");
    }
    RelativeWeights out;
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        out.w[i] = std::exp(twice[i] - top);
        out.total += out.w[i];
    }
    return out;
}

} // namespace

MeasurementFrame::MeasurementFrame(double theta, double coupling)
    : theta_(theta), coupling_(coupling) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
        throw std::invalid_argument("theta must lie in [0, pi]");
    }
    if (!(coupling > 0.0) || !std::isfinite(coupling)) {
        throw std::invalid_argument("coupling must be positive and finite");
    }
}

double MeasurementFrame::cos_theta() const noexcept {
    return std::cos(theta_);
}

StateAmplitudes::StateAmplitudes(const LogMagnitudes& log_mag, const Phases& phase)
    : log_mag_(log_mag), phase_(phase) {
    const bool any_finite = std::any_of(log_mag_.begin(), log_mag_.end(),
                                        [](double v) { return std::isfinite(v); });
    if (!any_finite) {
        throw DegenerateStateError("state has no finite amplitude");
    }
}

std::complex<double> StateAmplitudes::amplitude(std::size_t slot) const {
    return phase_.at(slot) * std::exp(log_mag_.at(slot));
}

StateAmplitudes StateAmplitudes::shifted(const LogMagnitudes& delta) const {
    LogMagnitudes next = log_mag_;
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        next[i] += delta[i];
    }
    return StateAmplitudes(next, phase_);
}

double log_sum_exp(const double* first, const double* last) noexcept {
    if (first == last) {
        return kNegInf;
    }
    const double top = *std::max_element(first, last);
    if (!std::isfinite(top)) {
        return top;
    }
    double sum = 0.0;
    for (const double* it = first; it != last; ++it) {
        sum += std::exp(*it - top);
    }
    return top + std::log(sum);
}

StateAmplitudes singlet_initial(const MeasurementFrame& frame) {
    const double half = 0.5 * frame.theta();
    const double s = std::sin(half) / std::numbers::sqrt2;
    const double c = std::cos(half) / std::numbers::sqrt2;
    using C = std::complex<double>;
    // (-i sin, cos, -cos, +i sin) / sqrt(2); signs live in the phases.
    const StateAmplitudes::LogMagnitudes log_mag{log_or_neg_inf(s), log_or_neg_inf(c),
                                                 log_or_neg_inf(c), log_or_neg_inf(s)};
    const StateAmplitudes::Phases phase{C{0.0, -1.0}, C{1.0, 0.0}, C{-1.0, 0.0}, C{0.0, 1.0}};
    return StateAmplitudes(log_mag, phase);
}

StateAmplitudes closed_form_state(const MeasurementFrame& frame, double xi1, double xi2,
                                  const VolumePair& vol) {
    if (!vol.valid()) {
        throw std::invalid_argument("volumes must be nonnegative");
    }
    const double lambda = frame.coupling();
    const double tau1 = lambda * lambda * vol.omega1;
    const double tau2 = lambda * lambda * vol.omega2;
    StateAmplitudes::LogMagnitudes delta{};
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
        delta[slot] = 2.0 * lambda * slot_eigenvalue(slot, Particle::one) * xi1 - tau1
                    + 2.0 * lambda * slot_eigenvalue(slot, Particle::two) * xi2 - tau2;
    }
    return singlet_initial(frame).shifted(delta);
}

NormSq norm_sq(const StateAmplitudes& state) {
    std::array<double, kSlotCount> twice{};
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        twice[i] = 2.0 * state.log_mag()[i];
    }
    NormSq out;
    out.log_value = log_sum_exp(twice.data(), twice.data() + twice.size());
    const double linear = std::exp(out.log_value);
    if (std::isfinite(linear) && linear > 0.0) {
        out.value = linear;
    }
    return out;
}

std::array<double, kSlotCount> slot_probabilities(const StateAmplitudes& state) {
    const RelativeWeights rw = relative_weights(state);
    std::array<double, kSlotCount> p{};
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        p[i] = rw.w[i] / rw.total;
    }
    return p;
}

double projector_expectation(const StateAmplitudes& state, Particle particle, Sign sign) {
    const RelativeWeights rw = relative_weights(state);
    const double wanted = sign == Sign::plus ? 0.5 : -0.5;
    double selected = 0.0;
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        if (slot_eigenvalue(i, particle) == wanted) {
            selected += rw.w[i];
        }
    }
    return selected / rw.total;
}

double spin_expectation(const StateAmplitudes& state, Particle particle) {
    const RelativeWeights rw = relative_weights(state);
    double up = 0.0;
    double down = 0.0;
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        (slot_eigenvalue(i, particle) > 0.0 ? up : down) += rw.w[i];
    }
    return 0.5 * (up - down) / rw.total;
}

double joint_spin_expectation(const StateAmplitudes& state) {
    const RelativeWeights rw = relative_weights(state);
    double acc = 0.0;
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        acc += slot_eigenvalue(i, Particle::one) * slot_eigenvalue(i, Particle::two) * rw.w[i];
    }
    return acc / rw.total;
}

} // namespace isocollapse
