// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/qdynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace isocollapse {

namespace {

constexpr int kMaxRefinements = 40;

Particle particle_of(Region region) {
    return region == Region::one ? Particle::one : Particle::two;
}

void check_step(double d_omega) {
    if (!(d_omega > 0.0) || !std::isfinite(d_omega)) {
        throw std::invalid_argument("step volume must be positive and finite");
    }
}

// Applies an Euler-Maruyama step, subdividing with Brownian-bridge draws when
// the step is too coarse for the realized increment.
StateAmplitudes em_advance(const StateAmplitudes& state, const MeasurementFrame& frame,
                           Region region, double d_omega, double d_xi, CounterRng& bridge,
                           int depth) {
    try {
        return sde_step(state, frame, region, d_omega, d_xi);
    } catch (const StepSizeError&) {
        if (depth >= kMaxRefinements) {
            throw;
        }
    }
    const double half = 0.5 * d_omega;
    const double first = 0.5 * d_xi + std::sqrt(0.25 * d_omega) * bridge.normal();
    const StateAmplitudes mid = em_advance(state, frame, region, half, first, bridge, depth + 1);
    return em_advance(mid, frame, region, half, d_xi - first, bridge, depth + 1);
}

template <class Stepper>
SdeTrajectory evolve_q(const MeasurementFrame& frame, const FoliationSchedule& schedule,
                       const TrialKey& key, Stepper&& step) {
    CounterRng noise1 = key.stream(StreamTag::region1);
    CounterRng noise2 = key.stream(StreamTag::region2);
    std::vector<StateAmplitudes> states;
    std::vector<PathPoint> drivers;
    states.reserve(schedule.size() + 1);
    drivers.reserve(schedule.size() + 1);
    states.push_back(singlet_initial(frame));
    drivers.push_back(PathPoint{});
    PathPoint p;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const FoliationStep& s = schedule[k];
        const double d_xi =
            std::sqrt(s.d_omega) * (s.region == Region::one ? noise1 : noise2).normal();
        (s.region == Region::one ? p.xi1 : p.xi2) += d_xi;
        p.b1 = p.xi1;
        p.b2 = p.xi2;
        p.region = s.region;
        p.vol = schedule.volumes_after(k + 1);
        states.push_back(step(states.back(), s.region, s.d_omega, d_xi));
        drivers.push_back(p);
    }
    return SdeTrajectory(std::move(states), std::move(drivers));
}

} // namespace

SdeTrajectory::SdeTrajectory(std::vector<StateAmplitudes> states, std::vector<PathPoint> drivers)
    : states_(std::move(states)), drivers_(std::move(drivers)) {
    if (states_.empty() || states_.size() != drivers_.size()) {
        throw std::invalid_argument("trajectory needs one driver point per state");
    }
    log_norm_sq_.reserve(states_.size());
    for (const StateAmplitudes& s : states_) {
        log_norm_sq_.push_back(norm_sq(s).log_value);
    }
}

double SdeTrajectory::weight() const noexcept {
    return std::exp(log_weight());
}

void SdeTrajectory::write_csv(std::ostream& out) const {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    out << "step,region,omega1,omega2,B1,B2,xi1,xi2,norm_sq\n";
    for (std::size_t k = 0; k < states_.size(); ++k) {
        const PathPoint& p = drivers_[k];
        out << k << ',' << (k == 0 ? 0 : static_cast<int>(p.region)) << ',' << p.vol.omega1 << ','
            << p.vol.omega2 << ',' << p.b1 << ',' << p.b2 << ',' << p.xi1 << ',' << p.xi2 << ','
            << std::exp(log_norm_sq_[k]) << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

StateAmplitudes sde_step(const StateAmplitudes& state, const MeasurementFrame& frame,
                         Region region, double d_omega, double d_xi) {
    check_step(d_omega);
    const double lambda = frame.coupling();
    const Particle active = particle_of(region);
    const double drift = 0.5 * lambda * lambda * d_omega;
    StateAmplitudes::LogMagnitudes delta{};
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
        const double multiplier = 1.0 + 2.0 * lambda * slot_eigenvalue(slot, active) * d_xi - drift;
        if (!(multiplier > 0.0)) {
            if (std::isinf(state.log_mag()[slot])) {
                continue; // an exactly vanishing amplitude stays zero
            }
            throw StepSizeError("Euler-Maruyama multiplier is nonpositive; reduce the step");
        }
        delta[slot] = std::log(multiplier);
    }
    return state.shifted(delta);
}

StateAmplitudes exact_step(const StateAmplitudes& state, const MeasurementFrame& frame,
                           Region region, double d_omega, double d_xi) {
    check_step(d_omega);
    const double lambda = frame.coupling();
    const Particle active = particle_of(region);
    const double tau = lambda * lambda * d_omega;
    StateAmplitudes::LogMagnitudes delta{};
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
        delta[slot] = 2.0 * lambda * slot_eigenvalue(slot, active) * d_xi - tau;
    }
    return state.shifted(delta);
}

SdeTrajectory integrate_q(const MeasurementFrame& frame, const FoliationSchedule& schedule,
                          const TrialKey& key) {
    CounterRng bridge = key.stream(StreamTag::bridge);
    return evolve_q(frame, schedule, key,
                    [&](const StateAmplitudes& s, Region r, double dw, double dxi) {
                        return em_advance(s, frame, r, dw, dxi, bridge, 0);
                    });
}

SdeTrajectory exact_q_evolve(const MeasurementFrame& frame, const FoliationSchedule& schedule,
                             const TrialKey& key) {
    return evolve_q(frame, schedule, key,
                    [&](const StateAmplitudes& s, Region r, double dw, double dxi) {
                        return exact_step(s, frame, r, dw, dxi);
                    });
}

ImportanceEstimate importance_estimate(std::span<const WeightedValue> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("importance estimate needs at least one sample");
    }
    double top = -std::numeric_limits<double>::infinity();
    for (const WeightedValue& s : samples) {
        top = std::max(top, s.log_weight);
    }
    if (!std::isfinite(top)) {
        throw std::domain_error("importance weights are all zero");
    }
    double sum_w = 0.0, sum_wf = 0.0, sum_w2 = 0.0;
    for (const WeightedValue& s : samples) {
        const double w = std::exp(s.log_weight - top);
        sum_w += w;
        sum_wf += w * s.value;
        sum_w2 += w * w;
    }
    ImportanceEstimate est;
    est.mean = sum_wf / sum_w;
    double var_acc = 0.0;
    for (const WeightedValue& s : samples) {
        const double w = std::exp(s.log_weight - top);
        const double d = s.value - est.mean;
        var_acc += w * w * d * d;
    }
    est.std_error = std::sqrt(var_acc) / sum_w;
    est.effective_samples = sum_w * sum_w / sum_w2;
    return est;
}

double importance_average(std::span<const SdeTrajectory> trajectories,
                          const std::function<double(const SdeTrajectory&)>& functional) {
    std::vector<WeightedValue> samples;
    samples.reserve(trajectories.size());
    for (const SdeTrajectory& t : trajectories) {
        samples.push_back({t.log_weight(), functional(t)});
    }
    return importance_estimate(samples).mean;
}

} // namespace isocollapse
