// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "isocollapse/foliation.hpp"
#include "isocollapse/pmeasure.hpp"
#include "isocollapse/rng.hpp"
#include "isocollapse/state_core.hpp"

namespace isocollapse {

/// An Euler-Maruyama multiplier went nonpositive; the step must be refined.
class StepSizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*!
 * States along a schedule under the Q-measure, where xi^1 and xi^2 are
 * standard Brownian motions in their volume clocks. The drivers carry the
 * realized (xi, omega) after each step; their B fields repeat xi since no
 * signal/noise split exists under Q.
 */
class SdeTrajectory {
public:
    SdeTrajectory(std::vector<StateAmplitudes> states, std::vector<PathPoint> drivers);

    [[nodiscard]] const std::vector<StateAmplitudes>& states() const noexcept { return states_; }
    [[nodiscard]] const std::vector<PathPoint>& drivers() const noexcept { return drivers_; }
    [[nodiscard]] const std::vector<double>& log_norm_sq() const noexcept { return log_norm_sq_; }
    [[nodiscard]] const StateAmplitudes& final_state() const noexcept { return states_.back(); }
    [[nodiscard]] std::size_t step_count() const noexcept { return states_.size() - 1; }

    /// Radon-Nikodym weight dP/dQ = <psi(sigma_f)|psi(sigma_f)>, in log form.
    [[nodiscard]] double log_weight() const noexcept { return log_norm_sq_.back(); }
    [[nodiscard]] double weight() const noexcept;

    /// InformationPath CSV columns followed by `norm_sq`.
    void write_csv(std::ostream& out) const;

private:
    std::vector<StateAmplitudes> states_;
    std::vector<PathPoint> drivers_;
    std::vector<double> log_norm_sq_;
};

/// One Euler-Maruyama step: each slot scales by 1 + 2 lambda s_a dxi - lambda^2 dw / 2.
/// Throws StepSizeError when a multiplier would be nonpositive.
StateAmplitudes sde_step(const StateAmplitudes& state, const MeasurementFrame& frame,
                         Region region, double d_omega, double d_xi);

/// Exact step: each slot scales by exp(2 lambda s_a dxi - lambda^2 dw).
StateAmplitudes exact_step(const StateAmplitudes& state, const MeasurementFrame& frame,
                           Region region, double d_omega, double d_xi);

/*!
 * Euler-Maruyama integration with dxi ~ N(0, d_omega) from the trial's
 * region substreams. A step that trips StepSizeError is halved, splitting
 * its increment with a Brownian-bridge draw from the bridge substream, and
 * retried; the driving path is unchanged by the refinement.
 */
SdeTrajectory integrate_q(const MeasurementFrame& frame, const FoliationSchedule& schedule,
                          const TrialKey& key);

/// Same increments as integrate_q, advanced with exact_step.
SdeTrajectory exact_q_evolve(const MeasurementFrame& frame, const FoliationSchedule& schedule,
                             const TrialKey& key);

/// A sample under Q with its log importance weight.
struct WeightedValue {
    double log_weight = 0.0;
    double value = 0.0;
};

struct ImportanceEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    /// Kish effective sample size (sum w)^2 / sum w^2.
    double effective_samples = 0.0;
};

/// Self-normalized estimate sum w f / sum w with a delta-method standard error.
ImportanceEstimate importance_estimate(std::span<const WeightedValue> samples);

/// P-expectation of `functional` estimated from Q-trajectories.
double importance_average(std::span<const SdeTrajectory> trajectories,
                          const std::function<double(const SdeTrajectory&)>& functional);

} // namespace isocollapse
