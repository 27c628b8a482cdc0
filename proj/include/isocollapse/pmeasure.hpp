// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "isocollapse/foliation.hpp"
#include "isocollapse/rng.hpp"
#include "isocollapse/state_core.hpp"

namespace isocollapse {

/// Isospin outcome of a single particle: +1/2 or -1/2.
enum class Spin : int { down = -1, up = 1 };

constexpr double value(Spin s) noexcept { return 0.5 * static_cast<int>(s); }

/// The hidden outcome pair (s1, s2) that the information processes carry.
struct HiddenOutcome {
    Spin s1 = Spin::up;
    Spin s2 = Spin::down;

    friend bool operator==(const HiddenOutcome&, const HiddenOutcome&) = default;
};

/// Slot index (++, +-, -+, --) of an outcome pair.
constexpr std::size_t slot_of(const HiddenOutcome& o) noexcept {
    return (o.s1 == Spin::up ? 0u : 2u) + (o.s2 == Spin::up ? 0u : 1u);
}
constexpr HiddenOutcome outcome_of_slot(std::size_t slot) noexcept {
    return {slot < 2 ? Spin::up : Spin::down, slot % 2 == 0 ? Spin::up : Spin::down};
}

/// Joint outcome probabilities in slot order: (sin^2, cos^2, cos^2, sin^2)(theta/2) / 2.
std::array<double, kSlotCount> outcome_table(const MeasurementFrame& frame);

HiddenOutcome sample_outcome(const MeasurementFrame& frame, CounterRng& rng);

/// Draws the particle measured first from its marginal and the other from
/// the conditional given the first.
HiddenOutcome sample_outcome_sequential(const MeasurementFrame& frame, Particle first,
                                        CounterRng& rng);

double marginal_of_s1(const MeasurementFrame& frame);

struct SpinDistribution {
    double p_up = 0.5;
    double p_down = 0.5;
};

SpinDistribution conditional_s2_given_s1(const MeasurementFrame& frame, Spin s1);
SpinDistribution conditional_s1_given_s2(const MeasurementFrame& frame, Spin s2);

/// Cumulative values of the noise and information processes after some step.
struct PathPoint {
    Region region = Region::one; ///< region advanced by the step; meaningless at step 0
    VolumePair vol;
    double b1 = 0.0;
    double b2 = 0.0;
    double xi1 = 0.0;
    double xi2 = 0.0;
};

/*!
 * Realized information processes xi^a = 4 lambda s_a omega^a + B^a along a
 * schedule. points()[0] is the initial surface; points()[k] follows step k.
 */
class InformationPath {
public:
    InformationPath(std::vector<PathPoint> points, std::optional<HiddenOutcome> hidden);

    [[nodiscard]] const std::vector<PathPoint>& points() const noexcept { return points_; }
    [[nodiscard]] const PathPoint& terminal() const noexcept { return points_.back(); }
    [[nodiscard]] const std::optional<HiddenOutcome>& hidden() const noexcept { return hidden_; }

    /// Header `step,region,omega1,omega2,B1,B2,xi1,xi2`, one row per point.
    void write_csv(std::ostream& out) const;
    static InformationPath read_csv(std::istream& in);

private:
    std::vector<PathPoint> points_;
    std::optional<HiddenOutcome> hidden_;
};

/*!
 * Brownian increments dB ~ N(0, d_omega) for the active region only. The
 * j-th region-a increment is the j-th normal of the trial's region-a
 * substream, so paths over reorderings of one schedule share their draws.
 */
InformationPath sample_information_path(const MeasurementFrame& frame,
                                        const HiddenOutcome& outcome,
                                        const FoliationSchedule& schedule, const TrialKey& key);

/// Terminal point of sample_information_path without storing the path.
PathPoint sample_terminal(const MeasurementFrame& frame, const HiddenOutcome& outcome,
                          const FoliationSchedule& schedule, const TrialKey& key);

} // namespace isocollapse
