// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isocollapse/state_core.hpp"

namespace isocollapse {

enum class Region { one = 1, two = 2 };

enum class Ordering { region1_first, region2_first, interleaved, seeded_random };

std::string_view to_string(Ordering ordering) noexcept;
/// Accepts "region1-first", "region2-first", "interleaved", "random".
Ordering parse_ordering(std::string_view text);

/// A surface advance sweeping volume d_omega inside one interaction region.
struct FoliationStep {
    Region region = Region::one;
    double d_omega = 0.0;
};

/*!
 * Ordered sequence of surface advances from the initial to the final
 * surface. Only the per-region volume clocks are kept; the geometry of the
 * hypersurfaces themselves never enters the dynamics.
 */
class FoliationSchedule {
public:
    FoliationSchedule() = default;
    /// Throws std::invalid_argument for a nonpositive or non-finite step.
    explicit FoliationSchedule(std::vector<FoliationStep> steps);

    /*!
     * `step_count` steps in total, split evenly between the regions with a
     * nonzero total (region 1 takes the odd step). Region-a partial sums
     * reach total_a exactly. `seed` is used only by Ordering::seeded_random.
     */
    static FoliationSchedule uniform(double total1, double total2, std::size_t step_count,
                                     Ordering ordering, std::uint64_t seed = 0);

    /// ceil(total_a / d_omega) equal steps per region.
    static FoliationSchedule with_step_size(double total1, double total2, double d_omega,
                                            Ordering ordering, std::uint64_t seed = 0);

    [[nodiscard]] std::span<const FoliationStep> steps() const noexcept { return steps_; }
    [[nodiscard]] std::size_t size() const noexcept { return steps_.size(); }
    [[nodiscard]] bool empty() const noexcept { return steps_.empty(); }
    [[nodiscard]] const FoliationStep& operator[](std::size_t k) const { return steps_.at(k); }
    [[nodiscard]] VolumePair totals() const noexcept { return cumulative_.back(); }
    [[nodiscard]] std::size_t steps_in(Region region) const noexcept;

    /// Volumes after the first k steps; throws std::out_of_range if k > size().
    [[nodiscard]] VolumePair volumes_after(std::size_t k) const;

    /// One `region d_omega` line per step.
    void write_text(std::ostream& out) const;
    static FoliationSchedule read_text(std::istream& in);

private:
    FoliationSchedule(std::vector<FoliationStep> steps, std::vector<VolumePair> cumulative);
    static FoliationSchedule arrange(double total1, std::size_t n1, double total2,
                                     std::size_t n2, Ordering ordering, std::uint64_t seed);

    std::vector<FoliationStep> steps_;
    std::vector<VolumePair> cumulative_ = {VolumePair{}};
};

} // namespace isocollapse
