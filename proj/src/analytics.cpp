// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/analytics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "isocollapse/pmeasure.hpp"

namespace isocollapse {

std::complex<double> char_fn(const MeasurementFrame& frame, double t1, double t2,
                             const VolumePair& vol) {
    if (!vol.valid()) {
        throw std::invalid_argument("volumes must be nonnegative");
    }
    const auto table = outcome_table(frame);
    const double lambda = frame.coupling();
    const double damping = -0.5 * (t1 * t1 * vol.omega1 + t2 * t2 * vol.omega2);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
        if (table[slot] == 0.0) {
            continue;
        }
        const HiddenOutcome o = outcome_of_slot(slot);
        const double phase =
            4.0 * lambda * (t1 * value(o.s1) * vol.omega1 + t2 * value(o.s2) * vol.omega2);
        acc += table[slot] * std::exp(std::complex<double>{damping, phase});
    }
    return acc;
}

CharEvalGrid CharEvalGrid::square(double lo, double hi, std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("grid needs at least one point per axis");
    }
    CharEvalGrid grid;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double t1 = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
            const double t2 = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
            grid.points.emplace_back(t1, t2);
        }
    }
    return grid;
}

void evaluate(CharEvalGrid& grid, const MeasurementFrame& frame, const VolumePair& vol) {
    if (grid.points.empty()) {
        throw std::invalid_argument("characteristic-function grid is empty");
    }
    grid.values.clear();
    grid.values.reserve(grid.points.size());
    for (const auto& [t1, t2] : grid.points) {
        grid.values.push_back(char_fn(frame, t1, t2, vol));
    }
}

double predicted_correlation(const MeasurementFrame& frame) {
    return -0.25 * frame.cos_theta();
}

double predicted_cross_moment(const MeasurementFrame& frame, const VolumePair& vol) {
    const double lambda = frame.coupling();
    return -4.0 * lambda * lambda * vol.omega1 * vol.omega2 * frame.cos_theta();
}

double chsh_value(const std::array<double, 4>& thetas) {
    for (double t : thetas) {
        if (!(t >= 0.0 && t <= std::numbers::pi)) {
            throw std::invalid_argument("CHSH setting angles must lie in [0, pi]");
        }
    }
    auto e = [](double theta) { return -std::cos(theta); };
    return std::abs(e(thetas[0]) - e(thetas[1]) + e(thetas[2]) + e(thetas[3]));
}

std::array<double, 4> optimal_chsh_angles() {
    constexpr double q = std::numbers::pi / 4.0;
    return {q, 3.0 * q, q, q};
}

} // namespace isocollapse
