// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <utility>
#include <vector>

#include "isocollapse/state_core.hpp"

namespace isocollapse {

inline constexpr double kClassicalChshBound = 2.0;

/*!
 * Characteristic function E^P[exp(i t1 xi1 + i t2 xi2)] of the information
 * processes: the outcome-weighted mixture of Gaussians with means
 * 4 lambda s_a omega^a and variances omega^a.
 */
std::complex<double> char_fn(const MeasurementFrame& frame, double t1, double t2,
                             const VolumePair& vol);

/// (t1, t2) evaluation points and the matching char_fn values.
struct CharEvalGrid {
    std::vector<std::pair<double, double>> points;
    std::vector<std::complex<double>> values;

    /// n x n grid over [lo, hi]^2; throws std::invalid_argument if n == 0.
    static CharEvalGrid square(double lo, double hi, std::size_t n);
};

/// Fills grid.values; throws std::invalid_argument for an empty grid.
void evaluate(CharEvalGrid& grid, const MeasurementFrame& frame, const VolumePair& vol);

/// Quantum prediction for <(n1 . S1)(n2 . S2)>: -cos(theta) / 4.
double predicted_correlation(const MeasurementFrame& frame);

/// E[xi1 xi2] under P: -4 lambda^2 omega1 omega2 cos(theta).
double predicted_cross_moment(const MeasurementFrame& frame, const VolumePair& vol);

/*!
 * |E(a,b) - E(a,b') + E(a',b) + E(a',b')| for +/-1 outcomes, E = -cos(theta),
 * with the four angles given in that order.
 */
double chsh_value(const std::array<double, 4>& thetas);

/// Setting-pair angles that maximize the CHSH combination.
std::array<double, 4> optimal_chsh_angles();

} // namespace isocollapse
