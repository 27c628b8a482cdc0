// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "isocollapse/pmeasure.hpp"
#include "isocollapse/state_core.hpp"

namespace isocollapse {

/// P(s1, s2 | xi1, xi2) over the four outcome cells, in slot order.
struct Posterior {
    std::array<double, kSlotCount> cells{};

    [[nodiscard]] double operator[](std::size_t slot) const { return cells.at(slot); }
};

/*!
 * Bayes posterior of the hidden outcome given the terminal information
 * values. Each region contributes the Gaussian likelihood
 * exp(-(xi - 4 lambda s omega)^2 / (2 omega)); a region with omega = 0 has
 * not been observed and contributes a factor of one.
 */
Posterior posterior(const MeasurementFrame& frame, double xi1, double xi2, const VolumePair& vol);

/// Conditional mean of s_a under the posterior.
double best_estimate(const Posterior& post, Particle particle);

/// Largest |best_estimate - spin_expectation| over every point of the path and both particles.
double filtering_identity_check(const MeasurementFrame& frame, const InformationPath& path);

} // namespace isocollapse
