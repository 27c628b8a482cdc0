// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isocollapse {

namespace {

double log_likelihood(double xi, double signal, double omega) {
    if (omega == 0.0) {
        return 0.0;
    }
    const double r = xi - signal * omega;
    return -r * r / (2.0 * omega);
}

} // namespace

Posterior posterior(const MeasurementFrame& frame, double xi1, double xi2,
                    const VolumePair& vol) {
    if (!vol.valid()) {
        throw std::invalid_argument("volumes must be nonnegative");
    }
    const auto prior = outcome_table(frame);
    const double lambda = frame.coupling();
    std::array<double, kSlotCount> log_cell{};
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
        const HiddenOutcome o = outcome_of_slot(slot);
        log_cell[slot] = prior[slot] > 0.0
            ? std::log(prior[slot]) + log_likelihood(xi1, 4.0 * lambda * value(o.s1), vol.omega1)
                  + log_likelihood(xi2, 4.0 * lambda * value(o.s2), vol.omega2)
            : -std::numeric_limits<double>::infinity();
    }
    const double top = *std::max_element(log_cell.begin(), log_cell.end());
    Posterior post;
    double total = 0.0;
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
        post.cells[slot] = std::exp(log_cell[slot] - top);
        total += post.cells[slot];
    }
    for (double& c : post.cells) {
        c /= total;
    }
    return post;
}

double best_estimate(const Posterior& post, Particle particle) {
    double acc = 0.0;
    for (std::size_t slot = 0; slot < kSlotCount; ++slot) {
        acc += slot_eigenvalue(slot, particle) * post.cells[slot];
    }
    return acc;
}

double filtering_identity_check(const MeasurementFrame& frame, const InformationPath& path) {
    double worst = 0.0;
    for (const PathPoint& p : path.points()) {
        const Posterior post = posterior(frame, p.xi1, p.xi2, p.vol);
        const StateAmplitudes state = closed_form_state(frame, p.xi1, p.xi2, p.vol);
        for (Particle a : {Particle::one, Particle::two}) {
            worst = std::max(worst, std::abs(best_estimate(post, a) - spin_expectation(state, a)));
        }
    }
    return worst;
}

} // namespace isocollapse
