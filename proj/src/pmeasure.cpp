// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/pmeasure.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace isocollapse {

std::array<double, kSlotCount> outcome_table(const MeasurementFrame& frame) {
    const double s = std::sin(0.5 * frame.theta());
    const double c = std::cos(0.5 * frame.theta());
    const double same = 0.5 * s * s;
    const double opposite = 0.5 * c * c;
    return {same, opposite, opposite, same};
}

HiddenOutcome sample_outcome(const MeasurementFrame& frame, CounterRng& rng) {
    const auto table = outcome_table(frame);
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t slot = 0; slot + 1 < kSlotCount; ++slot) {
        acc += table[slot];
        if (u < acc) {
            return outcome_of_slot(slot);
        }
    }
    return outcome_of_slot(kSlotCount - 1);
}

double marginal_of_s1(const MeasurementFrame& frame) {
    const auto table = outcome_table(frame);
    return table[0] + table[1];
}

SpinDistribution conditional_s2_given_s1(const MeasurementFrame& frame, Spin s1) {
    const auto table = outcome_table(frame);
    const std::size_t up = slot_of({s1, Spin::up});
    const std::size_t down = slot_of({s1, Spin::down});
    const double marginal = table[up] + table[down];
    return {table[up] / marginal, table[down] / marginal};
}

SpinDistribution conditional_s1_given_s2(const MeasurementFrame& frame, Spin s2) {
    const auto table = outcome_table(frame);
    const std::size_t up = slot_of({Spin::up, s2});
    const std::size_t down = slot_of({Spin::down, s2});
    const double marginal = table[up] + table[down];
    return {table[up] / marginal, table[down] / marginal};
}

HiddenOutcome sample_outcome_sequential(const MeasurementFrame& frame, Particle first,
                                        CounterRng& rng) {
    const auto table = outcome_table(frame);
    if (first == Particle::one) {
        const Spin s1 = rng.uniform() < table[0] + table[1] ? Spin::up : Spin::down;
        const SpinDistribution s2 = conditional_s2_given_s1(frame, s1);
        return {s1, rng.uniform() < s2.p_up ? Spin::up : Spin::down};
    }
    const Spin s2 = rng.uniform() < table[0] + table[2] ? Spin::up : Spin::down;
    const SpinDistribution s1 = conditional_s1_given_s2(frame, s2);
    return {rng.uniform() < s1.p_up ? Spin::up : Spin::down, s2};
}

InformationPath::InformationPath(std::vector<PathPoint> points,
                                 std::optional<HiddenOutcome> hidden)
    : points_(std::move(points)), hidden_(hidden) {
    if (points_.empty()) {
        throw std::invalid_argument("information path needs at least the initial point");
    }
}

void InformationPath::write_csv(std::ostream& out) const {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    out << "step,region,omega1,omega2,B1,B2,xi1,xi2\n";
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const PathPoint& p = points_[k];
        out << k << ',' << (k == 0 ? 0 : static_cast<int>(p.region)) << ',' << p.vol.omega1 << ','
            << p.vol.omega2 << ',' << p.b1 << ',' << p.b2 << ',' << p.xi1 << ',' << p.xi2 << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

InformationPath InformationPath::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("step,region,omega1,omega2,B1,B2,xi1,xi2", 0) != 0) {
        throw std::invalid_argument("information path CSV is missing its header");
    }
    std::vector<PathPoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::array<double, 8> v{};
        for (double& x : v) {
            if (!std::getline(row, cell, ',')) {
                throw std::invalid_argument("short CSV row: " + line);
            }
            x = std::stod(cell);
        }
        PathPoint p;
        p.region = v[1] == 2.0 ? Region::two : Region::one;
        p.vol = {v[2], v[3]};
        p.b1 = v[4];
        p.b2 = v[5];
        p.xi1 = v[6];
        p.xi2 = v[7];
        points.push_back(p);
    }
    return InformationPath(std::move(points), std::nullopt);
}

namespace {

// Walks the schedule, handing each accumulated point to `visit`.
template <class Visitor>
void walk_path(const MeasurementFrame& frame, const HiddenOutcome& outcome,
               const FoliationSchedule& schedule, const TrialKey& key, Visitor&& visit) {
    CounterRng noise1 = key.stream(StreamTag::region1);
    CounterRng noise2 = key.stream(StreamTag::region2);
    const double drift1 = 4.0 * frame.coupling() * value(outcome.s1);
    const double drift2 = 4.0 * frame.coupling() * value(outcome.s2);
    PathPoint p;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const FoliationStep& step = schedule[k];
        p.region = step.region;
        p.vol = schedule.volumes_after(k + 1);
        if (step.region == Region::one) {
            p.b1 += std::sqrt(step.d_omega) * noise1.normal();
        } else {
            p.b2 += std::sqrt(step.d_omega) * noise2.normal();
        }
        p.xi1 = drift1 * p.vol.omega1 + p.b1;
        p.xi2 = drift2 * p.vol.omega2 + p.b2;
        visit(p);
    }
}

} // namespace

InformationPath sample_information_path(const MeasurementFrame& frame,
                                        const HiddenOutcome& outcome,
                                        const FoliationSchedule& schedule, const TrialKey& key) {
    std::vector<PathPoint> points;
    points.reserve(schedule.size() + 1);
    points.push_back(PathPoint{});
    walk_path(frame, outcome, schedule, key, [&](const PathPoint& p) { points.push_back(p); });
    return InformationPath(std::move(points), outcome);
}

PathPoint sample_terminal(const MeasurementFrame& frame, const HiddenOutcome& outcome,
                          const FoliationSchedule& schedule, const TrialKey& key) {
    PathPoint last;
    walk_path(frame, outcome, schedule, key, [&](const PathPoint& p) { last = p; });
    return last;
}

} // namespace isocollapse
