// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "isocollapse/rng.hpp"

namespace isocollapse {

std::string_view to_string(Ordering ordering) noexcept {
    switch (ordering) {
    case Ordering::region1_first: return "region1-first";
    case Ordering::region2_first: return "region2-first";
    case Ordering::interleaved: return "interleaved";
    case Ordering::seeded_random: return "random";
    }
    return "unknown";
}

Ordering parse_ordering(std::string_view text) {
    for (Ordering o : {Ordering::region1_first, Ordering::region2_first, Ordering::interleaved,
                       Ordering::seeded_random}) {
        if (text == to_string(o)) {
            return o;
        }
    }
    throw std::invalid_argument("unknown ordering '" + std::string(text) + "'");
}

FoliationSchedule::FoliationSchedule(std::vector<FoliationStep> steps) : steps_(std::move(steps)) {
    std::vector<double> incr1, incr2;
    for (const FoliationStep& step : steps_) {
        if (!(step.d_omega > 0.0) || !std::isfinite(step.d_omega)) {
            throw std::invalid_argument("foliation step volume must be positive and finite");
        }
        if (step.region != Region::one && step.region != Region::two) {
            throw std::invalid_argument("foliation step region must be 1 or 2");
        }
        (step.region == Region::one ? incr1 : incr2).push_back(step.d_omega);
    }
    // Totals are summed in sorted order so they depend only on the multiset
    // of increments, not on how the regions are interleaved.
    auto sorted_sum = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    };
    const double total1 = sorted_sum(incr1);
    const double total2 = sorted_sum(incr2);

    std::size_t left1 = incr1.size();
    std::size_t left2 = incr2.size();
    cumulative_.reserve(steps_.size() + 1);
    VolumePair acc;
    for (const FoliationStep& step : steps_) {
        if (step.region == Region::one) {
            acc.omega1 = --left1 == 0 ? std::max(acc.omega1, total1) : acc.omega1 + step.d_omega;
        } else {
            acc.omega2 = --left2 == 0 ? std::max(acc.omega2, total2) : acc.omega2 + step.d_omega;
        }
        cumulative_.push_back(acc);
    }
}

FoliationSchedule::FoliationSchedule(std::vector<FoliationStep> steps,
                                     std::vector<VolumePair> cumulative)
    : steps_(std::move(steps)), cumulative_(std::move(cumulative)) {}

FoliationSchedule FoliationSchedule::arrange(double total1, std::size_t n1, double total2,
                                             std::size_t n2, Ordering ordering,
                                             std::uint64_t seed) {
    std::vector<Region> order;
    order.reserve(n1 + n2);
    switch (ordering) {
    case Ordering::region1_first:
        order.insert(order.end(), n1, Region::one);
        order.insert(order.end(), n2, Region::two);
        break;
    case Ordering::region2_first:
        order.insert(order.end(), n2, Region::two);
        order.insert(order.end(), n1, Region::one);
        break;
    case Ordering::interleaved: {
        // Advance whichever region lags behind in fractional progress.
        std::size_t i1 = 0, i2 = 0;
        while (i1 < n1 || i2 < n2) {
            const bool take1 = i2 == n2 || (i1 < n1 && i1 * n2 <= i2 * n1);
            order.push_back(take1 ? Region::one : Region::two);
            ++(take1 ? i1 : i2);
        }
        break;
    }
    case Ordering::seeded_random: {
        order.insert(order.end(), n1, Region::one);
        order.insert(order.end(), n2, Region::two);
        CounterRng rng(seed, 0, StreamTag::outcome, 0xFFFFFFu);
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        break;
    }
    }

    std::vector<FoliationStep> steps;
    std::vector<VolumePair> cumulative;
    steps.reserve(order.size());
    cumulative.reserve(order.size() + 1);
    cumulative.push_back(VolumePair{});
    std::size_t i1 = 0, i2 = 0;
    VolumePair acc;
    for (Region r : order) {
        // Partial sums come from total * j / n so the last one equals the
        // total exactly; increments are the differences.
        if (r == Region::one) {
            ++i1;
            const double next = i1 == n1 ? total1 : total1 * static_cast<double>(i1) / static_cast<double>(n1);
            steps.push_back({Region::one, next - acc.omega1});
            acc.omega1 = next;
        } else {
            ++i2;
            const double next = i2 == n2 ? total2 : total2 * static_cast<double>(i2) / static_cast<double>(n2);
            steps.push_back({Region::two, next - acc.omega2});
            acc.omega2 = next;
        }
        cumulative.push_back(acc);
    }
    return FoliationSchedule(std::move(steps), std::move(cumulative));
}

namespace {

void check_totals(double total1, double total2) {
    if (!(total1 >= 0.0) || !(total2 >= 0.0) || !std::isfinite(total1) || !std::isfinite(total2)) {
        throw std::invalid_argument("region totals must be finite and nonnegative");
    }
}

} // namespace

FoliationSchedule FoliationSchedule::uniform(double total1, double total2, std::size_t step_count,
                                             Ordering ordering, std::uint64_t seed) {
    check_totals(total1, total2);
    if (step_count == 0) {
        throw std::invalid_argument("step_count must be at least 1");
    }
    std::size_t n1 = 0, n2 = 0;
    if (total1 > 0.0 && total2 > 0.0) {
        if (step_count < 2) {
            throw std::invalid_argument("two active regions need at least two steps");
        }
        n1 = (step_count + 1) / 2;
        n2 = step_count / 2;
    } else if (total1 > 0.0) {
        n1 = step_count;
    } else if (total2 > 0.0) {
        n2 = step_count;
    }
    return arrange(total1, n1, total2, n2, ordering, seed);
}

FoliationSchedule FoliationSchedule::with_step_size(double total1, double total2, double d_omega,
                                                    Ordering ordering, std::uint64_t seed) {
    check_totals(total1, total2);
    if (!(d_omega > 0.0) || !std::isfinite(d_omega)) {
        throw std::invalid_argument("step size must be positive and finite");
    }
    // The small slack keeps 5.0 / 0.01 from rounding up to 501 steps.
    auto count = [d_omega](double total) {
        return total > 0.0 ? static_cast<std::size_t>(std::ceil(total / d_omega - 1e-9)) : 0u;
    };
    return arrange(total1, std::max<std::size_t>(count(total1), total1 > 0.0 ? 1 : 0), total2,
                   std::max<std::size_t>(count(total2), total2 > 0.0 ? 1 : 0), ordering, seed);
}

std::size_t FoliationSchedule::steps_in(Region region) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        steps_.begin(), steps_.end(), [region](const FoliationStep& s) { return s.region == region; }));
}

VolumePair FoliationSchedule::volumes_after(std::size_t k) const {
    if (k >= cumulative_.size()) {
        throw std::out_of_range("step index " + std::to_string(k) + " beyond schedule of " +
                                std::to_string(steps_.size()) + " steps");
    }
    return cumulative_[k];
}

void FoliationSchedule::write_text(std::ostream& out) const {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    for (const FoliationStep& step : steps_) {
        out << static_cast<int>(step.region) << ' ' << step.d_omega << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

FoliationSchedule FoliationSchedule::read_text(std::istream& in) {
    std::vector<FoliationStep> steps;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream fields(line);
        int region = 0;
        double d_omega = 0.0;
        std::string trailing;
        if (!(fields >> region >> d_omega) || (fields >> trailing) || (region != 1 && region != 2)) {
            throw std::invalid_argument("malformed schedule line " + std::to_string(line_no));
        }
        steps.push_back({region == 1 ? Region::one : Region::two, d_omega});
    }
    return FoliationSchedule(std::move(steps));
}

} // namespace isocollapse
