// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "isocollapse/filtering.hpp"
#include "isocollapse/pmeasure.hpp"

using namespace isocollapse;

namespace {
constexpr double kPi = std::numbers::pi;
// Reference values from tests/oracles/derive.py.
constexpr double kHalfTanh8 = 0.499999887464837944905;
constexpr double kPosteriorPm = 0.999999887464837944905;
constexpr std::array<double, 4> kGenericPost{0.00858827769025529614771, 0.870450159762315388684,
                                             0.00986517129113255867789, 0.11109639125629675649};
} // namespace

TEST_CASE("posterior without data is the prior") {
    for (double th : {0.0, 0.9, kPi / 2, kPi}) {
        const MeasurementFrame f(th, 1.0);
        const Posterior p = posterior(f, 0.7, -3.0, {0, 0});
        const auto prior = outcome_table(f);
        for (std::size_t k = 0; k < kSlotCount; ++k) {
            CHECK(p[k] == doctest::Approx(prior[k]).epsilon(1e-14));
        }
        CHECK(std::abs(best_estimate(p, Particle::one)) < 1e-15);
        CHECK(std::abs(best_estimate(p, Particle::two)) < 1e-15);
    }
}

TEST_CASE("posterior reference values") {
    const Posterior p = posterior(MeasurementFrame(0, 1), 2, -2, {1, 1});
    CHECK(p[0] == 0.0);
    CHECK(p[3] == 0.0);
    CHECK(p[1] == doctest::Approx(kPosteriorPm).epsilon(1e-15));
    CHECK(best_estimate(p, Particle::one) == doctest::Approx(kHalfTanh8).epsilon(1e-14));
    const Posterior g = posterior(MeasurementFrame(kPi / 3, 0.8), 0.3, -1.1, {0.4, 0.9});
    for (std::size_t k = 0; k < kSlotCount; ++k) {
        CHECK(g[k] == doctest::Approx(kGenericPost[k]).epsilon(1e-13));
    }
    CHECK_THROWS_AS(posterior(MeasurementFrame(0, 1), 0, 0, {-1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(static_cast<void>(g[4]), std::out_of_range);
}

TEST_CASE("point posteriors") {
    const Posterior point{{0.0, 1.0, 0.0, 0.0}};
    CHECK(best_estimate(point, Particle::one) == 0.5);
    CHECK(best_estimate(point, Particle::two) == -0.5);
}

TEST_CASE("property: posterior normalized for extreme information") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> th(0, kPi), xi(-5000, 5000), om(0, 400);
    for (int i = 0; i < 3000; ++i) {
        const Posterior p = posterior(MeasurementFrame(th(gen), 1.7), xi(gen), xi(gen),
                                      {om(gen), i % 5 == 0 ? 0.0 : om(gen)});
        double sum = 0.0;
        for (double c : p.cells) {
            CHECK(c >= 0.0);
            CHECK(std::isfinite(c));
            sum += c;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("filtering identity along sampled paths") {
    for (double th : {0.0, kPi / 3, 2.5}) {
        const MeasurementFrame f(th, 1.1);
        const auto sched = FoliationSchedule::uniform(2.0, 1.5, 120, Ordering::seeded_random, 5);
        for (std::uint64_t trial = 0; trial < 20; ++trial) {
            const TrialKey key{31, trial, 0};
            CounterRng rng = key.stream(StreamTag::outcome);
            const HiddenOutcome o = sample_outcome(f, rng);
            const InformationPath path = sample_information_path(f, o, sched, key);
            CHECK(filtering_identity_check(f, path) < 1e-10);
        }
    }
    const InformationPath still = sample_information_path(MeasurementFrame(1, 1), {},
                                                          FoliationSchedule{}, TrialKey{});
    CHECK(filtering_identity_check(MeasurementFrame(1, 1), still) < 1e-15);
}

TEST_CASE("posterior depends on terminal values only") {
    const MeasurementFrame f(1.3, 0.9);
    const TrialKey key{12, 3, 0};
    const auto a = FoliationSchedule::uniform(1.0, 1.0, 50, Ordering::region1_first);
    const auto b = FoliationSchedule::uniform(1.0, 1.0, 50, Ordering::seeded_random, 4);
    const HiddenOutcome o{Spin::up, Spin::up};
    const PathPoint ta = sample_terminal(f, o, a, key);
    const PathPoint tb = sample_terminal(f, o, b, key);
    const Posterior pa = posterior(f, ta.xi1, ta.xi2, ta.vol);
    const Posterior pb = posterior(f, tb.xi1, tb.xi2, tb.vol);
    for (std::size_t k = 0; k < kSlotCount; ++k) CHECK(pa[k] == doctest::Approx(pb[k]).epsilon(1e-14));
}
