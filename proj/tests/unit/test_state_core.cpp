// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "isocollapse/state_core.hpp"

using namespace isocollapse;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

// Reference values from tests/oracles/derive.py.
constexpr double kHalfTanh8 = 0.499999887464837944905;
constexpr double kCosh2 = 3.76219569108363145956;
constexpr double kNormTheta0 = 27.2990780886782962032;
constexpr double kGenericSpin1 = 0.379038437452570684832;
constexpr double kGenericSpin2 = -0.481546551018612145174;
constexpr double kGenericJoint = -0.190157665526723973681;
constexpr double kGenericNorm = 0.766374383853964453579;

// Linear-domain evaluation used as a cross-check of the log-domain code.
struct Naive {
    double norm = 0, s1 = 0, s2 = 0, joint = 0;
};

Naive naive(const StateAmplitudes& st) {
    Naive n;
    for (std::size_t i = 0; i < kSlotCount; ++i) {
        const double p = std::norm(st.amplitude(i));
        n.norm += p;
        n.s1 += p * slot_eigenvalue(i, Particle::one);
        n.s2 += p * slot_eigenvalue(i, Particle::two);
        n.joint += p * slot_eigenvalue(i, Particle::one) * slot_eigenvalue(i, Particle::two);
    }
    n.s1 /= n.norm;
    n.s2 /= n.norm;
    n.joint /= n.norm;
    return n;
}

} // namespace

TEST_CASE("frame validation") {
    CHECK_NOTHROW(MeasurementFrame(0.0, 1.0));
    CHECK_NOTHROW(MeasurementFrame(kPi, 1e-200));
    CHECK_THROWS_AS(MeasurementFrame(-1e-12, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementFrame(3.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementFrame(std::nan(""), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementFrame(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementFrame(1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementFrame(1.0, kInf), std::invalid_argument);
    CHECK(MeasurementFrame(kPi / 3, 1.0).cos_theta() == doctest::Approx(0.5));
}

TEST_CASE("slot eigenvalues follow (++, +-, -+, --)") {
    CHECK(slot_eigenvalue(0, Particle::one) == 0.5);
    CHECK(slot_eigenvalue(1, Particle::one) == 0.5);
    CHECK(slot_eigenvalue(2, Particle::one) == -0.5);
    CHECK(slot_eigenvalue(3, Particle::two) == -0.5);
    CHECK(slot_eigenvalue(2, Particle::two) == 0.5);
}

TEST_CASE("singlet in the measurement basis") {
    SUBCASE("theta = 0 is the fixed-axis singlet") {
        const StateAmplitudes st = singlet_initial(MeasurementFrame(0.0, 1.0));
        CHECK(st.log_mag(0) == -kInf);
        CHECK(st.log_mag(3) == -kInf);
        CHECK(std::abs(st.amplitude(1) - std::complex<double>(1 / std::sqrt(2.0))) < 1e-15);
        CHECK(std::abs(st.amplitude(2) + std::complex<double>(1 / std::sqrt(2.0))) < 1e-15);
        CHECK(joint_spin_expectation(st) == doctest::Approx(-0.25).epsilon(1e-15));
    }
    SUBCASE("theta = pi/2 has equal magnitudes") {
        const StateAmplitudes st = singlet_initial(MeasurementFrame(kPi / 2, 1.0));
        for (std::size_t i = 0; i < kSlotCount; ++i) {
            CHECK(std::abs(st.amplitude(i)) == doctest::Approx(0.5).epsilon(1e-15));
        }
        CHECK(std::abs(st.amplitude(0) - std::complex<double>(0, -0.5)) < 1e-15);
        CHECK(std::abs(st.amplitude(3) - std::complex<double>(0, 0.5)) < 1e-15);
    }
    SUBCASE("normalized and unbiased for any theta") {
        for (double th = 0.0; th <= kPi; th += 0.1) {
            const StateAmplitudes st = singlet_initial(MeasurementFrame(th, 1.0));
            CHECK(*norm_sq(st).value == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(std::abs(spin_expectation(st, Particle::one)) < 1e-15);
            CHECK(std::abs(spin_expectation(st, Particle::two)) < 1e-15);
            CHECK(projector_expectation(st, Particle::one, Sign::plus) ==
                  doctest::Approx(0.5).epsilon(1e-15));
        }
    }
}

TEST_CASE("closed-form state") {
    SUBCASE("zero information returns the singlet") {
        const MeasurementFrame f(1.1, 0.7);
        const StateAmplitudes a = closed_form_state(f, 0, 0, {});
        const StateAmplitudes b = singlet_initial(f);
        CHECK(a.log_mag() == b.log_mag());
        CHECK(a.phase() == b.phase());
    }
    SUBCASE("theta = 0 reference point") {
        const StateAmplitudes st = closed_form_state(MeasurementFrame(0, 1), 2, -2, {1, 1});
        CHECK(spin_expectation(st, Particle::one) == doctest::Approx(kHalfTanh8).epsilon(1e-15));
        CHECK(spin_expectation(st, Particle::two) == doctest::Approx(-kHalfTanh8).epsilon(1e-15));
        CHECK(*norm_sq(st).value == doctest::Approx(kNormTheta0).epsilon(1e-14));
        CHECK(st.log_mag(0) == -kInf);
        CHECK(st.log_mag(3) == -kInf);
    }
    SUBCASE("generic angle against the oracle") {
        const StateAmplitudes st = closed_form_state(MeasurementFrame(kPi / 3, 0.8), 0.3, -1.1,
                                                     {0.4, 0.9});
        CHECK(spin_expectation(st, Particle::one) == doctest::Approx(kGenericSpin1).epsilon(1e-13));
        CHECK(spin_expectation(st, Particle::two) == doctest::Approx(kGenericSpin2).epsilon(1e-13));
        CHECK(joint_spin_expectation(st) == doctest::Approx(kGenericJoint).epsilon(1e-13));
        CHECK(*norm_sq(st).value == doctest::Approx(kGenericNorm).epsilon(1e-13));
    }
    SUBCASE("explicit theta = 0 solution") {
        const double lam = 1.3, x1 = 0.4, x2 = -0.9, w1 = 0.6, w2 = 1.7;
        const StateAmplitudes st = closed_form_state(MeasurementFrame(0, lam), x1, x2, {w1, w2});
        const double r = 1 / std::sqrt(2.0);
        const double pm = std::log(r) + lam * x1 - lam * lam * w1 - lam * x2 - lam * lam * w2;
        const double mp = std::log(r) - lam * x1 - lam * lam * w1 + lam * x2 - lam * lam * w2;
        CHECK(st.log_mag(1) == doctest::Approx(pm).epsilon(1e-15));
        CHECK(st.log_mag(2) == doctest::Approx(mp).epsilon(1e-15));
    }
    SUBCASE("invalid volumes are rejected") {
        CHECK_THROWS_AS(closed_form_state(MeasurementFrame(0, 1), 0, 0, {-1, 0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(closed_form_state(MeasurementFrame(0, 1), 0, 0, {0, -0.1}),
                        std::invalid_argument);
    }
    SUBCASE("huge volumes stay finite in log form") {
        const StateAmplitudes st = closed_form_state(MeasurementFrame(1.0, 1.0), 2000, -1500,
                                                     {500, 500});
        const NormSq n = norm_sq(st);
        CHECK(std::isfinite(n.log_value));
        CHECK_FALSE(n.value.has_value());
        CHECK(spin_expectation(st, Particle::one) == doctest::Approx(0.5));
        CHECK(spin_expectation(st, Particle::two) == doctest::Approx(-0.5));
    }
}

TEST_CASE("norm examples") {
    CHECK(*norm_sq(closed_form_state(MeasurementFrame(0, 1), 1, 0, {})).value ==
          doctest::Approx(kCosh2).epsilon(1e-15));
    const StateAmplitudes st = closed_form_state(MeasurementFrame(0.4, 1), 0.2, 0.1, {0.3, 0.5});
    const double c = 1.75;
    const StateAmplitudes up = st.shifted({c, c, c, c});
    CHECK(*norm_sq(up).value == doctest::Approx(*norm_sq(st).value * std::exp(2 * c)));
    CHECK(spin_expectation(up, Particle::one) ==
          doctest::Approx(spin_expectation(st, Particle::one)).epsilon(1e-14));
}

TEST_CASE("degenerate states are rejected") {
    const StateAmplitudes::Phases ph{};
    CHECK_THROWS_AS(StateAmplitudes({-kInf, -kInf, -kInf, -kInf}, ph), DegenerateStateError);
    const StateAmplitudes one({0.0, -kInf, -kInf, -kInf}, ph);
    CHECK_THROWS_AS(static_cast<void>(one.shifted({-kInf, 0, 0, 0})), DegenerateStateError);
    CHECK_THROWS_AS(static_cast<void>(one.log_mag(4)), std::out_of_range);
}

TEST_CASE("collapsed states give sharp values") {
    const StateAmplitudes::Phases ph{1.0, 1.0, 1.0, 1.0};
    const StateAmplitudes pp({3.0, -kInf, -kInf, -kInf}, ph);
    CHECK(joint_spin_expectation(pp) == 0.25);
    CHECK(projector_expectation(pp, Particle::one, Sign::plus) == 1.0);
    CHECK(projector_expectation(pp, Particle::two, Sign::minus) == 0.0);
    CHECK(spin_expectation(pp, Particle::two) == 0.5);
    const auto p = slot_probabilities(pp);
    CHECK(p[0] == 1.0);
    CHECK(p[3] == 0.0);
}

TEST_CASE("log-sum-exp edge cases") {
    const double empty[1] = {0};
    CHECK(log_sum_exp(empty, empty) == -kInf);
    const double all_neg[] = {-kInf, -kInf};
    CHECK(log_sum_exp(all_neg, all_neg + 2) == -kInf);
    const double big[] = {1000.0, 1000.0};
    CHECK(log_sum_exp(big, big + 2) == doctest::Approx(1000.0 + std::log(2.0)));
    const double mixed[] = {-kInf, 0.0, std::log(3.0)};
    CHECK(log_sum_exp(mixed, mixed + 3) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("property: log-domain results match linear arithmetic") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> th(0.0, kPi), lam(0.1, 2.0), xi(-3.0, 3.0),
        om(0.0, 2.0), shift(-50.0, 50.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const MeasurementFrame f(th(gen), lam(gen));
        const StateAmplitudes st = closed_form_state(f, xi(gen), xi(gen), {om(gen), om(gen)});
        const Naive n = naive(st);
        const NormSq ns = norm_sq(st);
        REQUIRE(ns.value.has_value());
        CHECK(*ns.value == doctest::Approx(n.norm).epsilon(1e-10));
        CHECK(std::abs(spin_expectation(st, Particle::one) - n.s1) < 1e-10);
        CHECK(std::abs(spin_expectation(st, Particle::two) - n.s2) < 1e-10);
        CHECK(std::abs(joint_spin_expectation(st) - n.joint) < 1e-10);

        const double p1 = projector_expectation(st, Particle::one, Sign::plus);
        const double m1 = projector_expectation(st, Particle::one, Sign::minus);
        CHECK(p1 + m1 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(0.5 * p1 - 0.5 * m1 - spin_expectation(st, Particle::one)) < 1e-12);
        const double s = spin_expectation(st, Particle::two);
        CHECK(s >= -0.5);
        CHECK(s <= 0.5);

        // Phases are untouched and normalization does not matter.
        CHECK(st.phase() == singlet_initial(f).phase());
        const double c = shift(gen);
        const StateAmplitudes moved = st.shifted({c, c, c, c});
        CHECK(std::abs(spin_expectation(moved, Particle::one) - n.s1) < 1e-12);
    }
}
