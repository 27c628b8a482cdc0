// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include "isocollapse/rng.hpp"

#include <cmath>
#include <numbers>

namespace isocollapse {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
    const std::uint64_t product = std::uint64_t{a} * std::uint64_t{b};
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

} // namespace

Philox4x32::ctr_type Philox4x32::apply(ctr_type ctr, key_type key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, StreamTag tag,
                       std::uint32_t ensemble) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      ctr_{0u, (ensemble << 8) | static_cast<std::uint32_t>(tag),
           static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)} {}

void CounterRng::refill() noexcept {
    block_ = Philox4x32::apply(ctr_, key_);
    ++ctr_[0];
    words_used_ = 0;
}

std::uint64_t CounterRng::next_u64() noexcept {
    if (words_used_ > 2) {
        refill();
    }
    const std::uint64_t value = (std::uint64_t{block_[words_used_]} << 32) | block_[words_used_ + 1];
    words_used_ += 2;
    return value;
}

double CounterRng::uniform() noexcept {
    // 53 random bits, offset by half an ulp so 0 and 1 are never produced.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

} // namespace isocollapse
