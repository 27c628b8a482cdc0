// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace isocollapse {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
struct Philox4x32 {
    using ctr_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static ctr_type apply(ctr_type ctr, key_type key) noexcept;
};

/// Purpose of a random substream within one trial.
enum class StreamTag : std::uint32_t {
    outcome = 0,
    region1 = 1,
    region2 = 2,
    bridge = 3,
};

/*!
 * Sequential generator over one (seed, ensemble, trial, tag) substream.
 *
 * Every substream is an independent walk through Philox counter space, so
 * trial i draws the same numbers no matter which thread runs it or in which
 * order trials are scheduled. The counter layout is
 * {block index, ensemble << 8 | tag, trial low word, trial high word}; the
 * master seed is the key.
 */
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t trial, StreamTag tag,
               std::uint32_t ensemble = 0) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() noexcept;

private:
    void refill() noexcept;

    Philox4x32::key_type key_{};
    Philox4x32::ctr_type ctr_{};
    Philox4x32::ctr_type block_{};
    int words_used_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Identifies a trial's family of substreams.
struct TrialKey {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::uint32_t ensemble = 0;

    [[nodiscard]] CounterRng stream(StreamTag tag) const noexcept {
        return CounterRng(seed, trial, tag, ensemble);
    }
};

} // namespace isocollapse
