#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace linematch {

// Philox4x32-10 (Salmon et al., SC'11): a keyed bijection on 128-bit counters.
// Any (key, counter) pair yields the same block on every platform, so each
// stream can be addressed directly without sequencing through others.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block apply(Block ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57;
    static constexpr std::uint32_t kW0 = 0x9E3779B9;
    static constexpr std::uint32_t kW1 = 0xBB67AE85;
};

/// What a stream is used for. Distinct purposes never share counters.
enum class StreamDomain : std::uint8_t {
    origin = 1,
    arrival_order = 2,
    algorithm = 3,
    config_sample = 4,
};

/// Address of one independent stream under a root seed.
struct StreamId {
    StreamDomain domain = StreamDomain::origin;
    std::uint32_t trial = 0;
    std::uint32_t round = 0;  // low 24 bits used
    std::uint32_t index = 0;  // subinterval, sample number, ...
};

/// Sequential 64-bit draws from one addressed Philox stream.
class Stream {
public:
    Stream(std::uint64_t seed, StreamId id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          tag_((static_cast<std::uint32_t>(id.domain) << 24) | (id.round & 0xFFFFFFu)),
          index_(id.index),
          trial_(id.trial) {}

    std::uint64_t next_u64() {
        if (pos_ == 2) refill();
        return buf_[pos_++];
    }

    /// Uniform integer with `b` random bits, 0 <= b <= 64.
    std::uint64_t bits(int b) {
        if (b < 0 || b > 64) throw std::out_of_range("Stream::bits: b outside [0, 64]");
        if (b == 0) return 0;
        return next_u64() >> (64 - b);
    }

    /// Uniform integer in [0, bound), bound > 0, by rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Stream::uniform_below: zero bound");
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

private:
    void refill() {
        const auto out = Philox4x32::apply({counter_, tag_, index_, trial_}, key_);
        ++counter_;
        buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        pos_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t tag_;
    std::uint32_t index_;
    std::uint32_t trial_;
    std::uint32_t counter_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
};

}  // namespace linematch
