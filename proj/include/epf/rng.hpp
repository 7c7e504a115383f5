#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based random numbers (Philox 4x32-10). Every draw is addressed by
// (seed, stream, counter), so parallel schedules cannot change the output.
namespace epf::rng {

namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        detail::mulhilo(M0, ctr[0], hi0, lo0);
        detail::mulhilo(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

inline std::array<std::uint32_t, 4> draw(std::uint64_t seed, std::uint64_t stream,
                                         std::uint64_t counter) {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    return philox4x32(ctr, key);
}

// Uniform in (0,1); never returns 0 or 1 exactly.
inline double to_u01(std::uint32_t x) { return (static_cast<double>(x) + 0.5) * 0x1p-32; }

// Two independent standard normals from one Philox block (Box-Muller).
inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                         std::uint64_t counter) {
    const auto w = draw(seed, stream, counter);
    const double u1 = to_u01(w[0]);
    const double u2 = to_u01(w[1]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return normal_pair(seed, stream, counter)[0];
}

// Sequential view over one (seed, stream) pair, for shuffles and weight init.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    double next_u01() { return to_u01(next_word()); }

    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const auto z = normal_pair(seed_, stream_, counter_++);
        cached_ = z[1];
        have_cached_ = true;
        return z[0];
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection keeps the distribution exact.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            const std::uint64_t v =
                (static_cast<std::uint64_t>(next_word()) << 32) | next_word();
            if (v < limit) return v % n;
        }
    }

  private:
    std::uint32_t next_word() {
        if (block_pos_ == 4) {
            block_ = draw(seed_, stream_, counter_++);
            block_pos_ = 0;
        }
        return block_[block_pos_++];
    }

    std::uint64_t seed_, stream_;
    std::uint64_t counter_ = 1'000'000'000ull;  // keep clear of normal_pair counters
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace epf::rng
