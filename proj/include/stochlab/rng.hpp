#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace stochlab::rng {

// splitmix64 finalizer; bijective 64-bit mix.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct SplitMix {
    std::uint64_t x;
    std::uint64_t next() noexcept {
        x += 0x9E3779B97F4A7C15ULL;
        return mix64(x);
    }
};

// Counter-keyed random stream: the state is derived from
// (master seed, stream id, substream id) alone, so a path's draws do not
// depend on how work is scheduled across threads. Core generator is
// xoshiro256++, normals via Box-Muller.
class Stream {
public:
    Stream(std::uint64_t master, std::uint64_t stream_id, std::uint64_t substream = 0) noexcept {
        SplitMix sm{mix64(master ^ mix64(stream_id ^ mix64(substream + 0x632BE59BD9B4E019ULL)))};
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on the open interval (0,1); never returns an endpoint
    double next_unit() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal() noexcept {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Substream labels so that distinct purposes within one path never share draws.
enum Substream : std::uint64_t {
    kBasePath = 0,
    kHittingLevel = 1,
    kHitWalk = 2,
    kIntegrand = 3,
    kAux = 4,
};

}  // namespace stochlab::rng
