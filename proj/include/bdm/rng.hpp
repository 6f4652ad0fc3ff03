#pragma once

// Counter-based random streams.
//
// A Philox4x32-10 block cipher is keyed by a 64-bit seed; the 128-bit counter
// carries (block index, stream id, substream id), so every (trajectory,
// substream) pair owns a disjoint, reproducible sequence.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace bdm {

__extension__ using uint128 = unsigned __int128;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed of the i-th trajectory of a batch run under a top-level seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ull + 0x8cb92ba72f3d8dd7ull));
}

class Rng {
  public:
    using result_type = std::uint64_t;

    Rng(std::uint64_t seed, std::uint32_t stream = 0, std::uint32_t substream = 0) noexcept
        : key_{static_cast<std::uint32_t>(splitmix64(seed)),
               static_cast<std::uint32_t>(splitmix64(seed) >> 32)},
          stream_(stream), substream_(substream)
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (lane_ == 2) {
            refill();
        }
        return buffer_[lane_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() noexcept { return 1.0 - uniform(); }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

    /// Standard normal by the Marsaglia polar method.
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    /// Uniform integer in [0, n), n > 0, unbiased (Lemire).
    std::uint64_t below(std::uint64_t n) noexcept
    {
        uint128 m = static_cast<uint128>((*this)()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            std::uint64_t threshold = -n % n;
            while (low < threshold) {
                m = static_cast<uint128>((*this)()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

  private:
    void refill() noexcept
    {
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_),
                                         static_cast<std::uint32_t>(block_ >> 32), stream_,
                                         substream_};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        buffer_[0] = (std::uint64_t{ctr[1]} << 32) | ctr[0];
        buffer_[1] = (std::uint64_t{ctr[3]} << 32) | ctr[2];
        ++block_;
        lane_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_;
    std::uint32_t substream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int lane_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// The three independent substreams every trajectory owns.
struct Streams {
    explicit Streams(std::uint64_t seed)
        : wait(seed, 0, 0), kernel(seed, 0, 1), move(seed, 0, 2)
    {
    }

    Rng wait;   ///< candidate times and thinning acceptance
    Rng kernel; ///< jump type and jump kernel draws
    Rng move;   ///< mover noise
};

} // namespace bdm
