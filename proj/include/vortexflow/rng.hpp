#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace vflow {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
// A stream is addressed by (seed, stream_id); consuming a stream never touches
// any other, so paths and ensemble members can be simulated in any order or in
// parallel with bit-identical results.
class PhiloxStream {
   public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          ctr2_(static_cast<std::uint32_t>(stream_id)),
          ctr3_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    std::uint32_t next_u32() {
        if (cursor_ == 4) refill();
        return block_[cursor_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // uniform on (0,1): 53-bit mantissa, never exactly 0 or 1
    double uniform() {
        const std::uint64_t r = next_u64() >> 11;
        return (static_cast<double>(r) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // standard normal via Box-Muller, pairs cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // weak-order-1 two-point replacement for a standard normal
    double two_point() { return (next_u32() & 1u) ? 1.0 : -1.0; }

   private:
    void refill() {
        std::uint32_t c0 = ctr0_, c1 = ctr1_, c2 = ctr2_, c3 = ctr3_;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        block_[0] = c0;
        block_[1] = c1;
        block_[2] = c2;
        block_[3] = c3;
        cursor_ = 0;
        if (++ctr0_ == 0) ++ctr1_;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t ctr0_ = 0, ctr1_ = 0;  // advances as the stream is consumed
    std::uint32_t ctr2_, ctr3_;          // stream id
    std::uint32_t block_[4] = {0, 0, 0, 0};
    int cursor_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// SplitMix64 step; used to derive independent substream seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace vflow
