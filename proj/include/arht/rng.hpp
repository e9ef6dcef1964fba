#pragma once

#include <cstdint>
#include <limits>

namespace arht {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** generator. Streams are derived from (seed, stream index) so any
/// replicate can be regenerated independently of evaluation order.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed ^ 0x6a09e667f3bcc909ULL;
        std::uint64_t a = splitmix64(sm);
        sm = stream + a;
        std::uint64_t b = splitmix64(sm);
        return Rng(a ^ (b * 0xd1342543de82ef95ULL));
    }

    /// Seed for a nested stream, e.g. the bootstrap inside replicate `stream`.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
        Rng r = derive(seed, stream);
        return r();
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

}  // namespace arht
