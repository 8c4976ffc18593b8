#ifndef EXNET_RNG_HPP
#define EXNET_RNG_HPP

#include <cstdint>

namespace exnet {

// splitmix64: counter-based mixing used for all derived seeds and per-key
// random streams. Deterministic across platforms, unlike <random>
// distributions.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
    return splitmix64(seed ^ splitmix64(key));
}

// Small counter-based RNG: state advances by fixed increments, each draw is a
// pure function of (seed, counter).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return splitmix64(seed_ ^ counter_++); }

    // uniform in [0, 1)
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // uniform index in [0, n); multiply-shift keeps the bias below 2^-64
    std::uint64_t next_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0x2545f4914f6cdd1dull;
};

}  // namespace exnet

#endif
