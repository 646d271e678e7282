#ifndef EASICS_RNG_HPP
#define EASICS_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace easics {

// Derives an independent stream seed from a master seed. splitmix64 finalizer;
// the same (master, stream) pair always yields the same seed, on any platform.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream);

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard; the distribution functions below are hand-rolled because the
// std::*_distribution classes are implementation-defined and would break
// bit-reproducibility across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, bound), bound >= 1. Rejection sampling, unbiased.
    std::uint64_t uniform_index(std::uint64_t bound);

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace easics

#endif
