#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace floodcare {

// Portable random stream: std::mt19937_64 is fully specified by the
// standard, while the std distributions are not, so draws are derived here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound), bound > 0, by rejection.
    std::uint64_t below(std::uint64_t bound);

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

// Fisher-Yates permutation of 0..n-1.
std::vector<int> random_permutation(int n, Rng& rng);

// Deterministic derived seed (splitmix64 finalizer over base and stream).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace floodcare
