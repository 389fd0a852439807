#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace randgad {

// Deterministic random source. All helpers are built on raw mt19937_64
// output so results do not depend on the standard library's distribution
// implementations; a given (seed, call sequence) is reproducible across
// builds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(scramble(seed)) {}

    // Named sub-stream: decouples the consumers of one run seed so that a
    // change in how one component draws does not shift the others.
    static Rng substream(std::uint64_t seed, std::string_view name);

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_real(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Unbiased uniform integer in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound);

    // k distinct values from [0, n), in draw order.
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n,
                                                          std::uint32_t k);

private:
    static std::uint64_t scramble(std::uint64_t x);

    std::mt19937_64 engine_;
};

}  // namespace randgad
