#include "rng.hpp"

#include <unordered_map>

#include "errors.hpp"

namespace randgad {
namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t Rng::scramble(std::uint64_t x) {
    // splitmix64 finalizer; spreads low-entropy seeds over the full state.
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::substream(std::uint64_t seed, std::string_view name) {
    return Rng(scramble(seed) ^ fnv1a(name));
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw ArgumentError("Rng::below: bound must be positive");
    // Rejection sampling over the largest multiple of bound.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

std::vector<std::uint32_t> Rng::sample_without_replacement(std::uint32_t n,
                                                           std::uint32_t k) {
    if (k > n)
        throw ArgumentError("sample_without_replacement: k exceeds population");
    // Partial Fisher-Yates on a sparse permutation map; O(k) memory.
    std::unordered_map<std::uint32_t, std::uint32_t> moved;
    moved.reserve(k * 2);
    std::vector<std::uint32_t> out;
    out.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        const auto j =
            i + static_cast<std::uint32_t>(below(static_cast<std::uint64_t>(n - i)));
        auto at = [&](std::uint32_t pos) {
            auto it = moved.find(pos);
            return it == moved.end() ? pos : it->second;
        };
        const std::uint32_t value = at(j);
        moved[j] = at(i);
        out.push_back(value);
    }
    return out;
}

}  // namespace randgad
