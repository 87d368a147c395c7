#ifndef RECO_RNG_HPP
#define RECO_RNG_HPP

#include <cstdint>
#include <random>

namespace reco {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-entity seed depends only on (master_seed, entity_id), never on
// execution order, so sweep results are schedule independent.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::int64_t entity_id) {
    return mix64(mix64(master_seed) ^ static_cast<std::uint64_t>(entity_id));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace reco

#endif  // RECO_RNG_HPP
