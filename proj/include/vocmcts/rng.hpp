#pragma once

#include <cstdint>
#include <initializer_list>

#include "vocmcts/mdp.hpp"

namespace vocmcts {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a path of
/// labels, e.g. derive_seed(master, {seed_index, policy_index, budget}).
/// The fold is order-sensitive: (a, b) and (b, a) give different seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (auto label : path) h = mix64(h ^ mix64(label + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(master, path));
}

/// Stable 64-bit FNV-1a hash, used to turn names into stream labels.
constexpr std::uint64_t label_of(const char* text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (; *text; ++text) h = (h ^ static_cast<unsigned char>(*text)) * 0x100000001b3ULL;
    return h;
}

}  // namespace vocmcts
