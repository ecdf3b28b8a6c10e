#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pairrank {

using Rng = std::mt19937_64;

/// Builds an independent generator for a named sub-stream of a base seed.
/// Every component that needs randomness derives its own stream so that
/// results do not depend on the order in which components run.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {})
{
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * stream.size());
    words.push_back(static_cast<std::uint32_t>(seed));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    for (auto s : stream) {
        words.push_back(static_cast<std::uint32_t>(s));
        words.push_back(static_cast<std::uint32_t>(s >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

/// Draws a fresh 64-bit seed from a generator.
inline std::uint64_t next_seed(Rng& rng) { return rng(); }

} // namespace pairrank
