#pragma once

#include <cstdint>
#include <string>

#include "stylerag/types.hpp"

namespace stylerag::embed {

// ASCII unit separator; joins payload fields in the canonical serializations
// below so field boundaries survive re-implementation.
inline constexpr char kFieldSep = '\x1f';

// Coordinates of the reference embedder sit on a 1/2048 grid. Any three of
// them sum exactly in 32-bit storage, which keeps composed vectors free of
// rounding noise.
inline constexpr int kReferenceGridSteps = 2048;

std::uint64_t fnv1a64(const std::string& bytes);

// Deterministic stand-in for the external neural embedders. The algorithm is
// part of the contract and must stay stable across releases (golden vectors
// are pinned in tests):
//
//   state   = fnv1a64(salt + 0x1f + payload) XOR (seed * 0x9e3779b97f4a7c15)
//   stream  = splitmix64 starting from state
//   coord_i = (int(next() % 4097) - 2048) / 2048.0   -> [-1, 1]
//
// Identical inputs give bitwise-identical vectors on any platform.
Vec embed_reference(const std::string& salt, const std::string& payload, std::size_t dim,
                    std::uint64_t seed);

}  // namespace stylerag::embed
