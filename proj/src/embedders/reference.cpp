#include "stylerag/embedders/reference.hpp"

#include "stylerag/error.hpp"

namespace stylerag::embed {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

Vec embed_reference(const std::string& salt, const std::string& payload, std::size_t dim,
                    std::uint64_t seed) {
    if (dim < 1) {
        throw Error(ErrorCode::InvalidArgument, "embedding dim must be >= 1");
    }
    std::uint64_t state =
        fnv1a64(salt + kFieldSep + payload) ^ (seed * 0x9e3779b97f4a7c15ULL);
    Vec out(dim);
    const int steps = kReferenceGridSteps;
    for (std::size_t i = 0; i < dim; ++i) {
        std::uint64_t x = splitmix64(state);
        int k = static_cast<int>(x % static_cast<std::uint64_t>(2 * steps + 1));
        out[i] = static_cast<float>(k - steps) / static_cast<float>(steps);
    }
    return out;
}

}  // namespace stylerag::embed
