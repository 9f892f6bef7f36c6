#pragma once

#include <cstdint>
#include <random>

namespace scp {

using RandomStream = std::mt19937_64;

/// Independent stream keyed by (seed, stream index). Used to give every Monte-Carlo
/// trial its own generator so results do not depend on scheduling.
inline RandomStream make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x5c9u};
    return RandomStream(seq);
}

}  // namespace scp
