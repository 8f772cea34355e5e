#pragma once

#include <cstdint>

namespace fwescape {

/// SplitMix64 mixer; tiny, well-distributed, and cheap enough to derive
/// seeds by direct counter access.
inline std::uint64_t splitmix64(std::uint64_t s) {
    s += 0x9e3779b97f4a7c15ull;
    s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ull;
    s = (s ^ (s >> 27)) * 0x94d049bb133111ebull;
    return s ^ (s >> 31);
}

/// Seed of the index-th independent stream under one master seed.  Streams
/// are counter-derived, so any subset can be reproduced without generating
/// the others.
inline std::uint64_t derive_stream_seed(std::uint64_t master,
                                        std::uint64_t index) {
    return splitmix64(master + index * 0x9e3779b97f4a7c15ull);
}

}  // namespace fwescape
