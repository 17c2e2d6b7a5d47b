#pragma once

#include <cstdint>
#include <utility>

// Counter-based random stream: every grid cell derives its own generator from
// (seed, row, col), so parallel and sequential fills are bit-identical and a
// given seed reproduces across platforms (no library-distribution dependence).

namespace magpol::detail {

struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

inline SplitMix64 cell_stream(std::uint64_t seed, std::uint64_t row, std::uint64_t col) {
    SplitMix64 mixer{seed};
    std::uint64_t a = mixer.next();
    mixer.state = a ^ (row + 0xD1B54A32D192ED03ULL);
    std::uint64_t b = mixer.next();
    mixer.state = b ^ (col + 0x8CB92BA72F3D8DD7ULL);
    return SplitMix64{mixer.next()};
}

// uniform in (0, 1]; never 0 so log() below stays finite
inline double uniform_pos(SplitMix64& g) {
    return static_cast<double>((g.next() >> 11) + 1) * 0x1p-53;
}

// standard-normal pair (Box-Muller)
std::pair<double, double> gaussian_pair(SplitMix64& g);

} // namespace magpol::detail
