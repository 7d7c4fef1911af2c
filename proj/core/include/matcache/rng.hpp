#pragma once

#include <cstdint>

namespace matcache {

/// splitmix64 finalizer; full-avalanche 64-bit mix.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Counter-based RNG keyed by (seed, pixel, sample). Every dimension is an
/// independent hash of the key, so the stream a path sees depends only on
/// its coordinates, never on thread scheduling.
class PathRng {
public:
    PathRng(uint64_t seed, uint64_t pixel_index, uint64_t sample_index)
        : key_(mix64(seed ^ mix64(pixel_index ^ mix64(sample_index)))) {}

    /// Uniform float in [0, 1) for dimension `dim`.
    float sample(uint32_t dim) const {
        const uint64_t h = mix64(key_ + 0x632be59bd9b4e019ull * (dim + 1));
        return static_cast<float>(h >> 40) * 0x1.0p-24f;
    }

private:
    uint64_t key_;
};

}  // namespace matcache
