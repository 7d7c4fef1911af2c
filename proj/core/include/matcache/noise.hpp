#pragma once

#include "matcache/geom.hpp"

namespace matcache {

struct NoiseParams {
    int octaves = 4;  // valid range [1, 10]
    float frequency = 1.0f;
    float lacunarity = 2.0f;
    float gain = 0.5f;
};

/// 2D gradient noise over a fixed permutation table, roughly in [-1, 1].
/// Uses only +,*,floor on floats, so results are bit-reproducible.
float perlin2(float x, float y);

/// Fractal sum of perlin2 octaves, normalized and remapped to [0, 1].
float fbm2(const NoiseParams& params, Vec2 uv);

}  // namespace matcache
