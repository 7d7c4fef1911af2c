#include "matcache/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace matcache {

namespace {

// Ken Perlin's reference permutation table.
constexpr uint8_t kPerm[256] = {
    151, 160, 137, 91,  90,  15,  131, 13,  201, 95,  96,  53,  194, 233, 7,   225,
    140, 36,  103, 30,  69,  142, 8,   99,  37,  240, 21,  10,  23,  190, 6,   148,
    247, 120, 234, 75,  0,   26,  197, 62,  94,  252, 219, 203, 117, 35,  11,  32,
    57,  177, 33,  88,  237, 149, 56,  87,  174, 20,  125, 136, 171, 168, 68,  175,
    74,  165, 71,  134, 139, 48,  27,  166, 77,  146, 158, 231, 83,  111, 229, 122,
    60,  211, 133, 230, 220, 105, 92,  41,  55,  46,  245, 40,  244, 102, 143, 54,
    65,  25,  63,  161, 1,   216, 80,  73,  209, 76,  132, 187, 208, 89,  18,  169,
    200, 196, 135, 130, 116, 188, 159, 86,  164, 100, 109, 198, 173, 186, 3,   64,
    52,  217, 226, 250, 124, 123, 5,   202, 38,  147, 118, 126, 255, 82,  85,  212,
    207, 206, 59,  227, 47,  16,  58,  17,  182, 189, 28,  42,  223, 183, 170, 213,
    119, 248, 152, 2,   44,  154, 163, 70,  221, 153, 101, 155, 167, 43,  172, 9,
    129, 22,  39,  253, 19,  98,  108, 110, 79,  113, 224, 232, 178, 185, 112, 104,
    218, 246, 97,  228, 251, 34,  242, 193, 238, 210, 144, 12,  191, 179, 162, 241,
    81,  51,  145, 235, 249, 14,  239, 107, 49,  192, 214, 31,  181, 199, 106, 157,
    184, 84,  204, 176, 115, 121, 50,  45,  127, 4,   150, 254, 138, 236, 205, 93,
    222, 114, 67,  29,  24,  72,  243, 141, 128, 195, 78,  66,  215, 61,  156, 180,
};

inline int perm(int i) { return kPerm[i & 255]; }

inline float fade(float t) { return t * t * t * (t * (t * 6.0f - 15.0f) + 10.0f); }

inline float lerp(float a, float b, float t) { return a + (b - a) * t; }

// 8 gradient directions; dot with the corner offset.
inline float grad2(int hash, float dx, float dy) {
    switch (hash & 7) {
        case 0: return dx + dy;
        case 1: return -dx + dy;
        case 2: return dx - dy;
        case 3: return -dx - dy;
        case 4: return dx;
        case 5: return -dx;
        case 6: return dy;
        default: return -dy;
    }
}

}  // namespace

float perlin2(float x, float y) {
    const float fx = std::floor(x);
    const float fy = std::floor(y);
    const int ix = static_cast<int>(fx);
    const int iy = static_cast<int>(fy);
    const float dx = x - fx;
    const float dy = y - fy;

    const float u = fade(dx);
    const float v = fade(dy);

    const int a = perm(ix) + iy;
    const int b = perm(ix + 1) + iy;

    const float n00 = grad2(perm(a), dx, dy);
    const float n10 = grad2(perm(b), dx - 1.0f, dy);
    const float n01 = grad2(perm(a + 1), dx, dy - 1.0f);
    const float n11 = grad2(perm(b + 1), dx - 1.0f, dy - 1.0f);

    const float n = lerp(lerp(n00, n10, u), lerp(n01, n11, u), v);
    // Scale to roughly [-1, 1]; the raw 2D range is about [-sqrt(2)/2, sqrt(2)/2] * 2.
    return n * 1.41421356f;
}

float fbm2(const NoiseParams& params, Vec2 uv) {
    const int octaves = std::clamp(params.octaves, 1, 10);
    float sum = 0.0f;
    float amp = 1.0f;
    float norm = 0.0f;
    float freq = params.frequency;
    for (int o = 0; o < octaves; ++o) {
        sum += amp * perlin2(uv.x * freq, uv.y * freq);
        norm += amp;
        amp *= params.gain;
        freq *= params.lacunarity;
    }
    const float n = norm > 0.0f ? sum / norm : 0.0f;
    return std::fmin(std::fmax(0.5f + 0.5f * n, 0.0f), 1.0f);
}

}  // namespace matcache
