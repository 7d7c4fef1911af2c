#pragma once

#include <cstdint>
#include <utility>

#include "matcache/geom.hpp"

namespace matcache {

/// Cone carried along a ray: world-space width at the current point and the
/// spread (growth rate, radians) it widens with per unit distance.
struct RayCone {
    float width = 0.0f;
    float spread = 0.0f;
};

/// Highest virtual mip level; bounds texel indices and descriptor size.
constexpr int kMaxMipLevel = 24;

/// Primary cone at the camera: zero width, spread covering one pixel of the
/// vertical field of view.
RayCone cone_for_camera(float vfov_radians, int image_height);

/// Linearized transport: width grows by distance * spread.
RayCone propagate(RayCone cone, float distance);

/// Spread growth applied at a scattering event (e.g. a diffuse bounce).
RayCone widen(RayCone cone, float extra_spread);

/// A surface patch's linear uv map: two world-space edge vectors and their
/// uv-space images. For triangles these come from the vertex data; for
/// spheres from the analytic parameterization derivatives.
struct UvPatch {
    Vec3 e1, e2;
    Vec2 duv1, duv2;
};

/// uv-space images of the footprint ellipse axes. The ellipse lies in the
/// tangent plane: the axis along the projected ray direction has half-length
/// width / (2 cos(theta)), the perpendicular axis width / 2. Grazing hits
/// clamp cos(theta) to 1e-4 to bound the anisotropy.
std::pair<Vec2, Vec2> footprint_gradients(const RayCone& cone, Vec3 incoming, Vec3 normal,
                                          const UvPatch& patch);

/// Virtual-texture level from the gradients: floor(-log2(min norm)) plus
/// the accuracy offset, clamped to [0, kMaxMipLevel]. The virtual hierarchy
/// is inverted relative to standard mips: resolution 2^level grows with the
/// level, and a degenerate (zero) footprint lands on the finest level.
uint8_t mip_level(Vec2 g1, Vec2 g2, int mip_offset);

/// Texel of the 2^level x 2^level virtual texture containing uv. uv wraps
/// into [0,1) by floor-fract.
std::pair<uint32_t, uint32_t> texel_indices(Vec2 uv, uint8_t level);

}  // namespace matcache
