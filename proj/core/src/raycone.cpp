#include "matcache/raycone.hpp"

#include <algorithm>
#include <cmath>

namespace matcache {

RayCone cone_for_camera(float vfov_radians, int image_height) {
    RayCone cone;
    cone.width = 0.0f;
    cone.spread = std::atan(2.0f * std::tan(vfov_radians * 0.5f) / static_cast<float>(image_height));
    return cone;
}

RayCone propagate(RayCone cone, float distance) {
    cone.width += distance * cone.spread;
    return cone;
}

RayCone widen(RayCone cone, float extra_spread) {
    cone.spread += extra_spread;
    return cone;
}

namespace {

// Any unit vector orthogonal to n.
Vec3 any_tangent(Vec3 n) {
    const Vec3 axis = std::fabs(n.x) < 0.9f ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return normalize(cross(n, axis));
}

// Least-squares decomposition of a tangent vector in the patch basis,
// mapped through the patch's uv edges.
Vec2 world_to_uv(Vec3 a, const UvPatch& patch) {
    const float g11 = dot(patch.e1, patch.e1);
    const float g12 = dot(patch.e1, patch.e2);
    const float g22 = dot(patch.e2, patch.e2);
    const float det = g11 * g22 - g12 * g12;
    if (std::fabs(det) < 1e-20f) return {0.0f, 0.0f};
    const float r1 = dot(a, patch.e1);
    const float r2 = dot(a, patch.e2);
    const float alpha = (r1 * g22 - r2 * g12) / det;
    const float beta = (r2 * g11 - r1 * g12) / det;
    return patch.duv1 * alpha + patch.duv2 * beta;
}

}  // namespace

std::pair<Vec2, Vec2> footprint_gradients(const RayCone& cone, Vec3 incoming, Vec3 normal,
                                          const UvPatch& patch) {
    const float cos_theta = std::fmax(std::fabs(dot(incoming, normal)), 1e-4f);

    // Major axis follows the ray direction projected into the tangent plane;
    // a perpendicular hit has no preferred direction, any tangent will do.
    Vec3 proj = incoming - normal * dot(incoming, normal);
    const float proj_len = length(proj);
    Vec3 axis1 = proj_len > 1e-6f ? proj * (1.0f / proj_len) : any_tangent(normal);
    Vec3 axis2 = normalize(cross(normal, axis1));

    const float half_major = cone.width / (2.0f * cos_theta);
    const float half_minor = cone.width * 0.5f;

    return {world_to_uv(axis1 * half_major, patch), world_to_uv(axis2 * half_minor, patch)};
}

uint8_t mip_level(Vec2 g1, Vec2 g2, int mip_offset) {
    const float m = std::fmin(length(g1), length(g2));
    if (!(m > 0.0f)) return kMaxMipLevel;  // degenerate footprint
    const double lambda = -std::log2(static_cast<double>(m));
    const int level = static_cast<int>(std::floor(lambda)) + mip_offset;
    return static_cast<uint8_t>(std::clamp(level, 0, kMaxMipLevel));
}

std::pair<uint32_t, uint32_t> texel_indices(Vec2 uv, uint8_t level) {
    const uint32_t resolution = 1u << level;
    const auto index = [resolution](float t) -> uint32_t {
        const float wrapped = t - std::floor(t);  // [0, 1)
        const uint32_t i = static_cast<uint32_t>(wrapped * static_cast<float>(resolution));
        return i >= resolution ? resolution - 1 : i;
    };
    return {index(uv.x), index(uv.y)};
}

}  // namespace matcache
