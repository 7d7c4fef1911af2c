#pragma once

#include <unordered_map>

#include "matcache/raycone.hpp"
#include "matcache/stackvm.hpp"

namespace matcache {

struct Camera {
    Vec3 position{0, 0, 0};
    Vec3 look_at{0, 0, -1};
    Vec3 up{0, 1, 0};
    float vfov_deg = 45.0f;
    int width = 256;
    int height = 256;
};

struct MeshObject {
    std::vector<Vec3> positions;
    std::vector<Vec2> uvs;        // one per vertex
    std::vector<uint32_t> indices;  // triangle triples
    uint32_t material_id = 0;
};

struct SphereObject {
    Vec3 center;
    float radius = 1.0f;
    uint32_t material_id = 0;
};

struct PointLight {
    Vec3 position;
    Color3 intensity;  // radiant intensity; falls off with 1/r^2
};

struct RectLight {
    Vec3 corner;
    Vec3 edge_u;
    Vec3 edge_v;
    Color3 radiance;  // two-sided
};

/// A material ready to render: the loaded graph, its analysis, and the
/// compiled program.
struct MaterialRuntime {
    MaterialGraph source;
    AnalyzedGraph analyzed;
    CompiledProgram program;
};

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit
};

struct HitRecord {
    float t = 0.0f;
    Vec3 position;
    Vec3 normal;  // unit, flipped toward the ray origin
    Vec2 uv;
    UvPatch patch;
    uint32_t material_slot = 0;
};

class SceneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct BvhNode {
    Vec3 bounds_min, bounds_max;
    int32_t left = -1;    // internal: child index; leaf: -1
    int32_t right = -1;
    uint32_t first = 0;   // leaf: offset into primitive order
    uint32_t count = 0;   // leaf: primitive count
};

struct Primitive {
    uint32_t mesh = ~0u;  // ~0 means sphere
    uint32_t tri = 0;     // first index of the triangle
    uint32_t sphere = 0;
};

}  // namespace detail

/// Loaded scene with compiled materials and a BVH. Immutable once loaded;
/// intersection queries are const and thread-safe.
class Scene {
public:
    Camera camera;
    std::vector<MeshObject> meshes;
    std::vector<SphereObject> spheres;
    std::vector<PointLight> point_lights;
    std::vector<RectLight> rect_lights;
    Color3 env;
    std::vector<MaterialRuntime> materials;
    TexturePool textures;

    /// Builds the BVH and the material-id index. Call after mutating
    /// geometry (load_scene does it for you).
    void prepare();

    uint32_t material_slot(uint32_t material_id) const;

    /// Closest hit in (t_min, t_max); fills `hit` on success.
    bool intersect(const Ray& ray, float t_min, float t_max, HitRecord* hit) const;

    /// Any-hit predicate for shadow rays.
    bool occluded(const Ray& ray, float t_min, float t_max) const;

private:
    std::unordered_map<uint32_t, uint32_t> slot_by_id_;
    std::vector<detail::Primitive> prims_;
    std::vector<uint32_t> prim_order_;
    std::vector<detail::BvhNode> bvh_;

    int32_t build_bvh(uint32_t first, uint32_t count);
    bool intersect_prim(const detail::Primitive& prim, const Ray& ray, float t_min, float t_max,
                        HitRecord* hit) const;
};

/// Loads a scene JSON file, its referenced material files, and their
/// textures, then analyzes and compiles every material.
Scene load_scene(const std::filesystem::path& path, const AnalysisOptions& analysis = {});

}  // namespace matcache
