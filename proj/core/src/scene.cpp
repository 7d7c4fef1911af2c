#include "matcache/scene.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace matcache {

using nlohmann::json;

namespace {

constexpr float kPi = 3.14159265358979323846f;

Vec3 parse_vec3(const json& j) {
    if (!j.is_array() || j.size() != 3) throw SceneError("expected a 3-element array");
    return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
}

Color3 parse_color(const json& j) {
    const Vec3 v = parse_vec3(j);
    return {v.x, v.y, v.z};
}

struct Aabb {
    Vec3 min{1e30f, 1e30f, 1e30f};
    Vec3 max{-1e30f, -1e30f, -1e30f};

    void grow(Vec3 p) {
        min = {std::fmin(min.x, p.x), std::fmin(min.y, p.y), std::fmin(min.z, p.z)};
        max = {std::fmax(max.x, p.x), std::fmax(max.y, p.y), std::fmax(max.z, p.z)};
    }
    void grow(const Aabb& b) {
        grow(b.min);
        grow(b.max);
    }
    Vec3 centroid() const { return (min + max) * 0.5f; }
};

bool ray_aabb(const Ray& ray, Vec3 bmin, Vec3 bmax, float t_min, float t_max) {
    const float inv[3] = {1.0f / ray.dir.x, 1.0f / ray.dir.y, 1.0f / ray.dir.z};
    const float o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
    const float lo[3] = {bmin.x, bmin.y, bmin.z};
    const float hi[3] = {bmax.x, bmax.y, bmax.z};
    for (int a = 0; a < 3; ++a) {
        float t0 = (lo[a] - o[a]) * inv[a];
        float t1 = (hi[a] - o[a]) * inv[a];
        if (inv[a] < 0.0f) std::swap(t0, t1);
        t_min = std::fmax(t_min, t0);
        t_max = std::fmin(t_max, t1);
        if (t_max < t_min) return false;
    }
    return true;
}

bool ray_triangle(const Ray& ray, Vec3 p0, Vec3 p1, Vec3 p2, float t_min, float t_max, float* t,
                  float* b1, float* b2) {
    const Vec3 e1 = p1 - p0;
    const Vec3 e2 = p2 - p0;
    const Vec3 pvec = cross(ray.dir, e2);
    const float det = dot(e1, pvec);
    if (std::fabs(det) < 1e-12f) return false;
    const float inv_det = 1.0f / det;
    const Vec3 tvec = ray.origin - p0;
    const float u = dot(tvec, pvec) * inv_det;
    if (u < 0.0f || u > 1.0f) return false;
    const Vec3 qvec = cross(tvec, e1);
    const float v = dot(ray.dir, qvec) * inv_det;
    if (v < 0.0f || u + v > 1.0f) return false;
    const float hit_t = dot(e2, qvec) * inv_det;
    if (hit_t <= t_min || hit_t >= t_max) return false;
    *t = hit_t;
    *b1 = u;
    *b2 = v;
    return true;
}

bool ray_sphere(const Ray& ray, Vec3 center, float radius, float t_min, float t_max, float* t) {
    const Vec3 oc = ray.origin - center;
    const float b = dot(oc, ray.dir);
    const float c = dot(oc, oc) - radius * radius;
    const float disc = b * b - c;
    if (disc < 0.0f) return false;
    const float sq = std::sqrt(disc);
    float root = -b - sq;
    if (root <= t_min || root >= t_max) {
        root = -b + sq;
        if (root <= t_min || root >= t_max) return false;
    }
    *t = root;
    return true;
}

}  // namespace

void Scene::prepare() {
    slot_by_id_.clear();
    for (uint32_t i = 0; i < materials.size(); ++i) {
        slot_by_id_[materials[i].source.material_id] = i;
    }

    prims_.clear();
    for (uint32_t m = 0; m < meshes.size(); ++m) {
        const MeshObject& mesh = meshes[m];
        if (mesh.positions.size() != mesh.uvs.size()) {
            throw SceneError("mesh must carry one uv per vertex");
        }
        if (mesh.indices.size() % 3 != 0) throw SceneError("mesh indices must be triples");
        for (uint32_t i = 0; i < mesh.indices.size(); i += 3) {
            prims_.push_back({m, i, 0});
        }
        material_slot(mesh.material_id);  // validates the id resolves
    }
    for (uint32_t s = 0; s < spheres.size(); ++s) {
        prims_.push_back({~0u, 0, s});
        material_slot(spheres[s].material_id);
    }

    prim_order_.resize(prims_.size());
    for (uint32_t i = 0; i < prim_order_.size(); ++i) prim_order_[i] = i;
    bvh_.clear();
    if (!prims_.empty()) build_bvh(0, static_cast<uint32_t>(prims_.size()));
}

uint32_t Scene::material_slot(uint32_t material_id) const {
    const auto it = slot_by_id_.find(material_id);
    if (it == slot_by_id_.end()) {
        throw SceneError("material id " + std::to_string(material_id) +
                         " does not resolve to a loaded material");
    }
    return it->second;
}

namespace {

Aabb prim_bounds(const detail::Primitive& prim, const std::vector<MeshObject>& meshes,
                 const std::vector<SphereObject>& spheres) {
    Aabb box;
    if (prim.mesh != ~0u) {
        const MeshObject& mesh = meshes[prim.mesh];
        for (int k = 0; k < 3; ++k) box.grow(mesh.positions[mesh.indices[prim.tri + k]]);
    } else {
        const SphereObject& s = spheres[prim.sphere];
        box.grow(s.center - Vec3{s.radius, s.radius, s.radius});
        box.grow(s.center + Vec3{s.radius, s.radius, s.radius});
    }
    return box;
}

}  // namespace

int32_t Scene::build_bvh(uint32_t first, uint32_t count) {
    Aabb bounds;
    Aabb centroid_bounds;
    for (uint32_t i = first; i < first + count; ++i) {
        const Aabb b = prim_bounds(prims_[prim_order_[i]], meshes, spheres);
        bounds.grow(b);
        centroid_bounds.grow(b.centroid());
    }

    const int32_t index = static_cast<int32_t>(bvh_.size());
    bvh_.push_back({});
    bvh_[index].bounds_min = bounds.min;
    bvh_[index].bounds_max = bounds.max;

    if (count <= 4) {
        bvh_[index].first = first;
        bvh_[index].count = count;
        return index;
    }

    // Median split on the widest centroid axis.
    const Vec3 extent = centroid_bounds.max - centroid_bounds.min;
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;

    const auto centroid_axis = [&](uint32_t prim_index) {
        const Vec3 c = prim_bounds(prims_[prim_index], meshes, spheres).centroid();
        return axis == 0 ? c.x : (axis == 1 ? c.y : c.z);
    };
    const uint32_t mid = first + count / 2;
    std::nth_element(prim_order_.begin() + first, prim_order_.begin() + mid,
                     prim_order_.begin() + first + count,
                     [&](uint32_t a, uint32_t b) { return centroid_axis(a) < centroid_axis(b); });

    const int32_t left = build_bvh(first, mid - first);
    const int32_t right = build_bvh(mid, first + count - mid);
    bvh_[index].left = left;
    bvh_[index].right = right;
    return index;
}

bool Scene::intersect_prim(const detail::Primitive& prim, const Ray& ray, float t_min, float t_max,
                           HitRecord* hit) const {
    if (prim.mesh != ~0u) {
        const MeshObject& mesh = meshes[prim.mesh];
        const uint32_t i0 = mesh.indices[prim.tri + 0];
        const uint32_t i1 = mesh.indices[prim.tri + 1];
        const uint32_t i2 = mesh.indices[prim.tri + 2];
        float t, b1, b2;
        if (!ray_triangle(ray, mesh.positions[i0], mesh.positions[i1], mesh.positions[i2], t_min,
                          t_max, &t, &b1, &b2)) {
            return false;
        }
        if (!hit) return true;
        hit->t = t;
        hit->position = ray.origin + ray.dir * t;
        const Vec3 e1 = mesh.positions[i1] - mesh.positions[i0];
        const Vec3 e2 = mesh.positions[i2] - mesh.positions[i0];
        Vec3 n = normalize(cross(e1, e2));
        if (dot(n, ray.dir) > 0.0f) n = -n;
        hit->normal = n;
        hit->uv = mesh.uvs[i0] * (1.0f - b1 - b2) + mesh.uvs[i1] * b1 + mesh.uvs[i2] * b2;
        hit->patch = {e1, e2, mesh.uvs[i1] - mesh.uvs[i0], mesh.uvs[i2] - mesh.uvs[i0]};
        hit->material_slot = material_slot(mesh.material_id);
        return true;
    }

    const SphereObject& sphere = spheres[prim.sphere];
    float t;
    if (!ray_sphere(ray, sphere.center, sphere.radius, t_min, t_max, &t)) return false;
    if (!hit) return true;
    hit->t = t;
    hit->position = ray.origin + ray.dir * t;
    const Vec3 m = normalize(hit->position - sphere.center);
    Vec3 n = m;
    if (dot(n, ray.dir) > 0.0f) n = -n;
    hit->normal = n;

    // Lat-long parameterization; poles fall back to an arbitrary frame.
    hit->uv = {0.5f + std::atan2(m.z, m.x) / (2.0f * kPi),
               std::acos(std::fmin(std::fmax(m.y, -1.0f), 1.0f)) / kPi};
    const float sin_theta = std::sqrt(std::fmax(0.0f, 1.0f - m.y * m.y));
    Vec3 dp_du, dp_dv;
    if (sin_theta > 1e-6f) {
        dp_du = Vec3{-m.z, 0.0f, m.x} * (2.0f * kPi * sphere.radius);
        const float cos_phi = m.x / sin_theta;
        const float sin_phi = m.z / sin_theta;
        dp_dv = Vec3{m.y * cos_phi, -sin_theta, m.y * sin_phi} * (kPi * sphere.radius);
    } else {
        dp_du = Vec3{1, 0, 0} * (2.0f * kPi * sphere.radius);
        dp_dv = Vec3{0, 0, 1} * (kPi * sphere.radius);
    }
    hit->patch = {dp_du, dp_dv, {1.0f, 0.0f}, {0.0f, 1.0f}};
    hit->material_slot = material_slot(sphere.material_id);
    return true;
}

bool Scene::intersect(const Ray& ray, float t_min, float t_max, HitRecord* hit) const {
    if (bvh_.empty()) return false;
    bool found = false;
    float closest = t_max;

    int32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const detail::BvhNode& node = bvh_[stack[--top]];
        if (!ray_aabb(ray, node.bounds_min, node.bounds_max, t_min, closest)) continue;
        if (node.left < 0) {
            for (uint32_t i = node.first; i < node.first + node.count; ++i) {
                HitRecord local;
                if (intersect_prim(prims_[prim_order_[i]], ray, t_min, closest, &local)) {
                    closest = local.t;
                    *hit = local;
                    found = true;
                }
            }
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    return found;
}

bool Scene::occluded(const Ray& ray, float t_min, float t_max) const {
    if (bvh_.empty()) return false;
    int32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const detail::BvhNode& node = bvh_[stack[--top]];
        if (!ray_aabb(ray, node.bounds_min, node.bounds_max, t_min, t_max)) continue;
        if (node.left < 0) {
            for (uint32_t i = node.first; i < node.first + node.count; ++i) {
                if (intersect_prim(prims_[prim_order_[i]], ray, t_min, t_max, nullptr)) return true;
            }
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    return false;
}

Scene load_scene(const std::filesystem::path& path, const AnalysisOptions& analysis) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SceneError("cannot open scene file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();

    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw SceneError(std::string("scene JSON parse error: ") + e.what());
    }

    Scene scene;
    const std::filesystem::path scene_dir = path.parent_path();
    try {
        const json& cam = doc.at("camera");
        scene.camera.position = parse_vec3(cam.at("position"));
        scene.camera.look_at = parse_vec3(cam.at("look_at"));
        if (cam.contains("up")) scene.camera.up = parse_vec3(cam.at("up"));
        scene.camera.vfov_deg = cam.at("vfov_deg").get<float>();
        scene.camera.width = cam.value("width", 256);
        scene.camera.height = cam.value("height", 256);

        for (const auto& mpath : doc.value("materials", json::array())) {
            const std::filesystem::path material_file =
                scene_dir / mpath.get<std::string>();
            MaterialRuntime runtime;
            runtime.source = load_graph_file(material_file);
            // Image references are relative to the material file's directory.
            for (const Node& node : runtime.source.nodes) {
                if (node.kind == NodeKind::TexImage) {
                    scene.textures.load(std::get<TexImageParams>(node.params).image,
                                        material_file.parent_path());
                }
            }
            runtime.analyzed = analyze(runtime.source, analysis);
            runtime.program = compile(runtime.analyzed, scene.textures);
            scene.materials.push_back(std::move(runtime));
        }

        for (const auto& jm : doc.value("meshes", json::array())) {
            MeshObject mesh;
            const auto& pos = jm.at("positions");
            for (size_t i = 0; i + 2 < pos.size(); i += 3) {
                mesh.positions.push_back(
                    {pos[i].get<float>(), pos[i + 1].get<float>(), pos[i + 2].get<float>()});
            }
            const auto& uvs = jm.at("uvs");
            for (size_t i = 0; i + 1 < uvs.size(); i += 2) {
                mesh.uvs.push_back({uvs[i].get<float>(), uvs[i + 1].get<float>()});
            }
            for (const auto& idx : jm.at("indices")) mesh.indices.push_back(idx.get<uint32_t>());
            mesh.material_id = jm.at("material").get<uint32_t>();
            scene.meshes.push_back(std::move(mesh));
        }

        for (const auto& js : doc.value("spheres", json::array())) {
            SphereObject sphere;
            sphere.center = parse_vec3(js.at("center"));
            sphere.radius = js.at("radius").get<float>();
            sphere.material_id = js.at("material").get<uint32_t>();
            scene.spheres.push_back(sphere);
        }

        for (const auto& jl : doc.value("lights", json::array())) {
            const std::string type = jl.at("type").get<std::string>();
            if (type == "point") {
                scene.point_lights.push_back(
                    {parse_vec3(jl.at("position")), parse_color(jl.at("intensity"))});
            } else if (type == "rect") {
                scene.rect_lights.push_back({parse_vec3(jl.at("corner")),
                                             parse_vec3(jl.at("edge_u")),
                                             parse_vec3(jl.at("edge_v")),
                                             parse_color(jl.at("radiance"))});
            } else {
                throw SceneError("unknown light type '" + type + "'");
            }
        }

        if (doc.contains("env")) scene.env = parse_color(doc.at("env"));
    } catch (const json::exception& e) {
        throw SceneError(std::string("scene JSON schema error: ") + e.what());
    }

    scene.prepare();
    return scene;
}

}  // namespace matcache
