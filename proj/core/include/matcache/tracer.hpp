#pragma once

#include "matcache/scene.hpp"

namespace matcache {

struct RenderConfig {
    int width = 0;   // 0 = take the camera's
    int height = 0;
    int spp = 16;
    int max_bounces = 4;
    int threads = 0;  // 0 = hardware concurrency
    bool cache_enabled = false;
    uint64_t n_cells = 1u << 20;
    uint32_t n_entries = 8;
    int mip_offset = 0;
    uint64_t rng_seed = 1;
    float diffuse_spread = 0.2f;  // cone spread added per diffuse bounce
    int tile_size = 16;
};

/// Per-pixel accumulators. Tiles partition pixels, so no two workers ever
/// touch the same entry; averages are accumulator / sample count.
struct FrameBuffers {
    int width = 0;
    int height = 0;
    std::vector<double> radiance;     // 3 per pixel
    std::vector<double> nodes_found;  // cache hits accumulated per pixel
    std::vector<uint32_t> samples;    // per pixel

    FrameBuffers() = default;
    FrameBuffers(int w, int h)
        : width(w),
          height(h),
          radiance(static_cast<size_t>(w) * h * 3, 0.0),
          nodes_found(static_cast<size_t>(w) * h, 0.0),
          samples(static_cast<size_t>(w) * h, 0) {}

    ImageF radiance_image() const;
    /// Average cache hits per sample, per pixel.
    std::vector<float> nodes_found_avg() const;
    Color3 mean_radiance() const;
};

struct RenderStats {
    double wall_time_s = 0.0;
    uint64_t lookups = 0;
    uint64_t hits = 0;
    double hit_rate = 0.0;  // hits / lookups, 0 when no lookups
    uint64_t inserts_won = 0;
    uint64_t inserts_lost_full = 0;
    uint64_t stores_attempted = 0;
    uint64_t instructions_executed = 0;
    std::vector<uint64_t> hits_per_sample;  // indexed by sample index
};

struct RenderResult {
    FrameBuffers frame;
    RenderStats stats;
};

/// Renders the scene: tile queue over pixels, one path per sample with
/// next-event light sampling, a lambertian lobe, and a ray cone driving the
/// cache descriptors. Radiance is deterministic per (pixel, sample, seed)
/// regardless of thread count when the cache is disabled.
///
/// When `external_cache` is null and the config enables the cache, a fresh
/// table is allocated for this render.
RenderResult render(const Scene& scene, const RenderConfig& config,
                    MaterialCache* external_cache = nullptr);

struct DiffStats {
    double mean_abs = 0.0;  // mean over all pixels and channels
    double max_abs = 0.0;
    ImageF diff;  // clamp(scale * |a-b|, 0, 1)
};

/// Per-channel absolute difference of two equal-sized images.
/// Throws std::invalid_argument on resolution mismatch.
DiffStats image_error(const ImageF& a, const ImageF& b, float scale = 5.0f);

/// Stats JSON for the CLI: wall time, hit counters, and the per-pixel
/// average nodes-found buffer (with dimensions, so the heatmap can be
/// rebuilt from the file alone).
std::string stats_to_json(const RenderStats& stats, const FrameBuffers& frame);

struct StatsFile {
    int width = 0;
    int height = 0;
    std::vector<float> per_pixel_nodes_found;
};
StatsFile parse_stats_json(std::string_view text);

}  // namespace matcache
