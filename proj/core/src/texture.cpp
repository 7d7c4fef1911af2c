#include "matcache/texture.hpp"

#include <cmath>

namespace matcache {

namespace {

inline float wrap_coord(float t, WrapMode wrap) {
    if (wrap == WrapMode::Repeat) return t - std::floor(t);
    return std::fmin(std::fmax(t, 0.0f), 1.0f);
}

inline int wrap_index(int i, int n, WrapMode wrap) {
    if (wrap == WrapMode::Repeat) {
        i %= n;
        return i < 0 ? i + n : i;
    }
    return i < 0 ? 0 : (i >= n ? n - 1 : i);
}

}  // namespace

Color3 sample_bilinear(const ImageF& image, Vec2 uv, WrapMode wrap) {
    const float u = wrap_coord(uv.x, wrap);
    const float v = wrap_coord(uv.y, wrap);

    const float x = u * static_cast<float>(image.width) - 0.5f;
    const float y = v * static_cast<float>(image.height) - 0.5f;
    const float fx = std::floor(x);
    const float fy = std::floor(y);
    const float tx = x - fx;
    const float ty = y - fy;

    const int x0 = wrap_index(static_cast<int>(fx), image.width, wrap);
    const int x1 = wrap_index(static_cast<int>(fx) + 1, image.width, wrap);
    const int y0 = wrap_index(static_cast<int>(fy), image.height, wrap);
    const int y1 = wrap_index(static_cast<int>(fy) + 1, image.height, wrap);

    const Color3 c00 = image.at(x0, y0);
    const Color3 c10 = image.at(x1, y0);
    const Color3 c01 = image.at(x0, y1);
    const Color3 c11 = image.at(x1, y1);

    const Color3 top = c00 * (1.0f - tx) + c10 * tx;
    const Color3 bot = c01 * (1.0f - tx) + c11 * tx;
    return top * (1.0f - ty) + bot * ty;
}

float checker(float scale, Vec2 uv) {
    const int iu = static_cast<int>(std::floor(uv.x * scale));
    const int iv = static_cast<int>(std::floor(uv.y * scale));
    return ((iu + iv) & 1) == 0 ? 1.0f : 0.0f;
}

const Texture* TexturePool::load(const std::string& ref, const std::filesystem::path& root) {
    auto it = textures_.find(ref);
    if (it != textures_.end()) return it->second.get();

    auto tex = std::make_unique<Texture>();
    tex->ref = ref;
    tex->image = read_ppm(root / ref);
    const Texture* ptr = tex.get();
    textures_.emplace(ref, std::move(tex));
    return ptr;
}

const Texture* TexturePool::find(const std::string& ref) const {
    auto it = textures_.find(ref);
    return it == textures_.end() ? nullptr : it->second.get();
}

}  // namespace matcache
