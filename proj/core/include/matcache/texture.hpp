#pragma once

#include <map>
#include <memory>
#include <string>

#include "matcache/geom.hpp"
#include "matcache/image.hpp"

namespace matcache {

enum class WrapMode : uint8_t { Repeat, Clamp };

struct Texture {
    std::string ref;
    ImageF image;
};

/// Bilinear sample at (wrapped) uv. Texel centers sit at half-integer
/// coordinates; indices wrap or clamp per mode.
Color3 sample_bilinear(const ImageF& image, Vec2 uv, WrapMode wrap);

/// Checker pattern over uv scaled by `scale`; returns 1 or 0.
float checker(float scale, Vec2 uv);

/// Immutable set of textures resolved by reference string. Load everything
/// up front; lookups afterwards are read-only and thread-safe.
class TexturePool {
public:
    /// Loads `ref` (a path relative to `root`) if not already present.
    /// Throws ImageIoError on failure.
    const Texture* load(const std::string& ref, const std::filesystem::path& root);

    /// Returns the loaded texture or nullptr.
    const Texture* find(const std::string& ref) const;

    size_t size() const { return textures_.size(); }

private:
    std::map<std::string, std::unique_ptr<Texture>> textures_;
};

}  // namespace matcache
