#pragma once

#include <filesystem>
#include <vector>

#include "matcache/value.hpp"

namespace matcache {

/// Linear float RGB image, row 0 at the top.
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<Color3> pixels;

    ImageF() = default;
    ImageF(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h) {}

    Color3& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    const Color3& at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

/// I/O failure (missing file, bad magic, short read/write).
class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// PFM, little-endian, scale -1.0, rows stored bottom-to-top. Full float
/// precision; byte-for-byte deterministic for identical inputs.
void write_pfm(const std::filesystem::path& path, const ImageF& image);
ImageF read_pfm(const std::filesystem::path& path);

/// Binary PPM (P6, maxval 255). When `gamma_encode` is set, components pass
/// through a 1/2.2 power curve before quantization; otherwise values are
/// written linearly. Either way input is clamped to [0, 1].
void write_ppm(const std::filesystem::path& path, const ImageF& image, bool gamma_encode);

/// Reads a binary PPM into linear floats in [0, 1] (no gamma decode; the
/// bundled textures are authored as linear data).
ImageF read_ppm(const std::filesystem::path& path);

}  // namespace matcache
