#include "matcache/image.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace matcache {

namespace {

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0 || width > 1 << 16 || height > 1 << 16) {
        throw ImageIoError("image dimensions out of range: " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
}

// Skips whitespace and '#' comment lines, then reads one token.
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const ImageF& image) {
    check_dims(image.width, image.height);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError("cannot open for writing: " + path.string());

    out << "PF\n" << image.width << " " << image.height << "\n-1.0\n";
    // Bottom-to-top row order, per convention for negative-scale PFM.
    for (int y = image.height - 1; y >= 0; --y) {
        const Color3* row = &image.at(0, y);
        out.write(reinterpret_cast<const char*>(row),
                  static_cast<std::streamsize>(image.width) * sizeof(Color3));
    }
    if (!out) throw ImageIoError("short write: " + path.string());
}

ImageF read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open: " + path.string());

    const std::string magic = next_token(in);
    if (magic != "PF") throw ImageIoError("not a color PFM file: " + path.string());
    const int width = std::stoi(next_token(in));
    const int height = std::stoi(next_token(in));
    const double scale = std::stod(next_token(in));
    check_dims(width, height);
    if (scale >= 0.0) throw ImageIoError("big-endian PFM not supported: " + path.string());

    ImageF image(width, height);
    for (int y = height - 1; y >= 0; --y) {
        Color3* row = &image.at(0, y);
        in.read(reinterpret_cast<char*>(row), static_cast<std::streamsize>(width) * sizeof(Color3));
        if (!in) throw ImageIoError("short read: " + path.string());
    }
    return image;
}

void write_ppm(const std::filesystem::path& path, const ImageF& image, bool gamma_encode) {
    check_dims(image.width, image.height);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError("cannot open for writing: " + path.string());

    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(image.width) * 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const Color3 c = image.at(x, y);
            const float ch[3] = {c.r, c.g, c.b};
            for (int k = 0; k < 3; ++k) {
                float v = std::fmin(std::fmax(ch[k], 0.0f), 1.0f);
                if (gamma_encode) v = std::pow(v, 1.0f / 2.2f);
                row[static_cast<size_t>(x) * 3 + k] =
                    static_cast<uint8_t>(std::lround(v * 255.0f));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw ImageIoError("short write: " + path.string());
}

ImageF read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open: " + path.string());

    const std::string magic = next_token(in);
    if (magic != "P6") throw ImageIoError("not a binary PPM file: " + path.string());
    const int width = std::stoi(next_token(in));
    const int height = std::stoi(next_token(in));
    const int maxval = std::stoi(next_token(in));
    check_dims(width, height);
    if (maxval != 255) throw ImageIoError("unsupported PPM maxval: " + std::to_string(maxval));

    ImageF image(width, height);
    std::vector<uint8_t> row(static_cast<size_t>(width) * 3);
    for (int y = 0; y < height; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw ImageIoError("short read: " + path.string());
        for (int x = 0; x < width; ++x) {
            image.at(x, y) = {row[static_cast<size_t>(x) * 3 + 0] / 255.0f,
                              row[static_cast<size_t>(x) * 3 + 1] / 255.0f,
                              row[static_cast<size_t>(x) * 3 + 2] / 255.0f};
        }
    }
    return image;
}

}  // namespace matcache
