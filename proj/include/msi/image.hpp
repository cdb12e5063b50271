#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace msi {

// Interleaved 8-bit RGB raster, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    uint8_t at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    void set(int x, int y, int c, uint8_t v) {
        data[(static_cast<size_t>(y) * width + x) * 3 + c] = v;
    }
};

Image make_image(int width, int height);

// Decodes any PNG color layout to 8-bit RGB. Throws ImageLoadFailure.
Image read_png(const std::filesystem::path& path);

// Encodes with pinned compression settings so identical rasters produce
// identical bytes, then writes atomically. Throws IoFailure.
void write_png(const std::filesystem::path& path, const Image& img);

// In-memory encode with the same pinned settings as write_png.
std::vector<uint8_t> encode_png(const Image& img);

// Anisotropic stretch to exactly (out_w, out_h), bilinear with
// center-aligned sample mapping and clamped edges.
Image resize_bilinear(const Image& src, int out_w, int out_h);

}  // namespace msi
