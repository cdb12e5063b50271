#include "msi/image.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <string>

#include "msi/errors.hpp"
#include "msi/io.hpp"

namespace msi {

Image make_image(int width, int height) {
    Image img;
    img.width = width;
    img.height = height;
    img.data.assign(static_cast<size_t>(width) * height * 3, 0);
    return img;
}

Image read_png(const std::filesystem::path& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw ImageLoadFailure("cannot open image: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        std::fclose(fp);
        throw ImageLoadFailure("libpng initialization failed for " + path.string());
    }

    Image img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw ImageLoadFailure("failed to decode PNG: " + path.string());
    }

    png_init_io(png, fp);
    png_read_info(png, info);

    // Normalize every layout to 8-bit RGB.
    png_byte color = png_get_color_type(png, info);
    png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int width = static_cast<int>(png_get_image_width(png, info));
    int height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_channels(png, info) != 3 || png_get_bit_depth(png, info) != 8)
        png_error(png, "unexpected channel layout after transforms");

    img = make_image(width, height);
    rows.resize(height);
    for (int y = 0; y < height; ++y)
        rows[y] = img.data.data() + static_cast<size_t>(y) * width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

namespace {

void append_chunk(png_structp png, png_bytep data, png_size_t len) {
    auto* buf = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
    buf->insert(buf->end(), data, data + len);
}

void flush_noop(png_structp) {}

}  // namespace

std::vector<uint8_t> encode_png(const Image& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.data.size() != static_cast<size_t>(img.width) * img.height * 3)
        throw IoFailure("cannot encode an empty or inconsistent image");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        throw IoFailure("libpng initialization failed for encode");
    }

    std::vector<uint8_t> buf;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoFailure("PNG encode failed");
    }

    png_set_write_fn(png, &buf, append_chunk, flush_noop);
    // Pinned settings keep the byte stream a pure function of the raster.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    rows.resize(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(img.data.data() + static_cast<size_t>(y) * img.width * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);

    png_destroy_write_struct(&png, &info);
    return buf;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    std::vector<uint8_t> buf = encode_png(img);
    atomic_write_file(path, std::string_view(reinterpret_cast<const char*>(buf.data()), buf.size()));
}

Image resize_bilinear(const Image& src, int out_w, int out_h) {
    if (src.width <= 0 || src.height <= 0) throw ImageLoadFailure("cannot resize an empty image");
    if (out_w <= 0 || out_h <= 0) throw ZeroSizeBox("resize target has non-positive dimensions");

    Image out = make_image(out_w, out_h);
    const double sx = static_cast<double>(src.width) / out_w;
    const double sy = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        if (fy < 0) fy = 0;
        if (fy > src.height - 1) fy = src.height - 1;
        int y0 = static_cast<int>(fy);
        int y1 = y0 + 1 < src.height ? y0 + 1 : y0;
        double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            if (fx < 0) fx = 0;
            if (fx > src.width - 1) fx = src.width - 1;
            int x0 = static_cast<int>(fx);
            int x1 = x0 + 1 < src.width ? x0 + 1 : x0;
            double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                double top = src.at(x0, y0, c) * (1.0 - wx) + src.at(x1, y0, c) * wx;
                double bot = src.at(x0, y1, c) * (1.0 - wx) + src.at(x1, y1, c) * wx;
                double v = top * (1.0 - wy) + bot * wy;
                long q = std::lround(v);
                if (q < 0) q = 0;
                if (q > 255) q = 255;
                out.set(x, y, c, static_cast<uint8_t>(q));
            }
        }
    }
    return out;
}

}  // namespace msi
