#include "msi/layout.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <unordered_map>

#include "msi/errors.hpp"

namespace msi {

PixelSource make_png_loader(const std::filesystem::path& images_root) {
    struct Cache {
        std::mutex mutex;
        std::unordered_map<std::string, std::shared_ptr<const Image>> images;
    };
    auto cache = std::make_shared<Cache>();
    return [images_root, cache](const std::string& path) -> std::shared_ptr<const Image> {
        {
            std::lock_guard<std::mutex> lock(cache->mutex);
            auto it = cache->images.find(path);
            if (it != cache->images.end()) return it->second;
        }
        auto img = std::make_shared<const Image>(read_png(images_root / path));
        std::lock_guard<std::mutex> lock(cache->mutex);
        return cache->images.emplace(path, std::move(img)).first->second;
    };
}

std::vector<int> depth_rank(const std::vector<SalientSubject>& subjects) {
    std::vector<size_t> idx(subjects.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t l, size_t r) {
        if (subjects[l].area != subjects[r].area) return subjects[l].area > subjects[r].area;
        return subjects[l].annotation_id < subjects[r].annotation_id;
    });
    std::vector<int> ranks(subjects.size());
    for (size_t rank = 0; rank < idx.size(); ++rank) ranks[idx[rank]] = static_cast<int>(rank);
    return ranks;
}

namespace {

void check_permutation(const std::vector<Placement>& placements) {
    std::vector<bool> seen(placements.size(), false);
    for (const Placement& p : placements) {
        if (p.order < 0 || p.order >= static_cast<int>(placements.size()) || seen[p.order])
            throw InternalError("placement orders are not a permutation of 0.." +
                                std::to_string(placements.size() - 1));
        seen[p.order] = true;
    }
}

void blit_opaque(Image& canvas, const Image& patch, int x0, int y0) {
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x)
            for (int c = 0; c < 3; ++c) canvas.set(x0 + x, y0 + y, c, patch.at(x, y, c));
}

// 3x5 digit glyphs for order labels, row-major.
const char* const kDigits[10] = {
    "111101101101111", "010110010010111", "111001111100111", "111001111001111",
    "101101111001001", "111100111001111", "111100111101111", "111001001001001",
    "111101111101111", "111101111001111",
};

void put_white(Image& img, int x, int y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    for (int c = 0; c < 3; ++c) img.set(x, y, c, 255);
}

void draw_label(Image& img, int x0, int y0, int value) {
    std::string digits = std::to_string(value);
    int x = x0;
    for (char d : digits) {
        const char* glyph = kDigits[d - '0'];
        for (int gy = 0; gy < 5; ++gy)
            for (int gx = 0; gx < 3; ++gx)
                if (glyph[gy * 3 + gx] == '1') put_white(img, x + gx, y0 + gy);
        x += 4;
    }
}

void draw_outline(Image& img, const IntBox& box) {
    for (int x = box.x; x < box.x + box.w; ++x) {
        put_white(img, x, box.y);
        put_white(img, x, box.y + box.h - 1);
    }
    for (int y = box.y; y < box.y + box.h; ++y) {
        put_white(img, box.x, y);
        put_white(img, box.x + box.w - 1, y);
    }
}

}  // namespace

LayoutMap compose_layout(int scene_width, int scene_height, const std::vector<Placement>& placements,
                         const PixelSource& source) {
    if (scene_width <= 0 || scene_height <= 0)
        throw InternalError("layout canvas requires positive dimensions");
    check_permutation(placements);

    LayoutMap layout;
    layout.width = scene_width;
    layout.height = scene_height;
    layout.raster = make_image(scene_width, scene_height);
    layout.placements = placements;

    std::vector<const Placement*> by_rank(placements.size());
    for (const Placement& p : placements) by_rank[p.order] = &p;

    for (const Placement* p : by_rank) {
        IntBox box = clamp_box(round_box(p->bbox), scene_width, scene_height);
        if (box.w <= 0 || box.h <= 0)
            throw ZeroSizeBox("bbox of annotation " + std::to_string(p->annotation_id) +
                              " has no pixels after rounding and clamping");
        std::shared_ptr<const Image> ref = source(p->ref.image_path);
        Image resized = resize_bilinear(*ref, box.w, box.h);
        blit_opaque(layout.raster, resized, box.x, box.y);
    }
    return layout;
}

void render_preview(const LayoutMap& layout, const std::filesystem::path& out, bool annotate) {
    if (!annotate) {
        write_png(out, layout.raster);
        return;
    }
    Image img = layout.raster;
    std::vector<const Placement*> by_rank(layout.placements.size());
    for (const Placement& p : layout.placements) by_rank[p.order] = &p;
    for (const Placement* p : by_rank) {
        IntBox box = clamp_box(round_box(p->bbox), layout.width, layout.height);
        if (box.w <= 0 || box.h <= 0) continue;
        draw_outline(img, box);
        draw_label(img, box.x + 2, box.y + 2, p->order);
    }
    write_png(out, img);
}

}  // namespace msi
