#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "msi/coco.hpp"
#include "msi/image.hpp"
#include "msi/reference_pool.hpp"
#include "msi/scene_filter.hpp"

namespace msi {

struct Placement {
    ReferenceEntry ref;
    Bbox bbox;              // scene coordinates before rounding
    int order = 0;          // compositing rank, higher = later = on top
    double mask_area = 0.0;
    int64_t annotation_id = 0;
};

struct LayoutMap {
    int width = 0;
    int height = 0;
    Image raster;
    std::vector<Placement> placements;  // input order preserved
};

// Returns image pixels for a pool-relative path. Loaders may cache; the
// returned image must stay valid for the caller's lifetime of use.
using PixelSource = std::function<std::shared_ptr<const Image>(const std::string& path)>;

// Caching PNG loader resolving paths against images_root. Thread safe.
PixelSource make_png_loader(const std::filesystem::path& images_root);

// Ranks aligned to the input order: largest mask area gets rank 0
// (composited first, background), ties by ascending annotation id.
std::vector<int> depth_rank(const std::vector<SalientSubject>& subjects);

// Composites placements onto a zero canvas in ascending order. Each
// reference is resized to its rounded, clamped bbox and copied opaquely.
LayoutMap compose_layout(int scene_width, int scene_height, const std::vector<Placement>& placements,
                         const PixelSource& source);

// Writes the raster as PNG; annotate burns in bbox outlines and order labels.
void render_preview(const LayoutMap& layout, const std::filesystem::path& out, bool annotate = false);

}  // namespace msi
