#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "msi/geometry.hpp"
#include "msi/io.hpp"
#include "msi/mask.hpp"

namespace msi {

// Polygon segmentation: one or more rings of flattened x,y pairs.
struct PolygonSeg {
    std::vector<std::vector<double>> rings;
};

// Run-length segmentation, counts already unpacked from either the
// uncompressed list form or the char-packed string form.
struct RleSeg {
    RleCounts counts;
    int height = 0;
    int width = 0;
};

using Segmentation = std::variant<std::monostate, PolygonSeg, RleSeg>;

struct ImageMeta {
    int64_t id = 0;
    int width = 0;
    int height = 0;
    std::string file_name;
};

struct CategoryMeta {
    int64_t id = 0;
    std::string name;
};

struct InstanceAnnotation {
    int64_t id = 0;
    int64_t image_id = 0;
    int64_t category_id = 0;
    Bbox bbox;
    double stored_area = 0.0;
    bool iscrowd = false;
    Segmentation seg;
};

struct CaptionAnnotation {
    int64_t id = 0;
    int64_t image_id = 0;
    std::string text;
};

struct AnnotationIndex {
    std::map<int64_t, ImageMeta> images;
    std::map<int64_t, CategoryMeta> categories;
    // Annotations per image, sorted by annotation id.
    std::map<int64_t, std::vector<InstanceAnnotation>> by_image;
};

// Parses a COCO instances document. Throws SchemaViolation on missing or
// ill-typed fields and duplicate ids, DanglingReference when an annotation
// points at an unknown image or category.
AnnotationIndex parse_instances(const Json& doc);

// Parses a COCO captions document into per-image caption lists sorted by
// caption annotation id.
std::map<int64_t, std::vector<CaptionAnnotation>> parse_captions(const Json& doc);

// Shoelace area, absolute value summed over rings. Rings need at least
// three points and an even coordinate count, else DegeneratePolygon.
double polygon_area(const PolygonSeg& poly);

double seg_area(const Segmentation& seg);

enum class AreaMode { Stored, Recomputed };

// Stored reads the annotation's area field; Recomputed derives it from the
// segmentation geometry (MissingSegmentation when there is none).
double annotation_area(const InstanceAnnotation& ann, AreaMode mode);

struct AreaCheck {
    double stored = 0.0;
    double recomputed = 0.0;
    double rel_err = 0.0;
    bool flagged = false;
};

// Relative disagreement between stored and recomputed area, flagged above
// the given tolerance.
AreaCheck area_crosscheck(const InstanceAnnotation& ann, double tolerance = 0.02);

}  // namespace msi
