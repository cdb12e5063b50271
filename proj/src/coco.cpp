#include "msi/coco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "msi/errors.hpp"

namespace msi {

namespace {

int64_t get_int(const Json& obj, const char* key, const std::string& ctx) {
    const Json& v = require_field(obj, key, ctx);
    if (!v.is_number_integer())
        throw SchemaViolation("field '" + std::string(key) + "' in " + ctx + " is not an integer");
    return v.get<int64_t>();
}

double get_number(const Json& obj, const char* key, const std::string& ctx) {
    const Json& v = require_field(obj, key, ctx);
    if (!v.is_number()) throw SchemaViolation("field '" + std::string(key) + "' in " + ctx + " is not a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaViolation("field '" + std::string(key) + "' in " + ctx + " is not finite");
    return d;
}

std::string get_string(const Json& obj, const char* key, const std::string& ctx) {
    const Json& v = require_field(obj, key, ctx);
    if (!v.is_string()) throw SchemaViolation("field '" + std::string(key) + "' in " + ctx + " is not a string");
    return v.get<std::string>();
}

RleSeg parse_rle(const Json& seg, const std::string& ctx) {
    const Json& size = require_field(seg, "size", ctx);
    if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer())
        throw SchemaViolation("segmentation size in " + ctx + " is not [height, width]");
    RleSeg out;
    out.height = size[0].get<int>();
    out.width = size[1].get<int>();
    if (out.height <= 0 || out.width <= 0)
        throw SchemaViolation("segmentation size in " + ctx + " has non-positive dimensions");
    const Json& counts = require_field(seg, "counts", ctx);
    if (counts.is_array()) {
        for (const Json& c : counts) {
            if (!c.is_number_integer() || c.get<int64_t>() < 0)
                throw SchemaViolation("run length in " + ctx + " is not a non-negative integer");
            out.counts.push_back(c.get<uint64_t>());
        }
    } else if (counts.is_string()) {
        out.counts = rle_string_to_counts(counts.get<std::string>());
    } else {
        throw SchemaViolation("segmentation counts in " + ctx + " is neither a list nor a string");
    }
    uint64_t sum = std::accumulate(out.counts.begin(), out.counts.end(), uint64_t{0});
    uint64_t total = static_cast<uint64_t>(out.height) * out.width;
    if (sum != total)
        throw RunLengthMismatch("run lengths in " + ctx + " sum to " + std::to_string(sum) + ", raster has " +
                                std::to_string(total) + " pixels");
    return out;
}

Segmentation parse_segmentation(const Json& ann, const std::string& ctx) {
    auto it = ann.find("segmentation");
    if (it == ann.end() || it->is_null()) return std::monostate{};
    const Json& seg = *it;
    if (seg.is_array()) {
        if (seg.empty()) return std::monostate{};
        PolygonSeg poly;
        for (const Json& ring : seg) {
            if (!ring.is_array()) throw SchemaViolation("polygon ring in " + ctx + " is not a list");
            std::vector<double> coords;
            coords.reserve(ring.size());
            for (const Json& c : ring) {
                if (!c.is_number()) throw SchemaViolation("polygon coordinate in " + ctx + " is not a number");
                coords.push_back(c.get<double>());
            }
            poly.rings.push_back(std::move(coords));
        }
        return poly;
    }
    if (seg.is_object()) return parse_rle(seg, ctx);
    throw SchemaViolation("segmentation in " + ctx + " has an unrecognized shape");
}

bool get_iscrowd(const Json& ann, const std::string& ctx) {
    auto it = ann.find("iscrowd");
    if (it == ann.end()) return false;
    if (it->is_boolean()) return it->get<bool>();
    if (it->is_number_integer()) {
        int64_t v = it->get<int64_t>();
        if (v == 0 || v == 1) return v == 1;
    }
    throw SchemaViolation("iscrowd in " + ctx + " is not 0 or 1");
}

const Json& require_array(const Json& doc, const char* key, const std::string& ctx) {
    const Json& v = require_field(doc, key, ctx);
    if (!v.is_array()) throw SchemaViolation("field '" + std::string(key) + "' in " + ctx + " is not a list");
    return v;
}

}  // namespace

AnnotationIndex parse_instances(const Json& doc) {
    if (!doc.is_object()) throw SchemaViolation("instances document is not an object");
    AnnotationIndex index;

    for (const Json& img : require_array(doc, "images", "instances document")) {
        std::string ctx = "image entry";
        int64_t id = get_int(img, "id", ctx);
        ctx = "image " + std::to_string(id);
        ImageMeta meta;
        meta.id = id;
        meta.width = static_cast<int>(get_int(img, "width", ctx));
        meta.height = static_cast<int>(get_int(img, "height", ctx));
        if (meta.width <= 0 || meta.height <= 0)
            throw SchemaViolation(ctx + " has non-positive dimensions");
        meta.file_name = get_string(img, "file_name", ctx);
        if (!index.images.emplace(id, std::move(meta)).second)
            throw SchemaViolation("duplicate image id " + std::to_string(id));
    }

    for (const Json& cat : require_array(doc, "categories", "instances document")) {
        std::string ctx = "category entry";
        int64_t id = get_int(cat, "id", ctx);
        ctx = "category " + std::to_string(id);
        CategoryMeta meta;
        meta.id = id;
        meta.name = get_string(cat, "name", ctx);
        if (!index.categories.emplace(id, std::move(meta)).second)
            throw SchemaViolation("duplicate category id " + std::to_string(id));
    }

    std::set<int64_t> seen_anns;
    for (const Json& ann : require_array(doc, "annotations", "instances document")) {
        std::string ctx = "annotation entry";
        int64_t id = get_int(ann, "id", ctx);
        ctx = "annotation " + std::to_string(id);
        if (!seen_anns.insert(id).second) throw SchemaViolation("duplicate annotation id " + std::to_string(id));

        InstanceAnnotation a;
        a.id = id;
        a.image_id = get_int(ann, "image_id", ctx);
        a.category_id = get_int(ann, "category_id", ctx);
        if (!index.images.count(a.image_id))
            throw DanglingReference(ctx + " references unknown image " + std::to_string(a.image_id));
        if (!index.categories.count(a.category_id))
            throw DanglingReference(ctx + " references unknown category " + std::to_string(a.category_id));

        const Json& bbox = require_field(ann, "bbox", ctx);
        if (!bbox.is_array() || bbox.size() != 4)
            throw SchemaViolation("bbox in " + ctx + " is not [x, y, w, h]");
        double b[4];
        for (size_t i = 0; i < 4; ++i) {
            if (!bbox[i].is_number()) throw SchemaViolation("bbox coordinate in " + ctx + " is not a number");
            b[i] = bbox[i].get<double>();
            if (!std::isfinite(b[i])) throw SchemaViolation("bbox coordinate in " + ctx + " is not finite");
        }
        if (b[2] < 0 || b[3] < 0) throw SchemaViolation("bbox in " + ctx + " has negative extent");
        a.bbox = Bbox{b[0], b[1], b[2], b[3]};

        a.stored_area = get_number(ann, "area", ctx);
        if (a.stored_area < 0) throw SchemaViolation("area in " + ctx + " is negative");
        a.iscrowd = get_iscrowd(ann, ctx);
        a.seg = parse_segmentation(ann, ctx);
        index.by_image[a.image_id].push_back(std::move(a));
    }

    for (auto& [image_id, anns] : index.by_image)
        std::sort(anns.begin(), anns.end(),
                  [](const InstanceAnnotation& l, const InstanceAnnotation& r) { return l.id < r.id; });
    return index;
}

std::map<int64_t, std::vector<CaptionAnnotation>> parse_captions(const Json& doc) {
    if (!doc.is_object()) throw SchemaViolation("captions document is not an object");
    std::map<int64_t, std::vector<CaptionAnnotation>> by_image;
    std::set<int64_t> seen;
    for (const Json& ann : require_array(doc, "annotations", "captions document")) {
        std::string ctx = "caption entry";
        int64_t id = get_int(ann, "id", ctx);
        ctx = "caption " + std::to_string(id);
        if (!seen.insert(id).second) throw SchemaViolation("duplicate caption id " + std::to_string(id));
        CaptionAnnotation c;
        c.id = id;
        c.image_id = get_int(ann, "image_id", ctx);
        c.text = get_string(ann, "caption", ctx);
        by_image[c.image_id].push_back(std::move(c));
    }
    for (auto& [image_id, caps] : by_image)
        std::sort(caps.begin(), caps.end(),
                  [](const CaptionAnnotation& l, const CaptionAnnotation& r) { return l.id < r.id; });
    return by_image;
}

double polygon_area(const PolygonSeg& poly) {
    double total = 0.0;
    for (const std::vector<double>& ring : poly.rings) {
        if (ring.size() % 2 != 0)
            throw DegeneratePolygon("ring has odd coordinate count " + std::to_string(ring.size()));
        if (ring.size() < 6)
            throw DegeneratePolygon("ring has " + std::to_string(ring.size() / 2) + " points, need at least 3");
        double acc = 0.0;
        size_t n = ring.size() / 2;
        for (size_t i = 0; i < n; ++i) {
            size_t j = (i + 1) % n;
            acc += ring[2 * i] * ring[2 * j + 1] - ring[2 * j] * ring[2 * i + 1];
        }
        total += 0.5 * std::abs(acc);
    }
    return total;
}

double seg_area(const Segmentation& seg) {
    if (std::holds_alternative<PolygonSeg>(seg)) return polygon_area(std::get<PolygonSeg>(seg));
    if (std::holds_alternative<RleSeg>(seg))
        return static_cast<double>(rle_area(std::get<RleSeg>(seg).counts));
    throw MissingSegmentation("annotation has no segmentation to derive an area from");
}

double annotation_area(const InstanceAnnotation& ann, AreaMode mode) {
    if (mode == AreaMode::Stored) return ann.stored_area;
    return seg_area(ann.seg);
}

AreaCheck area_crosscheck(const InstanceAnnotation& ann, double tolerance) {
    AreaCheck check;
    check.stored = ann.stored_area;
    check.recomputed = seg_area(ann.seg);
    if (check.stored > 0.0) {
        check.rel_err = std::abs(check.stored - check.recomputed) / check.stored;
    } else {
        check.rel_err = check.recomputed == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    check.flagged = check.rel_err > tolerance;
    return check;
}

}  // namespace msi
