#include "msi/scene_filter.hpp"

#include <algorithm>

#include "msi/errors.hpp"
#include "msi/log.hpp"

namespace msi {

void validate(const FilterConfig& config) {
    if (config.alpha < 1)
        throw InvalidRange("alpha must be at least 1, got " + std::to_string(config.alpha));
    if (!(config.beta > 0.0) || !(config.beta < 1.0))
        throw InvalidRange("beta must lie in (0, 1), got " + format_double(config.beta));
}

namespace {

double subject_area(const InstanceAnnotation& ann, AreaMode mode) {
    if (mode == AreaMode::Stored) return ann.stored_area;
    try {
        return seg_area(ann.seg);
    } catch (const Error& e) {
        log_event(LogLevel::Warn, "area_fallback",
                  {{"annotation_id", ann.id}, {"reason", e.what()}});
        return ann.stored_area;
    }
}

}  // namespace

Saliency subject_saliency(const InstanceAnnotation& ann, const ImageMeta& image,
                          const FilterConfig& config) {
    Saliency s;
    if (ann.iscrowd && !config.include_crowd) return s;
    s.area = subject_area(ann, config.area_mode);
    s.ratio = s.area / (static_cast<double>(image.width) * image.height);
    s.salient = s.ratio > config.beta;
    return s;
}

std::vector<SalientSubject> salient_subjects(const ImageMeta& image,
                                             const std::vector<InstanceAnnotation>& anns,
                                             const FilterConfig& config) {
    std::vector<SalientSubject> out;
    for (const InstanceAnnotation& ann : anns) {
        Saliency s = subject_saliency(ann, image, config);
        if (!s.salient) continue;
        out.push_back(SalientSubject{ann.id, ann.category_id, s.area, s.ratio, ann.bbox});
    }
    std::sort(out.begin(), out.end(), [](const SalientSubject& l, const SalientSubject& r) {
        if (l.area != r.area) return l.area > r.area;
        return l.annotation_id < r.annotation_id;
    });
    return out;
}

std::vector<SceneRecord> filter_scenes(const AnnotationIndex& index, const FilterConfig& config) {
    validate(config);
    std::vector<SceneRecord> scenes;
    for (const auto& [image_id, image] : index.images) {
        auto it = index.by_image.find(image_id);
        if (it == index.by_image.end()) continue;
        std::vector<SalientSubject> subjects = salient_subjects(image, it->second, config);
        if (static_cast<int64_t>(subjects.size()) < config.alpha) continue;
        SceneRecord scene;
        scene.image_id = image_id;
        scene.width = image.width;
        scene.height = image.height;
        scene.file_name = image.file_name;
        scene.subjects = std::move(subjects);
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

Json scene_to_json(const SceneRecord& scene) {
    Json j = Json::object();
    j["image_id"] = scene.image_id;
    j["width"] = scene.width;
    j["height"] = scene.height;
    j["file_name"] = scene.file_name;
    j["n_salient"] = scene.subjects.size();
    Json subjects = Json::array();
    for (const SalientSubject& s : scene.subjects) {
        Json sj = Json::object();
        sj["annotation_id"] = s.annotation_id;
        sj["category_id"] = s.category_id;
        sj["area"] = s.area;
        sj["ratio"] = s.ratio;
        sj["bbox"] = Json::array({s.bbox.x, s.bbox.y, s.bbox.w, s.bbox.h});
        subjects.push_back(std::move(sj));
    }
    j["subjects"] = std::move(subjects);
    return j;
}

SceneRecord scene_from_json(const Json& j) {
    const std::string ctx = "scene record";
    SceneRecord scene;
    scene.image_id = require_field(j, "image_id", ctx).get<int64_t>();
    scene.width = require_field(j, "width", ctx).get<int>();
    scene.height = require_field(j, "height", ctx).get<int>();
    scene.file_name = require_field(j, "file_name", ctx).get<std::string>();
    const Json& subjects = require_field(j, "subjects", ctx);
    if (!subjects.is_array()) throw SchemaViolation("subjects in " + ctx + " is not a list");
    for (const Json& sj : subjects) {
        SalientSubject s;
        s.annotation_id = require_field(sj, "annotation_id", ctx).get<int64_t>();
        s.category_id = require_field(sj, "category_id", ctx).get<int64_t>();
        s.area = require_field(sj, "area", ctx).get<double>();
        s.ratio = require_field(sj, "ratio", ctx).get<double>();
        const Json& bbox = require_field(sj, "bbox", ctx);
        if (!bbox.is_array() || bbox.size() != 4)
            throw SchemaViolation("bbox in " + ctx + " is not [x, y, w, h]");
        s.bbox = Bbox{bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
                      bbox[3].get<double>()};
        scene.subjects.push_back(std::move(s));
    }
    const Json& n = require_field(j, "n_salient", ctx);
    if (n.get<size_t>() != scene.subjects.size())
        throw SchemaViolation("n_salient in " + ctx + " disagrees with the subject list");
    return scene;
}

std::vector<AreaDiscrepancy> collect_discrepancies(const AnnotationIndex& index, double tolerance) {
    std::vector<AreaDiscrepancy> out;
    for (const auto& [image_id, anns] : index.by_image) {
        for (const InstanceAnnotation& ann : anns) {
            AreaCheck check;
            try {
                check = area_crosscheck(ann, tolerance);
            } catch (const Error&) {
                continue;
            }
            if (check.flagged) out.push_back(AreaDiscrepancy{image_id, ann.id, check});
        }
    }
    return out;
}

}  // namespace msi
