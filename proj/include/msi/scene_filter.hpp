#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msi/coco.hpp"

namespace msi {

struct FilterConfig {
    int64_t alpha = 2;      // minimum salient subjects per retained scene
    double beta = 0.015;    // saliency area ratio threshold, exclusive
    AreaMode area_mode = AreaMode::Recomputed;
    bool include_crowd = false;
};

// InvalidRange unless alpha >= 1 and 0 < beta < 1.
void validate(const FilterConfig& config);

struct SalientSubject {
    int64_t annotation_id = 0;
    int64_t category_id = 0;
    double area = 0.0;
    double ratio = 0.0;
    Bbox bbox;
};

struct SceneRecord {
    int64_t image_id = 0;
    int width = 0;
    int height = 0;
    std::string file_name;
    // Depth order: descending area, ties by ascending annotation id.
    std::vector<SalientSubject> subjects;
};

struct Saliency {
    double area = 0.0;
    double ratio = 0.0;
    bool salient = false;
};

// ratio = Area(ann) / (width * height); salient iff the ratio exceeds beta
// strictly and the annotation is not an excluded crowd region. In
// Recomputed mode an annotation whose segmentation cannot be interpreted
// falls back to its stored area.
Saliency subject_saliency(const InstanceAnnotation& ann, const ImageMeta& image,
                          const FilterConfig& config);

std::vector<SalientSubject> salient_subjects(const ImageMeta& image,
                                             const std::vector<InstanceAnnotation>& anns,
                                             const FilterConfig& config);

// Keeps images with at least alpha salient subjects, ascending image id.
std::vector<SceneRecord> filter_scenes(const AnnotationIndex& index, const FilterConfig& config);

Json scene_to_json(const SceneRecord& scene);
SceneRecord scene_from_json(const Json& j);

struct AreaDiscrepancy {
    int64_t image_id = 0;
    int64_t annotation_id = 0;
    AreaCheck check;
};

// Annotations whose stored and recomputed areas disagree beyond tolerance.
// Annotations without an interpretable segmentation are skipped.
std::vector<AreaDiscrepancy> collect_discrepancies(const AnnotationIndex& index, double tolerance = 0.02);

}  // namespace msi
