#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "msi/coco.hpp"
#include "msi/layout.hpp"
#include "msi/reference_pool.hpp"
#include "msi/scene_filter.hpp"

namespace msi {

enum class CaptionStrategy { First, Random };

struct AssembleConfig {
    uint64_t seed = 0;
    CaptionStrategy caption_strategy = CaptionStrategy::First;
    bool unique_refs = false;  // avoid reusing one reference within a scene
};

struct TupleSubject {
    int64_t annotation_id = 0;
    int64_t category_id = 0;
    std::string ref_id;
    std::string ref_path;
    IntBox bbox;  // rounded to the pixel grid and clamped to the scene
    int order = 0;
};

struct MsiTuple {
    int64_t image_id = 0;
    std::string scene_image;  // relative to the images root
    int width = 0;
    int height = 0;
    std::string caption;
    std::string layout_map;  // relative to the output root
    std::string split = "train";
    std::vector<TupleSubject> subjects;      // ascending compositing order
    std::vector<std::string> seed_trace;     // per-subject stream ids, hex
};

// Derived-stream tags that never collide with annotation ids.
constexpr uint64_t kCaptionStreamTag = 0xFFFFFFFFFFFFFFFFull;
constexpr uint64_t kSplitStreamTag = 0xFFFFFFFFFFFFFFFEull;

// Samples placements for one scene: a reference per salient subject via its
// derived stream, ranked by the occlusion prior.
struct SampledPlacements {
    std::vector<Placement> placements;     // aligned with scene.subjects
    std::vector<std::string> seed_trace;
};
SampledPlacements sample_placements(const SceneRecord& scene, const ReferencePool& pool,
                                    const AssembleConfig& config);

// Full tuple assembly: sample, compose, persist the layout raster under
// out_root/layouts, pick the caption. Throws EmptyCategory, MissingCaption,
// ZeroSizeBox, ImageLoadFailure per the stage that fails.
MsiTuple assemble_tuple(const SceneRecord& scene, const ReferencePool& pool,
                        const std::map<int64_t, std::vector<CaptionAnnotation>>& captions,
                        const AssembleConfig& config, const PixelSource& source,
                        const std::filesystem::path& out_root);

Json tuple_to_json(const MsiTuple& tuple);
MsiTuple tuple_from_json(const Json& j);

// Recomposites the layout recorded in a tuple, for previews.
LayoutMap recompose_layout(const MsiTuple& tuple, const PixelSource& source);

struct BuildOptions {
    std::filesystem::path instances;
    std::filesystem::path captions;
    std::filesystem::path pool_manifest;
    std::filesystem::path images_root;
    std::filesystem::path out_root;
    FilterConfig filter;
    AssembleConfig assemble;
    double val_fraction = 0.0;   // deterministic hash split when positive
    double error_ceiling = 0.0;  // tolerated fraction of failed scenes
    int parallelism = 1;
    int pool_min_entries = 30;
};

struct BuildResult {
    std::vector<MsiTuple> tuples;  // ascending image id
    std::vector<Json> errors;      // per-scene failure records
    size_t scenes = 0;
    std::set<int64_t> categories;
    std::string pool_digest;
};

// Runs the full pipeline: parse, filter, pool, assemble in parallel.
// Throws ConfigInvalid for unresolvable inputs before any output is
// written, BuildFailed when the failure rate exceeds the ceiling.
BuildResult build_dataset(const BuildOptions& options);

// Writes manifest.jsonl, manifest.header.json and, when failures exist,
// errors.jsonl under out_root. All writes are atomic.
void write_manifest(const BuildResult& result, const BuildOptions& options);

// 12-digit zero-padded layout file name for an image id.
std::string layout_file_name(int64_t image_id);

}  // namespace msi
