#include "msi/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>

#include "msi/errors.hpp"
#include "msi/log.hpp"
#include "msi/parallel.hpp"

namespace msi {

namespace fs = std::filesystem;

std::string layout_file_name(int64_t image_id) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "layouts/%012" PRId64 ".png", image_id);
    return buf;
}

namespace {

std::string hex16(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

}  // namespace

SampledPlacements sample_placements(const SceneRecord& scene, const ReferencePool& pool,
                                    const AssembleConfig& config) {
    SampledPlacements out;
    std::vector<int> ranks = depth_rank(scene.subjects);
    std::map<int64_t, std::set<std::string>> used;
    for (size_t k = 0; k < scene.subjects.size(); ++k) {
        const SalientSubject& s = scene.subjects[k];
        uint64_t stream = derive_stream(config.seed, static_cast<uint64_t>(scene.image_id),
                                        static_cast<uint64_t>(s.annotation_id));
        Rng rng(stream);
        const ReferenceEntry* entry = nullptr;
        if (!config.unique_refs) {
            entry = &sample_reference(pool, s.category_id, rng);
        } else {
            std::set<std::string>& taken = used[s.category_id];
            for (int attempt = 0; attempt < 1000 && !entry; ++attempt) {
                const ReferenceEntry& e = sample_reference(pool, s.category_id, rng);
                if (!taken.count(e.ref_id)) entry = &e;
            }
            if (!entry) {
                // Rejection stalled: take the first unused in manifest order.
                for (const ReferenceEntry& e : pool.pools.at(s.category_id)) {
                    if (!taken.count(e.ref_id)) {
                        entry = &e;
                        break;
                    }
                }
            }
            // More same-category subjects than entries: reuse is unavoidable.
            if (!entry) entry = &sample_reference(pool, s.category_id, rng);
            taken.insert(entry->ref_id);
        }
        Placement p;
        p.ref = *entry;
        p.bbox = s.bbox;
        p.order = ranks[k];
        p.mask_area = s.area;
        p.annotation_id = s.annotation_id;
        out.placements.push_back(std::move(p));
        out.seed_trace.push_back(hex16(stream));
    }
    return out;
}

MsiTuple assemble_tuple(const SceneRecord& scene, const ReferencePool& pool,
                        const std::map<int64_t, std::vector<CaptionAnnotation>>& captions,
                        const AssembleConfig& config, const PixelSource& source,
                        const std::filesystem::path& out_root) {
    if (scene.subjects.empty())
        throw InternalError("scene " + std::to_string(scene.image_id) + " has no subjects");
    auto caps_it = captions.find(scene.image_id);
    if (caps_it == captions.end() || caps_it->second.empty())
        throw MissingCaption("image " + std::to_string(scene.image_id) + " has no caption");

    SampledPlacements sampled = sample_placements(scene, pool, config);
    LayoutMap layout = compose_layout(scene.width, scene.height, sampled.placements, source);

    std::string rel = layout_file_name(scene.image_id);
    fs::create_directories((out_root / rel).parent_path());
    write_png(out_root / rel, layout.raster);

    const std::vector<CaptionAnnotation>& caps = caps_it->second;
    size_t cap_idx = 0;
    std::vector<std::string> trace = sampled.seed_trace;
    if (config.caption_strategy == CaptionStrategy::Random) {
        uint64_t stream = derive_stream(config.seed, static_cast<uint64_t>(scene.image_id),
                                        kCaptionStreamTag);
        Rng rng(stream);
        cap_idx = rng.bounded(caps.size());
        trace.push_back(hex16(stream));
    }

    MsiTuple tuple;
    tuple.image_id = scene.image_id;
    tuple.scene_image = scene.file_name;
    tuple.width = scene.width;
    tuple.height = scene.height;
    tuple.caption = caps[cap_idx].text;
    tuple.layout_map = rel;
    tuple.seed_trace = std::move(trace);
    for (size_t k = 0; k < scene.subjects.size(); ++k) {
        const SalientSubject& s = scene.subjects[k];
        const Placement& p = sampled.placements[k];
        TupleSubject subject;
        subject.annotation_id = s.annotation_id;
        subject.category_id = s.category_id;
        subject.ref_id = p.ref.ref_id;
        subject.ref_path = p.ref.image_path;
        subject.bbox = clamp_box(round_box(s.bbox), scene.width, scene.height);
        subject.order = p.order;
        tuple.subjects.push_back(std::move(subject));
    }
    std::sort(tuple.subjects.begin(), tuple.subjects.end(),
              [](const TupleSubject& l, const TupleSubject& r) { return l.order < r.order; });
    return tuple;
}

Json tuple_to_json(const MsiTuple& tuple) {
    Json j = Json::object();
    j["image_id"] = tuple.image_id;
    j["scene_image"] = tuple.scene_image;
    j["width"] = tuple.width;
    j["height"] = tuple.height;
    j["caption"] = tuple.caption;
    j["layout_map"] = tuple.layout_map;
    j["split"] = tuple.split;
    Json subjects = Json::array();
    for (const TupleSubject& s : tuple.subjects) {
        Json sj = Json::object();
        sj["annotation_id"] = s.annotation_id;
        sj["category_id"] = s.category_id;
        sj["ref_id"] = s.ref_id;
        sj["ref_path"] = s.ref_path;
        sj["bbox"] = Json::array({s.bbox.x, s.bbox.y, s.bbox.w, s.bbox.h});
        sj["order"] = s.order;
        subjects.push_back(std::move(sj));
    }
    j["subjects"] = std::move(subjects);
    j["seed_trace"] = tuple.seed_trace;
    return j;
}

MsiTuple tuple_from_json(const Json& j) {
    const std::string ctx = "manifest record";
    MsiTuple tuple;
    tuple.image_id = require_field(j, "image_id", ctx).get<int64_t>();
    tuple.scene_image = require_field(j, "scene_image", ctx).get<std::string>();
    tuple.width = require_field(j, "width", ctx).get<int>();
    tuple.height = require_field(j, "height", ctx).get<int>();
    tuple.caption = require_field(j, "caption", ctx).get<std::string>();
    tuple.layout_map = require_field(j, "layout_map", ctx).get<std::string>();
    tuple.split = require_field(j, "split", ctx).get<std::string>();
    const Json& subjects = require_field(j, "subjects", ctx);
    if (!subjects.is_array()) throw SchemaViolation("subjects in " + ctx + " is not a list");
    for (const Json& sj : subjects) {
        TupleSubject s;
        s.annotation_id = require_field(sj, "annotation_id", ctx).get<int64_t>();
        s.category_id = require_field(sj, "category_id", ctx).get<int64_t>();
        s.ref_id = require_field(sj, "ref_id", ctx).get<std::string>();
        s.ref_path = require_field(sj, "ref_path", ctx).get<std::string>();
        const Json& bbox = require_field(sj, "bbox", ctx);
        if (!bbox.is_array() || bbox.size() != 4)
            throw SchemaViolation("bbox in " + ctx + " is not [x, y, w, h]");
        s.bbox = IntBox{bbox[0].get<int>(), bbox[1].get<int>(), bbox[2].get<int>(), bbox[3].get<int>()};
        s.order = require_field(sj, "order", ctx).get<int>();
        tuple.subjects.push_back(std::move(s));
    }
    const Json& trace = require_field(j, "seed_trace", ctx);
    if (!trace.is_array()) throw SchemaViolation("seed_trace in " + ctx + " is not a list");
    for (const Json& t : trace) tuple.seed_trace.push_back(t.get<std::string>());
    return tuple;
}

LayoutMap recompose_layout(const MsiTuple& tuple, const PixelSource& source) {
    std::vector<Placement> placements;
    for (const TupleSubject& s : tuple.subjects) {
        Placement p;
        p.ref.ref_id = s.ref_id;
        p.ref.category_id = s.category_id;
        p.ref.image_path = s.ref_path;
        p.bbox = Bbox{static_cast<double>(s.bbox.x), static_cast<double>(s.bbox.y),
                      static_cast<double>(s.bbox.w), static_cast<double>(s.bbox.h)};
        p.order = s.order;
        p.annotation_id = s.annotation_id;
        placements.push_back(std::move(p));
    }
    return compose_layout(tuple.width, tuple.height, placements, source);
}

BuildResult build_dataset(const BuildOptions& options) {
    for (const auto& [path, label] :
         {std::pair{options.instances, "instances"}, {options.captions, "captions"},
          {options.pool_manifest, "pool manifest"}}) {
        if (!fs::is_regular_file(path))
            throw ConfigInvalid(std::string(label) + " file not found: " + path.string());
    }
    if (!fs::is_directory(options.images_root))
        throw ConfigInvalid("images root is not a directory: " + options.images_root.string());
    validate(options.filter);
    if (options.val_fraction < 0.0 || options.val_fraction >= 1.0)
        throw InvalidRange("val fraction must lie in [0, 1), got " + format_double(options.val_fraction));
    if (options.error_ceiling < 0.0 || options.error_ceiling > 1.0)
        throw InvalidRange("error ceiling must lie in [0, 1], got " + format_double(options.error_ceiling));
    if (options.parallelism < 1)
        throw InvalidRange("parallelism must be at least 1, got " + std::to_string(options.parallelism));

    AnnotationIndex index = parse_instances(parse_json_file(options.instances, "instances"));
    auto captions = parse_captions(parse_json_file(options.captions, "captions"));
    ReferencePool pool = build_pool(options.pool_manifest, options.pool_min_entries);
    std::vector<SceneRecord> scenes = filter_scenes(index, options.filter);
    log_event(LogLevel::Info, "scenes_retained",
              {{"images", index.images.size()}, {"scenes", scenes.size()}});
    if (scenes.empty()) log_event(LogLevel::Warn, "empty_dataset", {{"reason", "no scenes retained"}});

    fs::create_directories(options.out_root / "layouts");
    PixelSource source = make_png_loader(options.images_root);

    std::vector<MsiTuple> tuples(scenes.size());
    std::vector<Json> failures(scenes.size());
    std::vector<char> ok(scenes.size(), 0);
    parallel_for(scenes.size(), options.parallelism, [&](size_t i) {
        const SceneRecord& scene = scenes[i];
        try {
            if (!fs::exists(options.images_root / scene.file_name))
                throw ImageLoadFailure("scene image missing: " + scene.file_name);
            tuples[i] =
                assemble_tuple(scene, pool, captions, options.assemble, source, options.out_root);
            ok[i] = 1;
        } catch (const Error& e) {
            Json err = Json::object();
            err["image_id"] = scene.image_id;
            err["error"] = e.kind();
            err["message"] = e.what();
            failures[i] = std::move(err);
        }
    });

    BuildResult result;
    result.scenes = scenes.size();
    result.pool_digest = pool.manifest_digest;
    for (size_t i = 0; i < scenes.size(); ++i) {
        if (!ok[i]) {
            log_event(LogLevel::Warn, "scene_failed", failures[i]);
            result.errors.push_back(std::move(failures[i]));
            continue;
        }
        MsiTuple tuple = std::move(tuples[i]);
        if (options.val_fraction > 0.0) {
            uint64_t u = derive_stream(options.assemble.seed, static_cast<uint64_t>(tuple.image_id),
                                       kSplitStreamTag);
            double x = static_cast<double>(u >> 11) * 0x1.0p-53;
            tuple.split = x < options.val_fraction ? "val" : "train";
        }
        for (const TupleSubject& s : tuple.subjects) result.categories.insert(s.category_id);
        result.tuples.push_back(std::move(tuple));
    }

    double rate = scenes.empty() ? 0.0
                                 : static_cast<double>(result.errors.size()) /
                                       static_cast<double>(scenes.size());
    if (rate > options.error_ceiling) {
        if (!result.errors.empty())
            write_jsonl(options.out_root / "errors.jsonl", result.errors);
        throw BuildFailed(std::to_string(result.errors.size()) + " of " + std::to_string(scenes.size()) +
                          " scenes failed, above the ceiling of " + format_double(options.error_ceiling));
    }
    return result;
}

void write_manifest(const BuildResult& result, const BuildOptions& options) {
    std::string lines;
    for (const MsiTuple& tuple : result.tuples) {
        lines += tuple_to_json(tuple).dump();
        lines += '\n';
    }
    atomic_write_file(options.out_root / "manifest.jsonl", lines);
    if (!result.errors.empty()) write_jsonl(options.out_root / "errors.jsonl", result.errors);

    Json header = Json::object();
    header["tool"] = "msi-forge";
    header["format_version"] = 1;
    header["command"] = "build";
    header["seed"] = options.assemble.seed;
    Json cfg = Json::object();
    cfg["instances"] = options.instances.string();
    cfg["captions"] = options.captions.string();
    cfg["pool"] = options.pool_manifest.string();
    cfg["images"] = options.images_root.string();
    cfg["out"] = options.out_root.string();
    cfg["alpha"] = options.filter.alpha;
    cfg["beta"] = options.filter.beta;
    cfg["area-mode"] = options.filter.area_mode == AreaMode::Stored ? "stored" : "recomputed";
    cfg["caption-strategy"] =
        options.assemble.caption_strategy == CaptionStrategy::First ? "first" : "random";
    cfg["unique-refs"] = options.assemble.unique_refs;
    cfg["val-fraction"] = options.val_fraction;
    cfg["error-ceiling"] = options.error_ceiling;
    cfg["pool-min-entries"] = options.pool_min_entries;
    header["config"] = std::move(cfg);
    header["pool_digest"] = result.pool_digest;
    Json counts = Json::object();
    counts["scenes"] = result.scenes;
    counts["tuples"] = result.tuples.size();
    counts["categories"] = result.categories.size();
    counts["failed"] = result.errors.size();
    header["counts"] = std::move(counts);
    header["manifest_digest"] = sha256_hex(lines);
    atomic_write_file(options.out_root / "manifest.header.json", header.dump(2) + "\n");
}

}  // namespace msi
