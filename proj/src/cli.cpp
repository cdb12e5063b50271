#include "msi/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "msi/coco.hpp"
#include "msi/dataset.hpp"
#include "msi/diffusion.hpp"
#include "msi/errors.hpp"
#include "msi/io.hpp"
#include "msi/layout.hpp"
#include "msi/log.hpp"
#include "msi/metrics.hpp"
#include "msi/parallel.hpp"
#include "msi/reference_pool.hpp"
#include "msi/scene_filter.hpp"
#include "msi/schedule.hpp"

namespace msi {

namespace fs = std::filesystem;

namespace {

// Config-file fallback for options the command line left untouched.
// Precedence: CLI flag > config key > built-in default.
class ConfigDoc {
public:
    void load(const std::string& path) {
        if (path.empty()) return;
        if (!fs::is_regular_file(path)) throw ConfigInvalid("config file not found: " + path);
        Json doc = Json::parse(read_file(path), nullptr, false);
        if (doc.is_discarded()) throw ConfigInvalid("config file is not valid JSON: " + path);
        if (!doc.is_object()) throw ConfigInvalid("config file must hold a JSON object: " + path);
        doc_ = std::move(doc);
    }

    void merge(const CLI::Option* opt, const char* key, std::string& target) const {
        const Json* v = lookup(opt, key);
        if (!v) return;
        if (!v->is_string()) throw ConfigInvalid("config key '" + std::string(key) + "' must be a string");
        target = v->get<std::string>();
    }
    void merge(const CLI::Option* opt, const char* key, bool& target) const {
        const Json* v = lookup(opt, key);
        if (!v) return;
        if (!v->is_boolean()) throw ConfigInvalid("config key '" + std::string(key) + "' must be a boolean");
        target = v->get<bool>();
    }
    void merge(const CLI::Option* opt, const char* key, double& target) const {
        const Json* v = lookup(opt, key);
        if (!v) return;
        if (!v->is_number()) throw ConfigInvalid("config key '" + std::string(key) + "' must be a number");
        target = v->get<double>();
    }
    template <typename T>
    void merge(const CLI::Option* opt, const char* key, T& target) const {
        static_assert(std::is_integral_v<T>);
        const Json* v = lookup(opt, key);
        if (!v) return;
        if (!v->is_number_integer())
            throw ConfigInvalid("config key '" + std::string(key) + "' must be an integer");
        target = v->get<T>();
    }

private:
    const Json* lookup(const CLI::Option* opt, const char* key) const {
        if (opt && opt->count() > 0) return nullptr;  // CLI wins
        auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }
    Json doc_ = Json::object();
};

AreaMode parse_area_mode(const std::string& s) {
    if (s == "stored") return AreaMode::Stored;
    if (s == "recomputed") return AreaMode::Recomputed;
    throw ConfigInvalid("area mode must be 'stored' or 'recomputed', got '" + s + "'");
}

CaptionStrategy parse_caption_strategy(const std::string& s) {
    if (s == "first") return CaptionStrategy::First;
    if (s == "random") return CaptionStrategy::Random;
    throw ConfigInvalid("caption strategy must be 'first' or 'random', got '" + s + "'");
}

MatchPolicy parse_policy(const std::string& s) {
    if (s == "optimal") return MatchPolicy::Optimal;
    if (s == "greedy") return MatchPolicy::Greedy;
    throw ConfigInvalid("match policy must be 'optimal' or 'greedy', got '" + s + "'");
}

void require_file(const std::string& path, const char* label) {
    if (path.empty()) throw ConfigInvalid(std::string(label) + " path is required");
    if (!fs::is_regular_file(path))
        throw ConfigInvalid(std::string(label) + " file not found: " + path);
}

void require_dir(const std::string& path, const char* label) {
    if (path.empty()) throw ConfigInvalid(std::string(label) + " path is required");
    if (!fs::is_directory(path))
        throw ConfigInvalid(std::string(label) + " is not a directory: " + path);
}

void require_out(const std::string& path, const char* label) {
    if (path.empty()) throw ConfigInvalid(std::string(label) + " path is required");
}

Json base_header(const char* command, uint64_t seed) {
    Json header = Json::object();
    header["tool"] = "msi-forge";
    header["format_version"] = 1;
    header["command"] = command;
    header["seed"] = seed;
    return header;
}

// ---- filter ----

struct FilterArgs {
    std::string config_path;
    std::string instances;
    std::string out;
    int64_t alpha = -1;
    double beta = 0.015;
    std::string area_mode = "recomputed";
    bool include_crowd = false;
    int verbosity = 2;
};

int run_filter(const FilterArgs& args) {
    require_file(args.instances, "instances");
    require_out(args.out, "out");
    if (args.alpha < 0) throw ConfigInvalid("alpha is required (no built-in default)");
    FilterConfig config;
    config.alpha = args.alpha;
    config.beta = args.beta;
    config.area_mode = parse_area_mode(args.area_mode);
    config.include_crowd = args.include_crowd;
    validate(config);

    AnnotationIndex index = parse_instances(parse_json_file(args.instances, "instances"));
    std::vector<SceneRecord> scenes = filter_scenes(index, config);

    fs::create_directories(args.out);
    std::string lines;
    for (const SceneRecord& scene : scenes) {
        lines += scene_to_json(scene).dump();
        lines += '\n';
    }
    atomic_write_file(fs::path(args.out) / "scenes.jsonl", lines);

    Json header = base_header("filter", 0);
    header.erase("seed");  // filtering is deterministic without one
    Json cfg = Json::object();
    cfg["instances"] = args.instances;
    cfg["out"] = args.out;
    cfg["alpha"] = config.alpha;
    cfg["beta"] = config.beta;
    cfg["area-mode"] = args.area_mode;
    cfg["include-crowd"] = config.include_crowd;
    header["config"] = std::move(cfg);
    Json counts = Json::object();
    counts["images"] = index.images.size();
    counts["scenes"] = scenes.size();
    header["counts"] = counts;
    header["scenes_digest"] = sha256_hex(lines);

    size_t discrepancies = 0;
    if (config.area_mode == AreaMode::Recomputed) {
        std::vector<Json> rows;
        for (const AreaDiscrepancy& d : collect_discrepancies(index)) {
            Json row = Json::object();
            row["image_id"] = d.image_id;
            row["annotation_id"] = d.annotation_id;
            row["stored"] = d.check.stored;
            row["recomputed"] = d.check.recomputed;
            row["rel_err"] = d.check.rel_err;
            rows.push_back(std::move(row));
        }
        discrepancies = rows.size();
        write_jsonl(fs::path(args.out) / "scenes.discrepancies.jsonl", rows);
        header["counts"]["area_discrepancies"] = discrepancies;
    }
    atomic_write_file(fs::path(args.out) / "scenes.header.json", header.dump(2) + "\n");

    Json summary = Json::object();
    summary["images"] = index.images.size();
    summary["scenes"] = scenes.size();
    if (config.area_mode == AreaMode::Recomputed) summary["area_discrepancies"] = discrepancies;
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- pool validate ----

struct PoolArgs {
    std::string config_path;
    std::string manifest;
    int min_entries = 30;
    int verbosity = 2;
};

int run_pool_validate(const PoolArgs& args) {
    require_file(args.manifest, "manifest");
    ReferencePool pool = build_pool(args.manifest, args.min_entries);
    Json summary = Json::object();
    summary["digest"] = pool.manifest_digest;
    summary["categories"] = pool.pools.size();
    summary["entries"] = pool.total_entries();
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- compose ----

struct ComposeArgs {
    std::string config_path;
    std::string scenes;
    std::string pool;
    std::string images;
    std::string out;
    uint64_t seed = 0;
    bool annotate = false;
    bool unique_refs = false;
    int parallelism = 1;
    int verbosity = 2;
};

int run_compose(const ComposeArgs& args) {
    require_file(args.scenes, "scenes");
    require_file(args.pool, "pool");
    require_dir(args.images, "images");
    require_out(args.out, "out");
    if (args.parallelism < 1) throw InvalidRange("parallelism must be at least 1");

    ReferencePool pool = build_pool(args.pool);
    std::vector<SceneRecord> scenes;
    for (const Json& j : read_jsonl(args.scenes)) scenes.push_back(scene_from_json(j));

    fs::create_directories(fs::path(args.out) / "layouts");
    PixelSource source = make_png_loader(args.images);
    AssembleConfig assemble;
    assemble.seed = args.seed;
    assemble.unique_refs = args.unique_refs;

    parallel_for(scenes.size(), args.parallelism, [&](size_t i) {
        const SceneRecord& scene = scenes[i];
        SampledPlacements sampled = sample_placements(scene, pool, assemble);
        LayoutMap layout = compose_layout(scene.width, scene.height, sampled.placements, source);
        render_preview(layout, fs::path(args.out) / layout_file_name(scene.image_id), args.annotate);
    });

    Json summary = Json::object();
    summary["scenes"] = scenes.size();
    summary["layouts"] = scenes.size();
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- build ----

struct BuildArgs {
    std::string config_path;
    std::string instances;
    std::string captions;
    std::string pool;
    std::string images;
    std::string out;
    int64_t alpha = -1;
    double beta = 0.015;
    std::string area_mode = "recomputed";
    bool include_crowd = false;
    uint64_t seed = 0;
    std::string caption_strategy = "first";
    bool unique_refs = false;
    double val_fraction = 0.0;
    double error_ceiling = 0.0;
    int pool_min_entries = 30;
    int parallelism = 1;
    int verbosity = 2;
};

int run_build(const BuildArgs& args) {
    require_file(args.instances, "instances");
    require_file(args.captions, "captions");
    require_file(args.pool, "pool");
    require_dir(args.images, "images");
    require_out(args.out, "out");
    if (args.alpha < 0) throw ConfigInvalid("alpha is required (no built-in default)");

    BuildOptions options;
    options.instances = args.instances;
    options.captions = args.captions;
    options.pool_manifest = args.pool;
    options.images_root = args.images;
    options.out_root = args.out;
    options.filter.alpha = args.alpha;
    options.filter.beta = args.beta;
    options.filter.area_mode = parse_area_mode(args.area_mode);
    options.filter.include_crowd = args.include_crowd;
    options.assemble.seed = args.seed;
    options.assemble.caption_strategy = parse_caption_strategy(args.caption_strategy);
    options.assemble.unique_refs = args.unique_refs;
    options.val_fraction = args.val_fraction;
    options.error_ceiling = args.error_ceiling;
    options.pool_min_entries = args.pool_min_entries;
    options.parallelism = args.parallelism;
    validate(options.filter);

    BuildResult result = build_dataset(options);
    write_manifest(result, options);

    Json summary = Json::object();
    summary["scenes"] = result.scenes;
    summary["tuples"] = result.tuples.size();
    summary["categories"] = result.categories.size();
    summary["failed"] = result.errors.size();
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- schedule ----

struct ScheduleArgs {
    std::string config_path;
    int64_t e1 = 7;
    int64_t e2 = 3;
    double eta1 = 1e-4;
    double eta2 = 5e-5;
    int64_t k_min = 2;
    int64_t k_max = 5;
    double gamma = 1.0;
    int64_t epochs = -1;  // defaults to e1 + e2
    std::string out;
    int verbosity = 2;
};

int run_schedule(const ScheduleArgs& args) {
    DstConfig dst{args.eta1, args.eta2, args.e1, args.e2};
    ClsqConfig clsq{args.k_min, args.k_max, args.epochs < 0 ? args.e1 + args.e2 : args.epochs,
                    args.gamma};
    std::vector<EpochPlan> plans = export_schedule(dst, clsq);
    Json out = Json::array();
    for (const EpochPlan& plan : plans) {
        Json j = Json::object();
        j["epoch"] = plan.epoch;
        j["lr"] = plan.learning_rate;
        j["k"] = plan.k;
        out.push_back(std::move(j));
    }
    std::string text = out.dump(2) + "\n";
    if (args.out.empty())
        std::cout << text;
    else
        atomic_write_file(args.out, text);
    return 0;
}

// ---- noise-schedule ----

struct NoiseArgs {
    std::string config_path;
    int64_t steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    std::string out;
    int verbosity = 2;
};

int run_noise_schedule(const NoiseArgs& args) {
    NoiseSchedule sched = build_noise_schedule(args.steps, args.beta_start, args.beta_end);
    std::string csv = "t,beta,alpha_bar\n";
    for (int64_t t = 1; t <= sched.total_steps(); ++t) {
        csv += std::to_string(t);
        csv += ',';
        csv += format_double(sched.betas[t - 1]);
        csv += ',';
        csv += format_double(sched.alpha_bar[t - 1]);
        csv += '\n';
    }
    if (args.out.empty())
        std::cout << csv;
    else
        atomic_write_file(args.out, csv);
    return 0;
}

// ---- targets ----

struct TargetsArgs {
    std::string config_path;
    std::string manifest;
    std::string out;
    int verbosity = 2;
};

int run_targets(const TargetsArgs& args) {
    require_file(args.manifest, "manifest");
    std::string lines;
    for (const Json& j : read_jsonl(args.manifest)) {
        MsiTuple tuple = tuple_from_json(j);
        Json row = Json::object();
        row["sample_id"] = std::to_string(tuple.image_id);
        Json targets = Json::array();
        for (const TupleSubject& s : tuple.subjects) {
            Json t = Json::object();
            t["category_id"] = s.category_id;
            t["bbox"] = Json::array({s.bbox.x, s.bbox.y, s.bbox.w, s.bbox.h});
            targets.push_back(std::move(t));
        }
        row["targets"] = std::move(targets);
        lines += row.dump();
        lines += '\n';
    }
    if (args.out.empty())
        std::cout << lines;
    else
        atomic_write_file(args.out, lines);
    return 0;
}

// ---- score ----

struct ScoreArgs {
    std::string config_path;
    std::string targets;
    std::string detections;
    std::string embeddings_ref;
    std::string embeddings_gen;
    std::string embeddings_metric = "dino_i";
    double conf_min = 0.5;
    std::string policy = "optimal";
    std::string out;
    int verbosity = 2;
};

int run_score(const ScoreArgs& args) {
    bool have_yolo = !args.targets.empty() || !args.detections.empty();
    bool have_embed = !args.embeddings_ref.empty() || !args.embeddings_gen.empty();
    if (!have_yolo && !have_embed)
        throw ConfigInvalid("nothing to score: pass --targets/--detections or --embeddings-ref/--embeddings-gen");
    require_out(args.out, "out");

    ScoreReport report;
    if (have_yolo) {
        require_file(args.targets, "targets");
        require_file(args.detections, "detections");
        report.has_yolo = true;
        report.policy = parse_policy(args.policy);
        report.conf_min = args.conf_min;
        std::vector<TargetLayout> targets = read_targets(args.targets);
        std::vector<DetectionSet> dets = read_detections(args.detections);
        report.yolo_l_summary = yolo_l(targets, dets, report.policy, &report.counts);
        report.yolo_subj_summary = yolo_subj(targets, dets, args.conf_min);
    }
    if (have_embed) {
        require_file(args.embeddings_ref, "embeddings-ref");
        require_file(args.embeddings_gen, "embeddings-gen");
        if (args.embeddings_metric != "dino_i" && args.embeddings_metric != "clip_i" &&
            args.embeddings_metric != "clip_b")
            throw ConfigInvalid("embeddings metric must be dino_i, clip_i, or clip_b, got '" +
                                args.embeddings_metric + "'");
        report.has_embedding = true;
        report.embedding_metric = args.embeddings_metric;
        auto pairs =
            pair_embeddings(read_embeddings(args.embeddings_ref), read_embeddings(args.embeddings_gen));
        report.embedding_summary = similarity_report(pairs);
    }

    Json report_json = report_to_json(report);
    atomic_write_file(args.out, report_json.dump(2) + "\n");

    Json summary = Json::object();
    if (report.has_yolo) {
        summary["yolo_l"] = report.yolo_l_summary.corpus_mean;
        summary["yolo_subj"] = report.yolo_subj_summary.corpus_mean;
    }
    if (report.has_embedding) summary[report.embedding_metric] = report.embedding_summary.corpus_mean;
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- preview ----

struct PreviewArgs {
    std::string config_path;
    std::string manifest;
    std::string images;
    int64_t image_id = -1;
    std::string out;
    bool annotate = false;
    int verbosity = 2;
};

int run_preview(const PreviewArgs& args) {
    require_file(args.manifest, "manifest");
    require_dir(args.images, "images");
    require_out(args.out, "out");
    if (args.image_id < 0) throw ConfigInvalid("image-id is required");

    for (const Json& j : read_jsonl(args.manifest)) {
        MsiTuple tuple = tuple_from_json(j);
        if (tuple.image_id != args.image_id) continue;
        PixelSource source = make_png_loader(args.images);
        LayoutMap layout = recompose_layout(tuple, source);
        render_preview(layout, args.out, args.annotate);
        Json summary = Json::object();
        summary["image_id"] = tuple.image_id;
        summary["out"] = args.out;
        std::cout << summary.dump() << '\n';
        return 0;
    }
    throw DanglingReference("image id " + std::to_string(args.image_id) + " not found in manifest");
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"msi-forge: deterministic multi-subject dataset construction and evaluation"};
    app.require_subcommand(1);

    FilterArgs filter_args;
    PoolArgs pool_args;
    ComposeArgs compose_args;
    BuildArgs build_args;
    ScheduleArgs schedule_args;
    NoiseArgs noise_args;
    TargetsArgs targets_args;
    ScoreArgs score_args;
    PreviewArgs preview_args;

    auto* filter = app.add_subcommand("filter", "Select scenes by saliency and subject count");
    auto* f_cfg = filter->add_option("--config", filter_args.config_path, "JSON config file");
    auto* f_instances = filter->add_option("--instances", filter_args.instances, "COCO instances JSON");
    auto* f_out = filter->add_option("--out", filter_args.out, "output directory");
    auto* f_alpha = filter->add_option("--alpha", filter_args.alpha, "minimum salient subjects");
    auto* f_beta = filter->add_option("--beta", filter_args.beta, "saliency area ratio threshold");
    auto* f_mode = filter->add_option("--area-mode", filter_args.area_mode, "stored|recomputed");
    auto* f_crowd = filter->add_flag("--include-crowd", filter_args.include_crowd,
                                     "treat crowd regions as subjects");
    auto* f_verb = filter->add_option("--verbosity", filter_args.verbosity, "log level 0..3");

    auto* pool = app.add_subcommand("pool", "Reference pool utilities");
    pool->require_subcommand(1);
    auto* pool_validate = pool->add_subcommand("validate", "Check a pool manifest and print its digest");
    auto* p_cfg = pool_validate->add_option("--config", pool_args.config_path, "JSON config file");
    auto* p_manifest = pool_validate->add_option("--manifest", pool_args.manifest, "pool manifest JSON");
    auto* p_min = pool_validate->add_option("--min-entries", pool_args.min_entries,
                                            "per-category warning threshold");
    auto* p_verb = pool_validate->add_option("--verbosity", pool_args.verbosity, "log level 0..3");

    auto* compose = app.add_subcommand("compose", "Composite layout maps for filtered scenes");
    auto* c_cfg = compose->add_option("--config", compose_args.config_path, "JSON config file");
    auto* c_scenes = compose->add_option("--scenes", compose_args.scenes, "scenes.jsonl from filter");
    auto* c_pool = compose->add_option("--pool", compose_args.pool, "pool manifest JSON");
    auto* c_images = compose->add_option("--images", compose_args.images, "images root directory");
    auto* c_out = compose->add_option("--out", compose_args.out, "output directory");
    auto* c_seed = compose->add_option("--seed", compose_args.seed, "global RNG seed");
    auto* c_annot = compose->add_flag("--annotate", compose_args.annotate,
                                      "burn bbox outlines and order labels into rasters");
    auto* c_uniq = compose->add_flag("--unique-refs", compose_args.unique_refs,
                                     "avoid reusing a reference within a scene");
    auto* c_par = compose->add_option("--parallelism", compose_args.parallelism, "worker threads");
    auto* c_verb = compose->add_option("--verbosity", compose_args.verbosity, "log level 0..3");

    auto* build = app.add_subcommand("build", "Build the full dataset with manifest");
    auto* b_cfg = build->add_option("--config", build_args.config_path, "JSON config file");
    auto* b_instances = build->add_option("--instances", build_args.instances, "COCO instances JSON");
    auto* b_captions = build->add_option("--captions", build_args.captions, "COCO captions JSON");
    auto* b_pool = build->add_option("--pool", build_args.pool, "pool manifest JSON");
    auto* b_images = build->add_option("--images", build_args.images, "images root directory");
    auto* b_out = build->add_option("--out", build_args.out, "output directory");
    auto* b_alpha = build->add_option("--alpha", build_args.alpha, "minimum salient subjects");
    auto* b_beta = build->add_option("--beta", build_args.beta, "saliency area ratio threshold");
    auto* b_mode = build->add_option("--area-mode", build_args.area_mode, "stored|recomputed");
    auto* b_crowd = build->add_flag("--include-crowd", build_args.include_crowd,
                                    "treat crowd regions as subjects");
    auto* b_seed = build->add_option("--seed", build_args.seed, "global RNG seed");
    auto* b_capstrat = build->add_option("--caption-strategy", build_args.caption_strategy,
                                         "first|random");
    auto* b_uniq = build->add_flag("--unique-refs", build_args.unique_refs,
                                   "avoid reusing a reference within a scene");
    auto* b_val = build->add_option("--val-fraction", build_args.val_fraction,
                                    "deterministic validation split fraction");
    auto* b_ceiling = build->add_option("--error-ceiling", build_args.error_ceiling,
                                        "tolerated fraction of failed scenes");
    auto* b_poolmin = build->add_option("--pool-min-entries", build_args.pool_min_entries,
                                        "per-category warning threshold");
    auto* b_par = build->add_option("--parallelism", build_args.parallelism, "worker threads");
    auto* b_verb = build->add_option("--verbosity", build_args.verbosity, "log level 0..3");

    auto* schedule = app.add_subcommand("schedule", "Export the training schedule");
    auto* s_cfg = schedule->add_option("--config", schedule_args.config_path, "JSON config file");
    auto* s_e1 = schedule->add_option("--e1", schedule_args.e1, "stage-1 epochs");
    auto* s_e2 = schedule->add_option("--e2", schedule_args.e2, "stage-2 epochs");
    auto* s_eta1 = schedule->add_option("--eta1", schedule_args.eta1, "stage-1 learning rate");
    auto* s_eta2 = schedule->add_option("--eta2", schedule_args.eta2, "stage-2 learning rate");
    auto* s_kmin = schedule->add_option("--kmin", schedule_args.k_min, "curriculum lower bound");
    auto* s_kmax = schedule->add_option("--kmax", schedule_args.k_max, "curriculum upper bound");
    auto* s_gamma = schedule->add_option("--gamma", schedule_args.gamma, "curriculum pace");
    auto* s_epochs = schedule->add_option("--epochs", schedule_args.epochs,
                                          "curriculum span (defaults to e1+e2)");
    auto* s_out = schedule->add_option("--out", schedule_args.out, "output path (stdout when absent)");
    auto* s_verb = schedule->add_option("--verbosity", schedule_args.verbosity, "log level 0..3");

    auto* noise = app.add_subcommand("noise-schedule", "Dump the forward-diffusion schedule as CSV");
    auto* n_cfg = noise->add_option("--config", noise_args.config_path, "JSON config file");
    auto* n_steps = noise->add_option("--T,--steps", noise_args.steps, "total timesteps");
    auto* n_bs = noise->add_option("--beta-start", noise_args.beta_start, "initial beta");
    auto* n_be = noise->add_option("--beta-end", noise_args.beta_end, "final beta");
    auto* n_out = noise->add_option("--out", noise_args.out, "output path (stdout when absent)");
    auto* n_verb = noise->add_option("--verbosity", noise_args.verbosity, "log level 0..3");

    auto* targets = app.add_subcommand("targets", "Emit a target layout file from a manifest");
    auto* t_cfg = targets->add_option("--config", targets_args.config_path, "JSON config file");
    auto* t_manifest = targets->add_option("--manifest", targets_args.manifest, "manifest.jsonl path");
    auto* t_out = targets->add_option("--out", targets_args.out, "output path (stdout when absent)");
    auto* t_verb = targets->add_option("--verbosity", targets_args.verbosity, "log level 0..3");

    auto* score = app.add_subcommand("score", "Score detections and embeddings against targets");
    auto* sc_cfg = score->add_option("--config", score_args.config_path, "JSON config file");
    auto* sc_targets = score->add_option("--targets", score_args.targets, "targets JSONL");
    auto* sc_dets = score->add_option("--detections", score_args.detections, "detections JSONL");
    auto* sc_eref = score->add_option("--embeddings-ref", score_args.embeddings_ref,
                                      "reference embeddings JSONL");
    auto* sc_egen = score->add_option("--embeddings-gen", score_args.embeddings_gen,
                                      "generated embeddings JSONL");
    auto* sc_emetric = score->add_option("--embeddings-metric", score_args.embeddings_metric,
                                         "dino_i|clip_i|clip_b");
    auto* sc_conf = score->add_option("--conf-min", score_args.conf_min,
                                      "detection confidence threshold");
    auto* sc_policy = score->add_option("--policy", score_args.policy, "optimal|greedy");
    auto* sc_out = score->add_option("--out", score_args.out, "report JSON path");
    auto* sc_verb = score->add_option("--verbosity", score_args.verbosity, "log level 0..3");

    auto* preview = app.add_subcommand("preview", "Re-render one tuple's layout map");
    auto* v_cfg = preview->add_option("--config", preview_args.config_path, "JSON config file");
    auto* v_manifest = preview->add_option("--manifest", preview_args.manifest, "manifest.jsonl path");
    auto* v_images = preview->add_option("--images", preview_args.images, "images root directory");
    auto* v_id = preview->add_option("--image-id", preview_args.image_id, "tuple image id");
    auto* v_out = preview->add_option("--out", preview_args.out, "output PNG path");
    auto* v_annot = preview->add_flag("--annotate", preview_args.annotate,
                                      "burn bbox outlines and order labels into the raster");
    auto* v_verb = preview->add_option("--verbosity", preview_args.verbosity, "log level 0..3");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::Config);
    }

    try {
        if (filter->parsed()) {
            ConfigDoc doc;
            doc.load(filter_args.config_path);
            doc.merge(f_instances, "instances", filter_args.instances);
            doc.merge(f_out, "out", filter_args.out);
            doc.merge(f_alpha, "alpha", filter_args.alpha);
            doc.merge(f_beta, "beta", filter_args.beta);
            doc.merge(f_mode, "area-mode", filter_args.area_mode);
            doc.merge(f_crowd, "include-crowd", filter_args.include_crowd);
            doc.merge(f_verb, "verbosity", filter_args.verbosity);
            set_log_level(static_cast<LogLevel>(filter_args.verbosity));
            (void)f_cfg;
            return run_filter(filter_args);
        }
        if (pool_validate->parsed()) {
            ConfigDoc doc;
            doc.load(pool_args.config_path);
            doc.merge(p_manifest, "manifest", pool_args.manifest);
            doc.merge(p_min, "min-entries", pool_args.min_entries);
            doc.merge(p_verb, "verbosity", pool_args.verbosity);
            set_log_level(static_cast<LogLevel>(pool_args.verbosity));
            (void)p_cfg;
            return run_pool_validate(pool_args);
        }
        if (compose->parsed()) {
            ConfigDoc doc;
            doc.load(compose_args.config_path);
            doc.merge(c_scenes, "scenes", compose_args.scenes);
            doc.merge(c_pool, "pool", compose_args.pool);
            doc.merge(c_images, "images", compose_args.images);
            doc.merge(c_out, "out", compose_args.out);
            doc.merge(c_seed, "seed", compose_args.seed);
            doc.merge(c_annot, "annotate", compose_args.annotate);
            doc.merge(c_uniq, "unique-refs", compose_args.unique_refs);
            doc.merge(c_par, "parallelism", compose_args.parallelism);
            doc.merge(c_verb, "verbosity", compose_args.verbosity);
            set_log_level(static_cast<LogLevel>(compose_args.verbosity));
            (void)c_cfg;
            return run_compose(compose_args);
        }
        if (build->parsed()) {
            ConfigDoc doc;
            doc.load(build_args.config_path);
            doc.merge(b_instances, "instances", build_args.instances);
            doc.merge(b_captions, "captions", build_args.captions);
            doc.merge(b_pool, "pool", build_args.pool);
            doc.merge(b_images, "images", build_args.images);
            doc.merge(b_out, "out", build_args.out);
            doc.merge(b_alpha, "alpha", build_args.alpha);
            doc.merge(b_beta, "beta", build_args.beta);
            doc.merge(b_mode, "area-mode", build_args.area_mode);
            doc.merge(b_crowd, "include-crowd", build_args.include_crowd);
            doc.merge(b_seed, "seed", build_args.seed);
            doc.merge(b_capstrat, "caption-strategy", build_args.caption_strategy);
            doc.merge(b_uniq, "unique-refs", build_args.unique_refs);
            doc.merge(b_val, "val-fraction", build_args.val_fraction);
            doc.merge(b_ceiling, "error-ceiling", build_args.error_ceiling);
            doc.merge(b_poolmin, "pool-min-entries", build_args.pool_min_entries);
            doc.merge(b_par, "parallelism", build_args.parallelism);
            doc.merge(b_verb, "verbosity", build_args.verbosity);
            set_log_level(static_cast<LogLevel>(build_args.verbosity));
            (void)b_cfg;
            return run_build(build_args);
        }
        if (schedule->parsed()) {
            ConfigDoc doc;
            doc.load(schedule_args.config_path);
            doc.merge(s_e1, "e1", schedule_args.e1);
            doc.merge(s_e2, "e2", schedule_args.e2);
            doc.merge(s_eta1, "eta1", schedule_args.eta1);
            doc.merge(s_eta2, "eta2", schedule_args.eta2);
            doc.merge(s_kmin, "kmin", schedule_args.k_min);
            doc.merge(s_kmax, "kmax", schedule_args.k_max);
            doc.merge(s_gamma, "gamma", schedule_args.gamma);
            doc.merge(s_epochs, "epochs", schedule_args.epochs);
            doc.merge(s_out, "out", schedule_args.out);
            doc.merge(s_verb, "verbosity", schedule_args.verbosity);
            set_log_level(static_cast<LogLevel>(schedule_args.verbosity));
            (void)s_cfg;
            return run_schedule(schedule_args);
        }
        if (noise->parsed()) {
            ConfigDoc doc;
            doc.load(noise_args.config_path);
            doc.merge(n_steps, "T", noise_args.steps);
            doc.merge(n_bs, "beta-start", noise_args.beta_start);
            doc.merge(n_be, "beta-end", noise_args.beta_end);
            doc.merge(n_out, "out", noise_args.out);
            doc.merge(n_verb, "verbosity", noise_args.verbosity);
            set_log_level(static_cast<LogLevel>(noise_args.verbosity));
            (void)n_cfg;
            return run_noise_schedule(noise_args);
        }
        if (targets->parsed()) {
            ConfigDoc doc;
            doc.load(targets_args.config_path);
            doc.merge(t_manifest, "manifest", targets_args.manifest);
            doc.merge(t_out, "out", targets_args.out);
            doc.merge(t_verb, "verbosity", targets_args.verbosity);
            set_log_level(static_cast<LogLevel>(targets_args.verbosity));
            (void)t_cfg;
            return run_targets(targets_args);
        }
        if (score->parsed()) {
            ConfigDoc doc;
            doc.load(score_args.config_path);
            doc.merge(sc_targets, "targets", score_args.targets);
            doc.merge(sc_dets, "detections", score_args.detections);
            doc.merge(sc_eref, "embeddings-ref", score_args.embeddings_ref);
            doc.merge(sc_egen, "embeddings-gen", score_args.embeddings_gen);
            doc.merge(sc_emetric, "embeddings-metric", score_args.embeddings_metric);
            doc.merge(sc_conf, "conf-min", score_args.conf_min);
            doc.merge(sc_policy, "policy", score_args.policy);
            doc.merge(sc_out, "out", score_args.out);
            doc.merge(sc_verb, "verbosity", score_args.verbosity);
            set_log_level(static_cast<LogLevel>(score_args.verbosity));
            (void)sc_cfg;
            return run_score(score_args);
        }
        if (preview->parsed()) {
            ConfigDoc doc;
            doc.load(preview_args.config_path);
            doc.merge(v_manifest, "manifest", preview_args.manifest);
            doc.merge(v_images, "images", preview_args.images);
            doc.merge(v_id, "image-id", preview_args.image_id);
            doc.merge(v_out, "out", preview_args.out);
            doc.merge(v_annot, "annotate", preview_args.annotate);
            doc.merge(v_verb, "verbosity", preview_args.verbosity);
            set_log_level(static_cast<LogLevel>(preview_args.verbosity));
            (void)v_cfg;
            return run_preview(preview_args);
        }
        throw InternalError("no subcommand dispatched");
    } catch (const Error& e) {
        log_event(LogLevel::Error, "error", {{"kind", e.kind()}, {"message", e.what()}});
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        log_event(LogLevel::Error, "error", {{"kind", "Unexpected"}, {"message", e.what()}});
        return static_cast<int>(ExitCode::Internal);
    }
}

}  // namespace msi
