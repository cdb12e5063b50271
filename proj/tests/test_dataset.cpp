#include <filesystem>

#include "doctest.h"
#include "msi/dataset.hpp"
#include "msi/errors.hpp"
#include "testutil.hpp"

using namespace msi;
namespace tu = testutil;
namespace fs = std::filesystem;

namespace {

struct Env {
    tu::TempDir tmp{"dataset"};
    tu::Fixture fx;
    AnnotationIndex index;
    std::map<int64_t, std::vector<CaptionAnnotation>> captions;
    ReferencePool pool;
    std::vector<SceneRecord> scenes;
    PixelSource source;

    Env() {
        fx = tu::make_mini_coco(tmp.path);
        index = parse_instances(parse_json_file(fx.instances, "instances"));
        captions = parse_captions(parse_json_file(fx.captions, "captions"));
        pool = build_pool(fx.pool, 1);
        scenes = filter_scenes(index, FilterConfig{});
        source = make_png_loader(fx.images);
    }

    const SceneRecord& scene(int64_t image_id) const {
        for (const SceneRecord& s : scenes)
            if (s.image_id == image_id) return s;
        throw std::runtime_error("no such scene in fixture");
    }

    BuildOptions options(const fs::path& out) const {
        BuildOptions opt;
        opt.instances = fx.instances;
        opt.captions = fx.captions;
        opt.pool_manifest = fx.pool;
        opt.images_root = fx.images;
        opt.out_root = out;
        opt.assemble.seed = 42;
        opt.pool_min_entries = 1;
        return opt;
    }
};

}  // namespace

TEST_CASE("layout_file_name pads to twelve digits") {
    CHECK(layout_file_name(5) == "layouts/000000000005.png");
    CHECK(layout_file_name(581921) == "layouts/000000581921.png");
}

TEST_CASE("sample_placements derives one stream per subject") {
    Env env;
    AssembleConfig cfg;
    cfg.seed = 42;
    const SceneRecord& s5 = env.scene(5);
    SampledPlacements a = sample_placements(s5, env.pool, cfg);
    SampledPlacements b = sample_placements(s5, env.pool, cfg);
    REQUIRE(a.placements.size() == 3);
    REQUIRE(a.seed_trace.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(a.placements[i].ref.ref_id == b.placements[i].ref.ref_id);
        CHECK(a.seed_trace[i] == b.seed_trace[i]);
        CHECK(a.seed_trace[i].size() == 16);
    }
    // The trace is the derived stream id in hex.
    char expect[17];
    std::snprintf(expect, sizeof expect, "%016llx",
                  static_cast<unsigned long long>(
                      derive_stream(42, 5, static_cast<uint64_t>(s5.subjects[0].annotation_id))));
    CHECK(a.seed_trace[0] == expect);

    // Subjects come depth-ordered from the filter, so ranks are 0,1,2.
    CHECK(a.placements[0].order == 0);
    CHECK(a.placements[1].order == 1);
    CHECK(a.placements[2].order == 2);
    CHECK(a.placements[0].annotation_id == 53);

    // Refs drawn for a subject match its category pool.
    CHECK(a.placements[0].ref.image_path.substr(0, 7) == "refs/c3");
    CHECK(a.placements[1].ref.image_path.substr(0, 7) == "refs/c1");
    CHECK(a.placements[2].ref.image_path.substr(0, 7) == "refs/c2");

    // A different seed redraws.
    AssembleConfig other = cfg;
    other.seed = 43;
    SampledPlacements c = sample_placements(s5, env.pool, other);
    CHECK(c.seed_trace[0] != a.seed_trace[0]);
}

TEST_CASE("a subject's draw does not depend on its neighbours") {
    Env env;
    AssembleConfig cfg;
    cfg.seed = 7;
    const SceneRecord& s5 = env.scene(5);
    SampledPlacements full = sample_placements(s5, env.pool, cfg);

    SceneRecord solo = s5;
    solo.subjects = {s5.subjects[1]};  // annotation 51 alone
    SampledPlacements alone = sample_placements(solo, env.pool, cfg);
    CHECK(alone.placements[0].ref.ref_id == full.placements[1].ref.ref_id);
    CHECK(alone.seed_trace[0] == full.seed_trace[1]);
}

TEST_CASE("unique_refs avoids reuse while the pool allows it") {
    Env env;
    SceneRecord scene;
    scene.image_id = 900;
    scene.width = 64;
    scene.height = 64;
    scene.subjects.clear();
    for (int i = 0; i < 3; ++i) {
        SalientSubject s;
        s.annotation_id = 9000 + i;
        s.category_id = 1;  // pool has exactly 3 entries
        s.area = 300 - i;
        s.bbox = Bbox{static_cast<double>(4 * i), 2.0, 8.0, 8.0};
        scene.subjects.push_back(s);
    }
    AssembleConfig cfg;
    cfg.seed = 11;
    cfg.unique_refs = true;
    SampledPlacements out = sample_placements(scene, env.pool, cfg);
    std::set<std::string> refs;
    for (const Placement& p : out.placements) refs.insert(p.ref.ref_id);
    CHECK(refs.size() == 3);

    // Category 4 has one entry: two subjects must share it without hanging.
    SceneRecord cramped = scene;
    for (auto& s : cramped.subjects) s.category_id = 4;
    cramped.subjects.resize(2);
    SampledPlacements reuse = sample_placements(cramped, env.pool, cfg);
    CHECK(reuse.placements[0].ref.ref_id == "c4_0");
    CHECK(reuse.placements[1].ref.ref_id == "c4_0");

    // Without the flag duplicates are fair game (no constraint tracked).
    cfg.unique_refs = false;
    CHECK(sample_placements(scene, env.pool, cfg).placements.size() == 3);
}

TEST_CASE("assemble_tuple produces an ordered, persisted tuple") {
    Env env;
    tu::TempDir out("tuple_out");
    AssembleConfig cfg;
    cfg.seed = 42;
    MsiTuple t = assemble_tuple(env.scene(5), env.pool, env.captions, cfg, env.source, out.path);

    CHECK(t.image_id == 5);
    CHECK(t.scene_image == "000000000005.png");
    CHECK(t.width == 640);
    CHECK(t.height == 480);
    CHECK(t.caption == "A person, a dog and a cat indoors");  // lowest caption id
    CHECK(t.layout_map == "layouts/000000000005.png");
    CHECK(t.split == "train");
    REQUIRE(t.subjects.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(t.subjects[i].order == i);
    CHECK(t.subjects[0].annotation_id == 53);
    CHECK(t.subjects[1].annotation_id == 51);
    CHECK(t.subjects[2].annotation_id == 52);
    CHECK(t.subjects[0].bbox.x == 400);
    CHECK(t.subjects[0].bbox.w == 150);
    CHECK(t.seed_trace.size() == 3);
    CHECK(fs::exists(out.path / "layouts/000000000005.png"));

    // The persisted raster equals an in-process recomposition.
    LayoutMap again = recompose_layout(t, env.source);
    Image disk = read_png(out.path / "layouts/000000000005.png");
    CHECK(disk.data == again.raster.data);
}

TEST_CASE("random caption strategy draws from the caption stream") {
    Env env;
    tu::TempDir out("caps_out");
    AssembleConfig cfg;
    cfg.seed = 42;
    cfg.caption_strategy = CaptionStrategy::Random;
    MsiTuple t = assemble_tuple(env.scene(5), env.pool, env.captions, cfg, env.source, out.path);
    bool known = t.caption == "A person, a dog and a cat indoors" ||
                 t.caption == "Three pets arranged across a room";
    CHECK(known);
    CHECK(t.seed_trace.size() == 4);  // three subjects plus the caption stream

    uint64_t stream = derive_stream(42, 5, kCaptionStreamTag);
    Rng rng(stream);
    size_t idx = rng.bounded(2);
    const char* expect =
        idx == 0 ? "A person, a dog and a cat indoors" : "Three pets arranged across a room";
    CHECK(t.caption == expect);

    MsiTuple t2 = assemble_tuple(env.scene(5), env.pool, env.captions, cfg, env.source, out.path);
    CHECK(t2.caption == t.caption);
}

TEST_CASE("assemble_tuple reports missing inputs precisely") {
    Env env;
    tu::TempDir out("err_out");
    AssembleConfig cfg;

    std::map<int64_t, std::vector<CaptionAnnotation>> empty;
    CHECK_THROWS_AS(assemble_tuple(env.scene(5), env.pool, empty, cfg, env.source, out.path),
                    MissingCaption);

    ReferencePool narrow = env.pool;
    narrow.pools.erase(3);  // annotation 53 needs category 3
    CHECK_THROWS_AS(assemble_tuple(env.scene(5), narrow, env.captions, cfg, env.source, out.path),
                    EmptyCategory);
}

TEST_CASE("tuples survive a json round-trip") {
    Env env;
    tu::TempDir out("json_out");
    AssembleConfig cfg;
    cfg.seed = 9;
    MsiTuple t = assemble_tuple(env.scene(7), env.pool, env.captions, cfg, env.source, out.path);
    t.split = "val";
    Json j = tuple_to_json(t);
    MsiTuple back = tuple_from_json(j);
    CHECK(back.image_id == t.image_id);
    CHECK(back.scene_image == t.scene_image);
    CHECK(back.width == t.width);
    CHECK(back.height == t.height);
    CHECK(back.caption == t.caption);
    CHECK(back.layout_map == t.layout_map);
    CHECK(back.split == "val");
    CHECK(back.seed_trace == t.seed_trace);
    REQUIRE(back.subjects.size() == t.subjects.size());
    for (size_t i = 0; i < t.subjects.size(); ++i) {
        CHECK(back.subjects[i].annotation_id == t.subjects[i].annotation_id);
        CHECK(back.subjects[i].category_id == t.subjects[i].category_id);
        CHECK(back.subjects[i].ref_id == t.subjects[i].ref_id);
        CHECK(back.subjects[i].ref_path == t.subjects[i].ref_path);
        CHECK(back.subjects[i].bbox.x == t.subjects[i].bbox.x);
        CHECK(back.subjects[i].bbox.w == t.subjects[i].bbox.w);
        CHECK(back.subjects[i].order == t.subjects[i].order);
    }

    Json broken = j;
    broken.erase("caption");
    CHECK_THROWS_AS(tuple_from_json(broken), SchemaViolation);
}

TEST_CASE("build_dataset assembles the fixture end to end") {
    Env env;
    tu::TempDir out("build_out");
    BuildOptions opt = env.options(out.path / "d1");
    opt.parallelism = 2;
    BuildResult result = build_dataset(opt);
    write_manifest(result, opt);

    CHECK(result.scenes == 3);
    REQUIRE(result.tuples.size() == 3);
    CHECK(result.tuples[0].image_id == 2);
    CHECK(result.tuples[1].image_id == 5);
    CHECK(result.tuples[2].image_id == 7);
    CHECK(result.errors.empty());
    CHECK(result.categories == std::set<int64_t>{1, 2, 3, 4});

    CHECK(fs::exists(opt.out_root / "manifest.jsonl"));
    CHECK(fs::exists(opt.out_root / "manifest.header.json"));
    CHECK_FALSE(fs::exists(opt.out_root / "errors.jsonl"));
    for (int64_t id : {2, 5, 7})
        CHECK(fs::exists(opt.out_root / layout_file_name(id)));

    Json header = parse_json_file(opt.out_root / "manifest.header.json", "header");
    CHECK(header.at("tool") == "msi-forge");
    CHECK(header.at("format_version") == 1);
    CHECK(header.at("seed") == 42);
    CHECK(header.at("counts").at("scenes") == 3);
    CHECK(header.at("counts").at("tuples") == 3);
    CHECK(header.at("counts").at("failed") == 0);
    CHECK(header.at("counts").at("categories") == 4);
    CHECK(header.at("pool_digest") == sha256_hex(read_file(env.fx.pool)));
    CHECK(header.at("manifest_digest") ==
          sha256_hex(read_file(opt.out_root / "manifest.jsonl")));

    // Manifest records parse back into tuples.
    auto lines = read_jsonl(opt.out_root / "manifest.jsonl");
    REQUIRE(lines.size() == 3);
    MsiTuple t2 = tuple_from_json(lines[0]);
    CHECK(t2.image_id == 2);
    CHECK(t2.subjects.size() == 2);
}

TEST_CASE("rebuilds and parallelism changes leave bytes unchanged") {
    Env env;
    tu::TempDir out("det_out");
    BuildOptions a = env.options(out.path / "a");
    a.parallelism = 1;
    BuildOptions b = env.options(out.path / "b");
    b.parallelism = 4;
    write_manifest(build_dataset(a), a);
    write_manifest(build_dataset(b), b);

    CHECK(read_file(a.out_root / "manifest.jsonl") == read_file(b.out_root / "manifest.jsonl"));
    for (int64_t id : {2, 5, 7})
        CHECK(read_file(a.out_root / layout_file_name(id)) ==
              read_file(b.out_root / layout_file_name(id)));

    // A different seed changes the manifest.
    BuildOptions c = env.options(out.path / "c");
    c.assemble.seed = 43;
    write_manifest(build_dataset(c), c);
    CHECK(read_file(a.out_root / "manifest.jsonl") != read_file(c.out_root / "manifest.jsonl"));
}

TEST_CASE("val split is a deterministic per-image draw") {
    Env env;
    tu::TempDir out("split_out");
    BuildOptions opt = env.options(out.path / "d");
    opt.val_fraction = 0.5;
    BuildResult result = build_dataset(opt);
    for (const MsiTuple& t : result.tuples) {
        uint64_t u = derive_stream(42, static_cast<uint64_t>(t.image_id), kSplitStreamTag);
        double x = static_cast<double>(u >> 11) * 0x1.0p-53;
        CHECK(t.split == (x < 0.5 ? "val" : "train"));
    }

    BuildOptions rerun = env.options(out.path / "e");
    rerun.val_fraction = 0.5;
    BuildResult again = build_dataset(rerun);
    REQUIRE(again.tuples.size() == result.tuples.size());
    for (size_t i = 0; i < result.tuples.size(); ++i)
        CHECK(again.tuples[i].split == result.tuples[i].split);
}

TEST_CASE("an empty retained set builds an empty dataset") {
    Env env;
    tu::TempDir out("empty_out");
    BuildOptions opt = env.options(out.path / "d");
    opt.filter.alpha = 6;  // nothing has six salient subjects
    BuildResult result = build_dataset(opt);
    write_manifest(result, opt);
    CHECK(result.tuples.empty());
    CHECK(result.scenes == 0);
    CHECK(read_file(opt.out_root / "manifest.jsonl").empty());
    Json header = parse_json_file(opt.out_root / "manifest.header.json", "header");
    CHECK(header.at("counts").at("tuples") == 0);
}

TEST_CASE("failures are tolerated only below the ceiling") {
    Env env;
    // Remove one scene image so exactly one of three scenes fails.
    fs::remove(env.fx.images / "000000000005.png");

    tu::TempDir out("fail_out");
    BuildOptions strict = env.options(out.path / "strict");
    strict.error_ceiling = 0.0;
    CHECK_THROWS_AS(build_dataset(strict), BuildFailed);
    CHECK(fs::exists(strict.out_root / "errors.jsonl"));

    BuildOptions lax = env.options(out.path / "lax");
    lax.error_ceiling = 0.5;
    BuildResult result = build_dataset(lax);
    write_manifest(result, lax);
    CHECK(result.tuples.size() == 2);
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].at("image_id") == 5);
    CHECK(result.errors[0].at("error") == "ImageLoadFailure");
    CHECK(fs::exists(lax.out_root / "errors.jsonl"));
    Json header = parse_json_file(lax.out_root / "manifest.header.json", "header");
    CHECK(header.at("counts").at("failed") == 1);
    CHECK(header.at("counts").at("tuples") == 2);
}

TEST_CASE("build_dataset validates its inputs up front") {
    Env env;
    tu::TempDir out("valid_out");

    BuildOptions missing = env.options(out.path / "d");
    missing.instances = env.tmp.path / "nope.json";
    CHECK_THROWS_AS(build_dataset(missing), ConfigInvalid);
    CHECK_FALSE(fs::exists(missing.out_root));  // nothing written

    BuildOptions badfrac = env.options(out.path / "d2");
    badfrac.val_fraction = 1.0;
    CHECK_THROWS_AS(build_dataset(badfrac), InvalidRange);

    BuildOptions badpar = env.options(out.path / "d3");
    badpar.parallelism = 0;
    CHECK_THROWS_AS(build_dataset(badpar), InvalidRange);

    BuildOptions badceil = env.options(out.path / "d4");
    badceil.error_ceiling = 1.5;
    CHECK_THROWS_AS(build_dataset(badceil), InvalidRange);
}
