#include <map>

#include "doctest.h"
#include "msi/errors.hpp"
#include "msi/reference_pool.hpp"
#include "testutil.hpp"

using namespace msi;
namespace tu = testutil;

namespace {

Json base_manifest() {
    Json pool = Json::object();
    pool["categories"] = Json::array();
    Json group = Json::object();
    group["category_id"] = 1;
    group["entries"] = Json::array();
    for (int i = 0; i < 3; ++i) {
        Json e = Json::object();
        e["ref_id"] = "r" + std::to_string(i);
        e["path"] = "refs/r" + std::to_string(i) + ".png";
        e["width"] = 8;
        e["height"] = 6;
        group["entries"].push_back(std::move(e));
    }
    pool["categories"].push_back(std::move(group));
    return pool;
}

ReferencePool load(const Json& manifest, int min_entries = 1) {
    tu::TempDir tmp("pool");
    std::filesystem::path p = tmp.path / "pool.json";
    atomic_write_file(p, manifest.dump());
    return build_pool(p, min_entries);
}

}  // namespace

TEST_CASE("build_pool loads the fixture manifest") {
    tu::TempDir tmp("poolfx");
    tu::Fixture fx = tu::make_mini_coco(tmp.path);
    ReferencePool pool = build_pool(fx.pool, 1);
    CHECK(pool.pools.size() == 4);
    CHECK(pool.pools.at(1).size() == 3);
    CHECK(pool.pools.at(4).size() == 1);
    CHECK(pool.total_entries() == 8);
    CHECK(pool.pools.at(1)[0].ref_id == "c1_0");
    CHECK(pool.pools.at(1)[0].image_path == "refs/c1_0.png");
    CHECK(pool.pools.at(1)[0].width == 5);
    CHECK(pool.pools.at(1)[0].height == 4);
    CHECK(pool.pools.at(1)[2].width == 7);
    CHECK(pool.manifest_digest.size() == 64);

    // Digest is the file digest: stable across loads, sensitive to bytes.
    ReferencePool again = build_pool(fx.pool, 1);
    CHECK(again.manifest_digest == pool.manifest_digest);
    CHECK(pool.manifest_digest == sha256_hex(read_file(fx.pool)));
}

TEST_CASE("pool capacity multiplies categories by entries") {
    // Eighty categories of thirty entries give a 2400-reference pool.
    Json manifest = Json::object();
    manifest["categories"] = Json::array();
    for (int c = 1; c <= 80; ++c) {
        Json group = Json::object();
        group["category_id"] = c;
        group["entries"] = Json::array();
        for (int i = 0; i < 30; ++i) {
            Json e = Json::object();
            e["ref_id"] = "c" + std::to_string(c) + "_" + std::to_string(i);
            e["path"] = "refs/x.png";
            e["width"] = 4;
            e["height"] = 4;
            group["entries"].push_back(std::move(e));
        }
        manifest["categories"].push_back(std::move(group));
    }
    ReferencePool pool = load(manifest, 30);
    CHECK(pool.pools.size() == 80);
    CHECK(pool.total_entries() == 2400);
}

TEST_CASE("build_pool rejects structural problems") {
    SUBCASE("invalid json") {
        tu::TempDir tmp("poolbad");
        std::filesystem::path p = tmp.path / "pool.json";
        atomic_write_file(p, "{not json");
        CHECK_THROWS_AS(build_pool(p, 1), MalformedManifest);
    }
    SUBCASE("missing categories key") {
        CHECK_THROWS_AS(load(Json::object()), MalformedManifest);
    }
    SUBCASE("duplicate category group") {
        Json m = base_manifest();
        m["categories"].push_back(m["categories"][0]);
        CHECK_THROWS_AS(load(m), MalformedManifest);
    }
    SUBCASE("duplicate ref id within a category") {
        Json m = base_manifest();
        m["categories"][0]["entries"][1]["ref_id"] = "r0";
        CHECK_THROWS_AS(load(m), MalformedManifest);
    }
    SUBCASE("missing ref id") {
        Json m = base_manifest();
        m["categories"][0]["entries"][0].erase("ref_id");
        CHECK_THROWS_AS(load(m), MalformedManifest);
    }
    SUBCASE("missing path") {
        Json m = base_manifest();
        m["categories"][0]["entries"][0].erase("path");
        CHECK_THROWS_AS(load(m), MalformedManifest);
    }
    SUBCASE("non-positive dimensions") {
        Json m = base_manifest();
        m["categories"][0]["entries"][0]["width"] = 0;
        CHECK_THROWS_AS(load(m), MalformedManifest);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(build_pool("/nonexistent/pool.json", 1), IoFailure);
    }
}

TEST_CASE("small categories load with a warning, not an error") {
    // Three entries against a floor of thirty must still produce a usable pool.
    ReferencePool pool = load(base_manifest(), 30);
    CHECK(pool.pools.at(1).size() == 3);
}

TEST_CASE("sample_reference draws uniformly and errors on empty categories") {
    ReferencePool pool = load(base_manifest());
    Rng rng(7);
    std::map<std::string, int> counts;
    const int draws = 30000;
    for (int i = 0; i < draws; ++i) counts[sample_reference(pool, 1, rng).ref_id]++;
    REQUIRE(counts.size() == 3);
    for (auto& [ref_id, count] : counts) {
        (void)ref_id;
        CHECK(count > draws / 3 * 0.93);
        CHECK(count < draws / 3 * 1.07);
    }

    CHECK_THROWS_AS(sample_reference(pool, 42, rng), EmptyCategory);

    Json with_empty = base_manifest();
    Json group = Json::object();
    group["category_id"] = 2;
    group["entries"] = Json::array();
    with_empty["categories"].push_back(group);
    ReferencePool pool2 = load(with_empty);
    CHECK_THROWS_AS(sample_reference(pool2, 2, rng), EmptyCategory);
}

TEST_CASE("sampling is reproducible for equal seeds") {
    ReferencePool pool = load(base_manifest());
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i)
        CHECK(sample_reference(pool, 1, a).ref_id == sample_reference(pool, 1, b).ref_id);
}
