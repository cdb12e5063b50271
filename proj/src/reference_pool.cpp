#include "msi/reference_pool.hpp"

#include <set>

#include "msi/errors.hpp"
#include "msi/io.hpp"
#include "msi/log.hpp"

namespace msi {

size_t ReferencePool::total_entries() const {
    size_t n = 0;
    for (const auto& [category_id, entries] : pools) n += entries.size();
    return n;
}

ReferencePool build_pool(const std::filesystem::path& manifest_path, int min_entries) {
    std::string bytes = read_file(manifest_path);
    Json doc = Json::parse(bytes, nullptr, false);
    if (doc.is_discarded()) throw MalformedManifest("pool manifest is not valid JSON: " + manifest_path.string());
    if (!doc.is_object() || !doc.contains("categories") || !doc["categories"].is_array())
        throw MalformedManifest("pool manifest must be an object with a 'categories' list");

    ReferencePool pool;
    pool.manifest_digest = sha256_hex(bytes);

    for (const Json& group : doc["categories"]) {
        if (!group.is_object() || !group.contains("category_id") || !group["category_id"].is_number_integer())
            throw MalformedManifest("category group lacks an integer 'category_id'");
        int64_t category_id = group["category_id"].get<int64_t>();
        if (pool.pools.count(category_id))
            throw MalformedManifest("duplicate category group " + std::to_string(category_id));
        if (!group.contains("entries") || !group["entries"].is_array())
            throw MalformedManifest("category " + std::to_string(category_id) + " lacks an 'entries' list");

        std::vector<ReferenceEntry> entries;
        std::set<std::string> seen_ids;
        for (const Json& ej : group["entries"]) {
            ReferenceEntry e;
            e.category_id = category_id;
            if (!ej.is_object() || !ej.contains("ref_id") || !ej["ref_id"].is_string())
                throw MalformedManifest("entry in category " + std::to_string(category_id) +
                                        " lacks a string 'ref_id'");
            e.ref_id = ej["ref_id"].get<std::string>();
            if (!seen_ids.insert(e.ref_id).second)
                throw MalformedManifest("duplicate ref_id '" + e.ref_id + "' in category " +
                                        std::to_string(category_id));
            if (!ej.contains("path") || !ej["path"].is_string())
                throw MalformedManifest("entry '" + e.ref_id + "' lacks a string 'path'");
            e.image_path = ej["path"].get<std::string>();
            if (!ej.contains("width") || !ej["width"].is_number_integer() || !ej.contains("height") ||
                !ej["height"].is_number_integer())
                throw MalformedManifest("entry '" + e.ref_id + "' lacks integer width/height");
            e.width = ej["width"].get<int>();
            e.height = ej["height"].get<int>();
            if (e.width <= 0 || e.height <= 0)
                throw MalformedManifest("entry '" + e.ref_id + "' has non-positive dimensions");
            entries.push_back(std::move(e));
        }
        if (static_cast<int>(entries.size()) < min_entries)
            log_event(LogLevel::Warn, "small_pool",
                      {{"category_id", category_id},
                       {"entries", entries.size()},
                       {"minimum", min_entries}});
        pool.pools.emplace(category_id, std::move(entries));
    }
    return pool;
}

const ReferenceEntry& sample_reference(const ReferencePool& pool, int64_t category_id, Rng& rng) {
    auto it = pool.pools.find(category_id);
    if (it == pool.pools.end() || it->second.empty())
        throw EmptyCategory("no pool entries for category " + std::to_string(category_id));
    uint64_t idx = rng.bounded(it->second.size());
    return it->second[idx];
}

}  // namespace msi
