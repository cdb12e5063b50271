#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "msi/rng.hpp"

namespace msi {

struct ReferenceEntry {
    std::string ref_id;
    int64_t category_id = 0;
    std::string image_path;  // relative to the images root
    int width = 0;
    int height = 0;
};

struct ReferencePool {
    // Entries kept in manifest order per category.
    std::map<int64_t, std::vector<ReferenceEntry>> pools;
    std::string manifest_digest;

    size_t total_entries() const;
};

// Loads and validates a pool manifest. Categories with fewer than
// min_entries warn, they do not fail. Structural problems throw
// MalformedManifest.
ReferencePool build_pool(const std::filesystem::path& manifest_path, int min_entries = 30);

// Uniform draw over the category's entries via rng.bounded. Throws
// EmptyCategory when the category is absent or empty.
const ReferenceEntry& sample_reference(const ReferencePool& pool, int64_t category_id, Rng& rng);

}  // namespace msi
