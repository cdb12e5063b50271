#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace msi {

// Insertion-ordered JSON keeps serialized field order stable and readable.
using Json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames into place, so readers never
// observe a partial document.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

// Parse with a typed error carrying `context` (usually the file name).
Json parse_json_file(const std::filesystem::path& path, const std::string& context);
Json parse_json_text(std::string_view text, const std::string& context);

std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

// Field access that raises SchemaViolation instead of nlohmann's generic errors.
const Json& require_field(const Json& obj, const char* key, const std::string& context);

// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double v);

}  // namespace msi
