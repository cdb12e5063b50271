#include "msi/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "msi/errors.hpp"

namespace msi {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoFailure("read failed: " + path.string());
    return std::move(ss).str();
}

void atomic_write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw IoFailure("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoFailure("rename failed: " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoFailure("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

Json parse_json_text(std::string_view text, const std::string& context) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw MalformedDocument("invalid JSON in " + context);
    return j;
}

Json parse_json_file(const std::filesystem::path& path, const std::string& context) {
    return parse_json_text(read_file(path), context.empty() ? path.string() : context);
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open for reading: " + path.string());
    std::vector<Json> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        out.push_back(parse_json_text(line, path.string() + ":" + std::to_string(lineno)));
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines) {
    std::string buf;
    for (const Json& j : lines) {
        buf += j.dump();
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

const Json& require_field(const Json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaViolation("missing field '" + std::string(key) + "' in " + context);
    return *it;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace msi
