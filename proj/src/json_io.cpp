#include "pdagent/json_io.hpp"

#include <fstream>
#include <sstream>

#include "pdagent/errors.hpp"
#include "pdagent/text.hpp"

namespace fs = std::filesystem;

namespace pdagent {

std::string canonical_dump(const nlohmann::json& doc) {
    return doc.dump(2) + "\n";
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot open for writing: " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw ConfigError("short write: " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const nlohmann::json& doc) {
    write_text_atomic(path, canonical_dump(doc));
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open for reading: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

nlohmann::json read_json(const fs::path& path) {
    const std::string text = read_text(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("invalid JSON in " + path.string() + ": " + ex.what());
    }
}

std::string file_content_hash(const fs::path& path) {
    return to_hex(fnv1a64(read_text(path)));
}

}  // namespace pdagent
