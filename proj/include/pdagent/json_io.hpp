#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace pdagent {

/// Canonical rendering: nlohmann::json keeps object keys sorted, so the same
/// document always serializes to the same bytes.
std::string canonical_dump(const nlohmann::json& doc);

/// Writes via a temp file in the same directory plus rename, so readers never
/// observe a partially written artifact.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc);

std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// FNV-1a content hash of a file, hex encoded. Used for manifest checksums.
std::string file_content_hash(const std::filesystem::path& path);

}  // namespace pdagent
