#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "divita/records.hpp"

namespace divita {

// Line-delimited JSON, one TrailerRecord per line; blank lines are ignored.
std::vector<TrailerRecord> parse_manifest(std::string_view text);
std::string serialize_manifest(const std::vector<TrailerRecord>& records);

std::vector<TrailerRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<TrailerRecord>& records);

// Relative record paths are resolved against the manifest's directory.
std::filesystem::path resolve_path(const std::filesystem::path& manifest,
                                   const std::string& record_path);

}  // namespace divita
