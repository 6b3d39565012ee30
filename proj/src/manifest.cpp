#include "divita/manifest.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "divita/error.hpp"
#include "file_util.hpp"

namespace divita {

namespace {

using nlohmann::json;

bool well_formed_path(const std::string& p) {
  return !p.empty() && p.find('\0') == std::string::npos;
}

TrailerRecord record_from_json(const json& j, std::size_t line) {
  auto where = " (line " + std::to_string(line) + ")";
  if (!j.is_object()) fail(ErrorKind::parse, "record is not an object" + where);
  TrailerRecord rec;
  try {
    rec.id = j.at("id").get<std::string>();
    if (j.contains("video_path")) rec.video_path = j.at("video_path").get<std::string>();
    if (j.contains("feature_path")) rec.feature_path = j.at("feature_path").get<std::string>();
    auto names = j.at("genres").get<std::vector<std::string>>();
    if (names.empty()) fail(ErrorKind::validation, "empty genre list" + where);
    for (const auto& name : names)
      if (!genre_index(name)) fail(ErrorKind::validation, "unknown genre '" + name + "'" + where);
    rec.genres = GenreSet::from_names(names);
    rec.fps = j.value("fps", 24.0);
    rec.duration_frames = j.value<std::uint64_t>("duration_frames", 1);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("bad record field: ") + e.what() + where);
  }
  if (rec.id.empty()) fail(ErrorKind::validation, "empty id" + where);
  if (!rec.video_path && !rec.feature_path)
    fail(ErrorKind::validation, "record needs video_path or feature_path" + where);
  if ((rec.video_path && !well_formed_path(*rec.video_path)) ||
      (rec.feature_path && !well_formed_path(*rec.feature_path)))
    fail(ErrorKind::validation, "malformed path" + where);
  if (!(rec.fps > 0.0) || !std::isfinite(rec.fps)) fail(ErrorKind::validation, "fps must be positive" + where);
  if (rec.duration_frames < 1) fail(ErrorKind::validation, "duration_frames must be >= 1" + where);
  return rec;
}

json record_to_json(const TrailerRecord& rec) {
  json j;
  j["id"] = rec.id;
  if (rec.video_path) j["video_path"] = *rec.video_path;
  if (rec.feature_path) j["feature_path"] = *rec.feature_path;
  j["genres"] = rec.genres.names();
  if (rec.fps == std::floor(rec.fps))
    j["fps"] = static_cast<std::int64_t>(rec.fps);
  else
    j["fps"] = rec.fps;
  j["duration_frames"] = rec.duration_frames;
  return j;
}

}  // namespace

std::vector<TrailerRecord> parse_manifest(std::string_view text) {
  std::vector<TrailerRecord> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::parse, "malformed line " + std::to_string(line_no) + ": " + e.what());
    }
    auto rec = record_from_json(j, line_no);
    if (!seen.insert(rec.id).second)
      fail(ErrorKind::validation,
           "duplicate id '" + rec.id + "' (line " + std::to_string(line_no) + ")");
    out.push_back(std::move(rec));
  }
  return out;
}

std::string serialize_manifest(const std::vector<TrailerRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    out += record_to_json(rec).dump();
    out += '\n';
  }
  return out;
}

std::vector<TrailerRecord> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(detail::read_text_file(path));
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<TrailerRecord>& records) {
  detail::write_text_file(path, serialize_manifest(records));
}

std::filesystem::path resolve_path(const std::filesystem::path& manifest,
                                   const std::string& record_path) {
  std::filesystem::path p(record_path);
  if (p.is_absolute()) return p;
  return manifest.parent_path() / p;
}

}  // namespace divita
