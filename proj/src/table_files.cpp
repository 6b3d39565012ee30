#include "divita/table_files.hpp"

#include <charconv>
#include <map>
#include <set>

#include "divita/error.hpp"
#include "file_util.hpp"

namespace divita {

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    auto field = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": expected an integer, got '" + s + "'");
  return v;
}

// Calls fn(fields, line_no) for each non-blank, non-header row.
template <typename Fn>
void for_each_row(std::string_view text, std::size_t n_fields, Fn&& fn) {
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto fields = split_fields(line);
    if (fields.size() != n_fields)
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(n_fields) + " fields");
    if (line_no == 1 && fields[0] == "trailer_id") continue;
    fn(fields, line_no);
  }
}

}  // namespace

std::vector<BoundaryRow> parse_boundary_rows(std::string_view text) {
  std::vector<BoundaryRow> rows;
  for_each_row(text, 3, [&](const std::vector<std::string>& f, std::size_t line) {
    BoundaryRow row{f[0], parse_u64(f[1], line), parse_u64(f[2], line)};
    if (row.trailer_id.empty()) fail(ErrorKind::parse, "line " + std::to_string(line) + ": empty id");
    if (row.end_frame <= row.start_frame)
      fail(ErrorKind::validation, "line " + std::to_string(line) + ": empty or inverted shot");
    rows.push_back(std::move(row));
  });
  return rows;
}

std::string serialize_boundary_rows(const std::vector<BoundaryRow>& rows) {
  std::string out = "trailer_id,start_frame,end_frame\n";
  for (const auto& r : rows)
    out += r.trailer_id + "," + std::to_string(r.start_frame) + "," + std::to_string(r.end_frame) + "\n";
  return out;
}

std::vector<SplitAssignment> parse_split_rows(std::string_view text) {
  std::map<int, SplitAssignment> folds;
  std::map<int, std::set<std::string>> seen;
  for_each_row(text, 3, [&](const std::vector<std::string>& f, std::size_t line) {
    int fold = static_cast<int>(parse_u64(f[1], line));
    if (fold < 1) fail(ErrorKind::validation, "line " + std::to_string(line) + ": fold must be >= 1");
    if (!seen[fold].insert(f[0]).second)
      fail(ErrorKind::validation, "line " + std::to_string(line) + ": '" + f[0] +
                                      "' assigned twice in fold " + f[1]);
    auto& a = folds[fold];
    a.fold = fold;
    a.ids.push_back(f[0]);
    a.subsets.push_back(parse_subset(f[2]));
  });
  std::vector<SplitAssignment> out;
  for (auto& [k, a] : folds) out.push_back(std::move(a));
  return out;
}

std::string serialize_split_rows(const std::vector<SplitAssignment>& folds) {
  std::string out = "trailer_id,fold,subset\n";
  for (const auto& a : folds)
    for (std::size_t i = 0; i < a.ids.size(); ++i)
      out += a.ids[i] + "," + std::to_string(a.fold) + "," + to_string(a.subsets[i]) + "\n";
  return out;
}

std::vector<BoundaryRow> read_boundary_file(const std::filesystem::path& path) {
  return parse_boundary_rows(detail::read_text_file(path));
}

void write_boundary_file(const std::filesystem::path& path, const std::vector<BoundaryRow>& rows) {
  detail::write_text_file(path, serialize_boundary_rows(rows));
}

std::vector<SplitAssignment> read_split_file(const std::filesystem::path& path) {
  return parse_split_rows(detail::read_text_file(path));
}

void write_split_file(const std::filesystem::path& path, const std::vector<SplitAssignment>& folds) {
  detail::write_text_file(path, serialize_split_rows(folds));
}

}  // namespace divita
