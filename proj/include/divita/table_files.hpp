#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "divita/records.hpp"

namespace divita {

// trailer_id,start_frame,end_frame  (end exclusive)
struct BoundaryRow {
  std::string trailer_id;
  std::uint64_t start_frame = 0;
  std::uint64_t end_frame = 0;

  friend bool operator==(const BoundaryRow&, const BoundaryRow&) = default;
};

std::vector<BoundaryRow> parse_boundary_rows(std::string_view text);
std::string serialize_boundary_rows(const std::vector<BoundaryRow>& rows);

// trailer_id,fold,subset ; one SplitAssignment per fold, ordered by fold number.
std::vector<SplitAssignment> parse_split_rows(std::string_view text);
std::string serialize_split_rows(const std::vector<SplitAssignment>& folds);

std::vector<BoundaryRow> read_boundary_file(const std::filesystem::path& path);
void write_boundary_file(const std::filesystem::path& path, const std::vector<BoundaryRow>& rows);
std::vector<SplitAssignment> read_split_file(const std::filesystem::path& path);
void write_split_file(const std::filesystem::path& path, const std::vector<SplitAssignment>& folds);

}  // namespace divita
