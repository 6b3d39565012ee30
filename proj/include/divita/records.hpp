#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divita/genres.hpp"

namespace divita {

struct TrailerRecord {
  std::string id;
  std::optional<std::string> video_path;
  std::optional<std::string> feature_path;
  GenreSet genres;
  double fps = 24.0;
  std::uint64_t duration_frames = 1;

  friend bool operator==(const TrailerRecord&, const TrailerRecord&) = default;
};

// Per-clip representation vectors of one trailer, row-major n_clips x width.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  FeatureSequence(std::string backbone_id, std::size_t width, std::vector<float> values);

  const std::string& backbone_id() const { return backbone_id_; }
  std::size_t width() const { return width_; }
  std::size_t n_clips() const { return width_ == 0 ? 0 : values_.size() / width_; }
  std::span<const float> row(std::size_t j) const {
    return {values_.data() + j * width_, width_};
  }
  const std::vector<float>& values() const { return values_; }

  friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;

 private:
  std::string backbone_id_;
  std::size_t width_ = 0;
  std::vector<float> values_;
};

enum class Subset : std::uint8_t { train, val, test };

const char* to_string(Subset subset);
Subset parse_subset(const std::string& text);

// One fold of a train/val/test partition, aligned with a list of trailer ids.
struct SplitAssignment {
  int fold = 1;
  std::vector<std::string> ids;
  std::vector<Subset> subsets;

  std::vector<std::string> ids_in(Subset subset) const;
  std::size_t count(Subset subset) const;

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

}  // namespace divita
