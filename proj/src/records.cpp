#include "divita/records.hpp"

#include <algorithm>
#include <cmath>

#include "divita/error.hpp"

namespace divita {

FeatureSequence::FeatureSequence(std::string backbone_id, std::size_t width,
                                 std::vector<float> values)
    : backbone_id_(std::move(backbone_id)), width_(width), values_(std::move(values)) {
  if (width_ == 0) fail(ErrorKind::dimension, "feature width must be positive");
  if (values_.empty() || values_.size() % width_ != 0)
    fail(ErrorKind::dimension, "feature payload is not a nonempty multiple of the row width");
  for (float v : values_)
    if (!std::isfinite(v)) fail(ErrorKind::data, "non-finite feature value");
}

const char* to_string(Subset subset) {
  switch (subset) {
    case Subset::train: return "train";
    case Subset::val: return "val";
    case Subset::test: return "test";
  }
  return "?";
}

Subset parse_subset(const std::string& text) {
  if (text == "train") return Subset::train;
  if (text == "val") return Subset::val;
  if (text == "test") return Subset::test;
  fail(ErrorKind::validation, "unknown subset '" + text + "'");
}

std::vector<std::string> SplitAssignment::ids_in(Subset subset) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (subsets[i] == subset) out.push_back(ids[i]);
  return out;
}

std::size_t SplitAssignment::count(Subset subset) const {
  return static_cast<std::size_t>(std::count(subsets.begin(), subsets.end(), subset));
}

}  // namespace divita
