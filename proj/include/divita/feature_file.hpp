#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "divita/records.hpp"

namespace divita {

// DVTF layout, little-endian:
//   "DVTF" | u16 version=1 | u16 id_len | id bytes | u32 width | u32 n_clips |
//   n_clips*width float32, row-major
inline constexpr std::uint16_t kFeatureFileVersion = 1;

std::vector<std::uint8_t> encode_features(const FeatureSequence& seq);
FeatureSequence decode_features(const std::vector<std::uint8_t>& bytes);

FeatureSequence read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureSequence& seq);

}  // namespace divita
