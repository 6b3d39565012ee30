#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "divita/tensor.hpp"

namespace divita::tensor {

// DVTM layout, little-endian:
//   "DVTM" | u16 version=1 | records until end of file, each
//   u16 name_len | name | u16 rank | rank * u32 dims | float64 payload
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const ParamStore& store);
ParamStore decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::filesystem::path& path, const ParamStore& store);
ParamStore read_checkpoint(const std::filesystem::path& path);

// Copies values from `source` into `target`; names and shapes must agree.
void load_values(ParamStore& target, const ParamStore& source);

}  // namespace divita::tensor
