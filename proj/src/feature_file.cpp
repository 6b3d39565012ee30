#include "divita/feature_file.hpp"

#include <cmath>

#include "divita/error.hpp"
#include "file_util.hpp"

namespace divita {

std::vector<std::uint8_t> encode_features(const FeatureSequence& seq) {
  detail::ByteWriter w;
  w.bytes("DVTF");
  w.u16(kFeatureFileVersion);
  if (seq.backbone_id().size() > 0xFFFF) fail(ErrorKind::argument, "backbone id too long");
  w.u16(static_cast<std::uint16_t>(seq.backbone_id().size()));
  w.bytes(seq.backbone_id());
  w.u32(static_cast<std::uint32_t>(seq.width()));
  w.u32(static_cast<std::uint32_t>(seq.n_clips()));
  for (float v : seq.values()) w.f32(v);
  return std::move(w.buffer());
}

FeatureSequence decode_features(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  std::string magic;
  std::uint16_t version = 0;
  if (!r.bytes(4, magic) || magic != "DVTF") fail(ErrorKind::format, "bad DVTF magic");
  if (!r.u16(version) || version != kFeatureFileVersion)
    fail(ErrorKind::format, "unsupported DVTF version " + std::to_string(version));
  std::uint16_t id_len = 0;
  std::string backbone;
  std::uint32_t width = 0, n_clips = 0;
  if (!r.u16(id_len) || !r.bytes(id_len, backbone) || !r.u32(width) || !r.u32(n_clips))
    fail(ErrorKind::length, "truncated DVTF header");
  if (width == 0 || n_clips == 0) fail(ErrorKind::format, "DVTF header declares an empty matrix");
  const std::size_t count = static_cast<std::size_t>(width) * n_clips;
  if (r.remaining() != count * 4)
    fail(ErrorKind::length, "DVTF payload has " + std::to_string(r.remaining()) +
                                " bytes, header declares " + std::to_string(count * 4));
  std::vector<float> values(count);
  for (auto& v : values) {
    r.f32(v);
    if (!std::isfinite(v)) fail(ErrorKind::data, "non-finite value in DVTF payload");
  }
  return FeatureSequence(std::move(backbone), width, std::move(values));
}

FeatureSequence read_features(const std::filesystem::path& path) {
  try {
    return decode_features(detail::read_binary_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_features(const std::filesystem::path& path, const FeatureSequence& seq) {
  detail::write_binary_file(path, encode_features(seq));
}

}  // namespace divita
