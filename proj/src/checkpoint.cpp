#include "divita/checkpoint.hpp"

#include "divita/error.hpp"
#include "file_util.hpp"

namespace divita::tensor {

std::vector<std::uint8_t> encode_checkpoint(const ParamStore& store) {
  detail::ByteWriter w;
  w.bytes("DVTM");
  w.u16(kCheckpointVersion);
  for (const auto& p : store.items()) {
    w.u16(static_cast<std::uint16_t>(p.name.size()));
    w.bytes(p.name);
    w.u16(static_cast<std::uint16_t>(p.value.rank()));
    for (auto d : p.value.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (double v : p.value.values()) w.f64(v);
  }
  return std::move(w.buffer());
}

ParamStore decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  std::string magic;
  std::uint16_t version = 0;
  if (!r.bytes(4, magic) || magic != "DVTM") fail(ErrorKind::format, "bad DVTM magic");
  if (!r.u16(version) || version != kCheckpointVersion)
    fail(ErrorKind::format, "unsupported DVTM version " + std::to_string(version));
  ParamStore store;
  while (r.remaining() > 0) {
    std::uint16_t name_len = 0, rank = 0;
    std::string name;
    if (!r.u16(name_len) || !r.bytes(name_len, name) || !r.u16(rank))
      fail(ErrorKind::length, "truncated DVTM record header");
    if (rank < 1 || rank > 3) fail(ErrorKind::format, "bad tensor rank in '" + name + "'");
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      std::uint32_t v = 0;
      if (!r.u32(v)) fail(ErrorKind::length, "truncated DVTM shape");
      d = v;
      count *= v;
    }
    if (r.remaining() < count * 8) fail(ErrorKind::length, "truncated payload for '" + name + "'");
    std::vector<double> values(count);
    for (auto& v : values) r.f64(v);
    store.add(name, Tensor(shape, std::move(values)));
  }
  return store;
}

void write_checkpoint(const std::filesystem::path& path, const ParamStore& store) {
  detail::write_binary_file(path, encode_checkpoint(store));
}

ParamStore read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_binary_file(path));
}

void load_values(ParamStore& target, const ParamStore& source) {
  if (target.size() != source.size())
    fail(ErrorKind::configuration, "checkpoint has " + std::to_string(source.size()) +
                                       " parameters, model expects " + std::to_string(target.size()));
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto& t = target.at(i);
    const auto& s = source.at(i);
    if (t.name != s.name || !t.value.same_shape(s.value))
      fail(ErrorKind::configuration, "checkpoint parameter '" + s.name + "' does not match model");
    t.value = s.value;
  }
}

}  // namespace divita::tensor
