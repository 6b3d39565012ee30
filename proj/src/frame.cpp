#include "divita/frame.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "divita/error.hpp"
#include "file_util.hpp"

namespace divita {

Frame::Frame(std::size_t width, std::size_t height, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width_(width), height_(height), rgb_(3 * width * height) {
  for (std::size_t i = 0; i < width * height; ++i) {
    rgb_[3 * i] = r;
    rgb_[3 * i + 1] = g;
    rgb_[3 * i + 2] = b;
  }
}

Frame::Frame(std::size_t width, std::size_t height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), rgb_(std::move(rgb)) {
  if (rgb_.size() != 3 * width * height) fail(ErrorKind::dimension, "raster size does not match frame shape");
}

bool Frame::is_black() const {
  return std::all_of(rgb_.begin(), rgb_.end(), [](std::uint8_t v) { return v == 0; });
}

double Frame::mean_luminance() const {
  if (empty()) fail(ErrorKind::dimension, "empty frame");
  double acc = 0.0;
  for (std::size_t i = 0; i < pixel_count(); ++i)
    acc += 0.299 * rgb_[3 * i] + 0.587 * rgb_[3 * i + 1] + 0.114 * rgb_[3 * i + 2];
  return acc / (255.0 * static_cast<double>(pixel_count()));
}

namespace {

class PpmParser {
 public:
  explicit PpmParser(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  bool at_end() {
    skip_space();
    return pos_ >= buf_.size();
  }

  Frame next() {
    if (pos_ + 2 > buf_.size() || buf_[pos_] != 'P' || buf_[pos_ + 1] != '6')
      fail(ErrorKind::format, "expected P6 header at byte " + std::to_string(pos_));
    pos_ += 2;
    auto w = number(), h = number(), maxval = number();
    if (maxval != 255) fail(ErrorKind::format, "only maxval 255 is supported");
    ++pos_;  // single whitespace before raster
    const std::size_t n = 3 * w * h;
    if (w == 0 || h == 0) fail(ErrorKind::format, "zero-sized frame");
    if (pos_ + n > buf_.size()) fail(ErrorKind::length, "truncated PPM raster");
    std::vector<std::uint8_t> rgb(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return Frame(w, h, std::move(rgb));
  }

 private:
  void skip_space() {
    while (pos_ < buf_.size()) {
      if (buf_[pos_] == '#') {
        while (pos_ < buf_.size() && buf_[pos_] != '\n') ++pos_;
      } else if (std::isspace(buf_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }
  std::size_t number() {
    skip_space();
    std::size_t v = 0;
    bool any = false;
    while (pos_ < buf_.size() && std::isdigit(buf_[pos_])) {
      v = v * 10 + (buf_[pos_++] - '0');
      any = true;
    }
    if (!any) fail(ErrorKind::format, "malformed PPM header");
    return v;
  }

  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Frame> read_ppm_stream(const std::filesystem::path& path) {
  auto buf = detail::read_binary_file(path);
  PpmParser parser(buf);
  std::vector<Frame> frames;
  while (!parser.at_end()) frames.push_back(parser.next());
  return frames;
}

void write_ppm_stream(const std::filesystem::path& path, const std::vector<Frame>& frames) {
  detail::ByteWriter w;
  for (const auto& f : frames) {
    w.bytes("P6\n" + std::to_string(f.width()) + " " + std::to_string(f.height()) + "\n255\n");
    auto& buf = w.buffer();
    buf.insert(buf.end(), f.data().begin(), f.data().end());
  }
  detail::write_binary_file(path, w.buffer());
}

}  // namespace divita
