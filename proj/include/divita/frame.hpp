#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace divita {

// 8-bit interleaved RGB raster.
class Frame {
 public:
  Frame() = default;
  Frame(std::size_t width, std::size_t height, std::uint8_t r = 0, std::uint8_t g = 0,
        std::uint8_t b = 0);
  Frame(std::size_t width, std::size_t height, std::vector<std::uint8_t> rgb);

  static Frame black(std::size_t width, std::size_t height) { return Frame(width, height); }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  bool empty() const { return pixel_count() == 0; }

  std::uint8_t* pixel(std::size_t x, std::size_t y) { return &rgb_[3 * (y * width_ + x)]; }
  const std::uint8_t* pixel(std::size_t x, std::size_t y) const { return &rgb_[3 * (y * width_ + x)]; }
  const std::vector<std::uint8_t>& data() const { return rgb_; }

  bool is_black() const;
  // Mean Rec.601 luma in [0, 1].
  double mean_luminance() const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> rgb_;
};

// Frame streams are concatenated binary PPM (P6, maxval 255) images, the
// layout produced by `ffmpeg -f image2pipe -vcodec ppm`.
std::vector<Frame> read_ppm_stream(const std::filesystem::path& path);
void write_ppm_stream(const std::filesystem::path& path, const std::vector<Frame>& frames);

}  // namespace divita
