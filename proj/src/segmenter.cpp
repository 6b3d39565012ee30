#include "divita/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "divita/error.hpp"

namespace divita::seg {

void DetectorConfig::validate() const {
  if (bins < 2) fail(ErrorKind::argument, "histogram needs at least 2 bins");
  if (!(cut_threshold > 0.0) || !(black_threshold > 0.0))
    fail(ErrorKind::argument, "detector thresholds must be positive");
  if (min_shot_length < 1) fail(ErrorKind::argument, "minimum shot length must be >= 1");
}

std::vector<double> frame_histogram(const Frame& frame, std::size_t bins) {
  if (bins < 2) fail(ErrorKind::argument, "histogram needs at least 2 bins");
  if (frame.empty()) fail(ErrorKind::dimension, "empty frame");
  std::vector<double> hist(3 * bins, 0.0);
  const auto& rgb = frame.data();
  for (std::size_t i = 0; i < rgb.size(); i += 3)
    for (std::size_t ch = 0; ch < 3; ++ch) hist[ch * bins + rgb[i + ch] * bins / 256] += 1.0;
  const double inv = 1.0 / static_cast<double>(frame.pixel_count());
  for (auto& v : hist) v *= inv;
  return hist;
}

double histogram_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::dimension, "histogram widths differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

namespace {

// Cut detection and short-shot merging inside one run of non-dark frames.
std::vector<Shot> segment_run(const std::vector<std::vector<double>>& hists, std::size_t begin,
                              std::size_t end, const DetectorConfig& config) {
  std::vector<Shot> raw;
  std::size_t start = begin;
  for (std::size_t i = begin + 1; i < end; ++i) {
    if (histogram_distance(hists[i - 1], hists[i]) > config.cut_threshold) {
      raw.push_back({start, i});
      start = i;
    }
  }
  raw.push_back({start, end});

  std::vector<Shot> merged;
  for (const auto& s : raw) {
    if (!merged.empty() && s.length() < config.min_shot_length)
      merged.back().end_frame = s.end_frame;
    else
      merged.push_back(s);
  }
  if (merged.size() > 1 && merged.front().length() < config.min_shot_length) {
    merged[1].start_frame = merged[0].start_frame;
    merged.erase(merged.begin());
  }
  return merged;
}

}  // namespace

std::vector<Shot> detect_shots(std::span<const Frame> frames, const DetectorConfig& config) {
  config.validate();
  const std::size_t n = frames.size();
  if (n == 0) fail(ErrorKind::argument, "video has no frames");

  std::vector<std::vector<double>> hists(n);
  std::vector<bool> dark(n);
  for (std::size_t i = 0; i < n; ++i) {
    hists[i] = frame_histogram(frames[i], config.bins);
    dark[i] = frames[i].mean_luminance() < config.black_threshold;
  }

  std::vector<Shot> shots;
  std::size_t i = 0;
  while (i < n) {
    if (dark[i]) {
      std::size_t j = i;
      while (j < n && dark[j]) ++j;
      // Leading dark frames are picked up by the first content shot below.
      if (!shots.empty()) shots.back().end_frame = j;
      i = j;
      continue;
    }
    std::size_t j = i;
    while (j < n && !dark[j]) ++j;
    auto run = segment_run(hists, i, j, config);
    if (shots.empty()) run.front().start_frame = 0;
    shots.insert(shots.end(), run.begin(), run.end());
    i = j;
  }
  if (shots.empty()) shots.push_back({0, n});
  return shots;
}

void validate_partition(std::span<const Shot> shots, std::size_t total) {
  if (shots.empty()) fail(ErrorKind::validation, "no shots");
  std::size_t expected = 0;
  for (const auto& s : shots) {
    if (s.start_frame < expected)
      fail(ErrorKind::validation, "overlapping shots at frame " + std::to_string(s.start_frame));
    if (s.start_frame > expected)
      fail(ErrorKind::validation, "gap between frames " + std::to_string(expected) + " and " +
                                      std::to_string(s.start_frame));
    if (s.end_frame <= s.start_frame) fail(ErrorKind::validation, "empty shot");
    expected = s.end_frame;
  }
  if (total != 0 && expected != total)
    fail(ErrorKind::validation, "shots end at " + std::to_string(expected) + ", video has " +
                                    std::to_string(total) + " frames");
}

std::vector<Shot> import_boundaries(std::span<const BoundaryRow> rows, std::string_view trailer_id,
                                    std::size_t expected_length) {
  std::vector<Shot> shots;
  for (const auto& r : rows)
    if (r.trailer_id == trailer_id)
      shots.push_back({static_cast<std::size_t>(r.start_frame), static_cast<std::size_t>(r.end_frame)});
  if (shots.empty())
    fail(ErrorKind::validation, "no boundary rows for trailer '" + std::string(trailer_id) + "'");
  std::sort(shots.begin(), shots.end(),
            [](const Shot& a, const Shot& b) { return a.start_frame < b.start_frame; });
  validate_partition(shots, expected_length);
  return shots;
}

std::vector<BoundaryRow> export_boundaries(std::span<const Shot> shots, std::string_view trailer_id) {
  std::vector<BoundaryRow> rows;
  for (const auto& s : shots) rows.push_back({std::string(trailer_id), s.start_frame, s.end_frame});
  return rows;
}

std::vector<ClipSpan> shot_clip_layout(std::span<const Shot> shots, std::size_t f) {
  if (f == 0) fail(ErrorKind::argument, "clip length f must be >= 1");
  std::vector<ClipSpan> out;
  for (std::size_t s = 0; s < shots.size(); ++s) {
    const auto& shot = shots[s];
    if (shot.length() == 0) fail(ErrorKind::argument, "empty shot");
    for (std::size_t off = 0; off < shot.length(); off += f) {
      const auto len = std::min(f, shot.length() - off);
      out.push_back({s, shot.start_frame + off, len, f - len});
    }
  }
  return out;
}

std::vector<ClipSpan> seq_clip_layout(std::size_t n_frames, std::size_t f) {
  if (f == 0) fail(ErrorKind::argument, "clip length f must be >= 1");
  if (n_frames == 0) return {};
  return shot_clip_layout(std::vector<Shot>{{0, n_frames}}, f);
}

std::vector<Clip> materialize(std::span<const Frame> frames, std::span<const ClipSpan> layout,
                              std::size_t f) {
  std::vector<Clip> clips;
  clips.reserve(layout.size());
  for (const auto& span : layout) {
    if (span.end_frame() > frames.size()) fail(ErrorKind::argument, "clip exceeds frame sequence");
    Clip clip;
    clip.f = f;
    clip.source_shot = span.source_shot;
    clip.start_frame = span.start_frame;
    clip.pad_count = span.pad_count;
    clip.frames.assign(frames.begin() + static_cast<std::ptrdiff_t>(span.start_frame),
                       frames.begin() + static_cast<std::ptrdiff_t>(span.end_frame()));
    const auto& ref = frames[span.start_frame];
    clip.frames.resize(f, Frame::black(ref.width(), ref.height()));
    clips.push_back(std::move(clip));
  }
  return clips;
}

std::vector<Clip> partition_shot(std::span<const Frame> shot_frames, std::size_t f,
                                 std::size_t shot_index, std::size_t shot_start) {
  if (f == 0) fail(ErrorKind::argument, "clip length f must be >= 1");
  if (shot_frames.empty()) fail(ErrorKind::argument, "empty shot");
  auto layout = shot_clip_layout(std::vector<Shot>{{0, shot_frames.size()}}, f);
  auto clips = materialize(shot_frames, layout, f);
  for (auto& c : clips) {
    c.source_shot = shot_index;
    c.start_frame += shot_start;
  }
  return clips;
}

std::vector<Clip> build_clip_sequence(std::span<const Frame> frames, std::span<const Shot> shots,
                                      std::size_t f) {
  validate_partition(shots, frames.size());
  return materialize(frames, shot_clip_layout(shots, f), f);
}

std::vector<Clip> seq_partition(std::span<const Frame> frames, std::size_t f) {
  return materialize(frames, seq_clip_layout(frames.size(), f), f);
}

namespace {
std::size_t downsample_factor(int src_fps, int dst_fps) {
  if (src_fps <= 0 || dst_fps <= 0 || dst_fps > src_fps || src_fps % dst_fps != 0)
    fail(ErrorKind::argument, "cannot downsample " + std::to_string(src_fps) + " FPS to " +
                                  std::to_string(dst_fps) + " FPS (rates must divide)");
  return static_cast<std::size_t>(src_fps / dst_fps);
}
}  // namespace

std::vector<std::size_t> downsample_indices(std::size_t n_frames, int src_fps, int dst_fps) {
  const auto k = downsample_factor(src_fps, dst_fps);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n_frames; i += k) out.push_back(i);
  return out;
}

std::vector<Frame> downsample_fps(std::span<const Frame> frames, int src_fps, int dst_fps) {
  std::vector<Frame> out;
  for (auto i : downsample_indices(frames.size(), src_fps, dst_fps)) out.push_back(frames[i]);
  return out;
}

std::vector<Shot> downsample_shots(std::span<const Shot> shots, int src_fps, int dst_fps) {
  const auto k = downsample_factor(src_fps, dst_fps);
  auto kept_before = [k](std::size_t i) { return (i + k - 1) / k; };  // kept indices < i
  std::vector<Shot> out;
  for (const auto& s : shots) {
    Shot d{kept_before(s.start_frame), kept_before(s.end_frame)};
    if (d.length() > 0) out.push_back(d);
  }
  return out;
}

std::size_t select_keyframe(const Clip& clip, std::size_t bins) {
  const auto n = clip.content_count();
  if (clip.pad_count >= clip.frames.size() || n == 0)
    fail(ErrorKind::argument, "clip has no content frames");
  if (bins < 2) fail(ErrorKind::argument, "histogram needs at least 2 bins");
  // Integer bin counts keep the comparison exact, so equal distances tie
  // exactly and the lowest index wins. Frames of a clip share one size;
  // distance * n * pixels = sum |n * count_i - total|.
  const std::size_t k = 3 * bins;
  std::vector<std::vector<std::int64_t>> counts(n, std::vector<std::int64_t>(k, 0));
  std::vector<std::int64_t> total(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& frame = clip.frames[i];
    if (frame.empty()) fail(ErrorKind::dimension, "empty frame");
    if (frame.pixel_count() != clip.frames[0].pixel_count())
      fail(ErrorKind::dimension, "clip frames differ in size");
    const auto& rgb = frame.data();
    for (std::size_t p = 0; p < rgb.size(); p += 3)
      for (std::size_t ch = 0; ch < 3; ++ch) ++counts[i][ch * bins + rgb[p + ch] * bins / 256];
    for (std::size_t b = 0; b < k; ++b) total[b] += counts[i][b];
  }
  const auto scaled = static_cast<std::int64_t>(n);
  std::size_t best = 0;
  std::int64_t best_d = -1;
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t d = 0;
    for (std::size_t b = 0; b < k; ++b) d += std::abs(scaled * counts[i][b] - total[b]);
    if (best_d < 0 || d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace divita::seg
