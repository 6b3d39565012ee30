#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "divita/frame.hpp"
#include "divita/table_files.hpp"

namespace divita::seg {

struct Shot {
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;  // exclusive

  std::size_t length() const { return end_frame - start_frame; }
  friend bool operator==(const Shot&, const Shot&) = default;
};

// Index-level description of one clip: `length` real frames starting at
// `start_frame`, followed by `pad_count` black frames.
struct ClipSpan {
  std::size_t source_shot = 0;
  std::size_t start_frame = 0;
  std::size_t length = 0;
  std::size_t pad_count = 0;

  std::size_t end_frame() const { return start_frame + length; }
  friend bool operator==(const ClipSpan&, const ClipSpan&) = default;
};

struct Clip {
  std::size_t f = 0;
  std::vector<Frame> frames;
  std::size_t source_shot = 0;
  std::size_t start_frame = 0;
  std::size_t pad_count = 0;

  std::size_t content_count() const { return f - pad_count; }
};

struct DetectorConfig {
  std::size_t bins = 16;
  double cut_threshold = 0.4;          // L1 on normalized histograms, range [0, 2]
  double black_threshold = 20.0 / 255.0;  // mean luminance
  std::size_t min_shot_length = 6;

  void validate() const;
};

// Concatenated per-channel (R, G, B) histograms, each block summing to 1.
std::vector<double> frame_histogram(const Frame& frame, std::size_t bins);
double histogram_distance(std::span<const double> a, std::span<const double> b);

// Shots partition [0, frames.size()). Dark runs are absorbed into the
// boundary: they extend the shot that precedes them (or lead the first shot).
std::vector<Shot> detect_shots(std::span<const Frame> frames, const DetectorConfig& config = {});

// Shots of one trailer from a boundary file. Rows may come in any order but
// must tile [0, l) without gaps or overlaps; pass `expected_length` to also
// check the far end.
std::vector<Shot> import_boundaries(std::span<const BoundaryRow> rows, std::string_view trailer_id,
                                    std::size_t expected_length = 0);
std::vector<BoundaryRow> export_boundaries(std::span<const Shot> shots, std::string_view trailer_id);

// Throws validation error unless shots are ordered, disjoint and tile [0, total).
void validate_partition(std::span<const Shot> shots, std::size_t total);

// Shot-f layout: each shot cut into ceil(len/f) clips, the last one padded.
std::vector<ClipSpan> shot_clip_layout(std::span<const Shot> shots, std::size_t f);
// Seq-f layout: contiguous f-frame blocks over [0, n_frames) ignoring shots.
std::vector<ClipSpan> seq_clip_layout(std::size_t n_frames, std::size_t f);

std::vector<Clip> partition_shot(std::span<const Frame> shot_frames, std::size_t f,
                                 std::size_t shot_index = 0, std::size_t shot_start = 0);
std::vector<Clip> build_clip_sequence(std::span<const Frame> frames, std::span<const Shot> shots,
                                      std::size_t f);
std::vector<Clip> seq_partition(std::span<const Frame> frames, std::size_t f);
std::vector<Clip> materialize(std::span<const Frame> frames, std::span<const ClipSpan> layout,
                              std::size_t f);

// Indices kept when reducing src_fps to dst_fps: i with i mod (src/dst) == 0.
std::vector<std::size_t> downsample_indices(std::size_t n_frames, int src_fps, int dst_fps);
std::vector<Frame> downsample_fps(std::span<const Frame> frames, int src_fps, int dst_fps);
// Maps shots onto the downsampled timeline; shots left without frames vanish.
std::vector<Shot> downsample_shots(std::span<const Shot> shots, int src_fps, int dst_fps);

// Index of the non-pad frame closest (L1) to the clip's mean histogram;
// ties resolve to the lowest index.
std::size_t select_keyframe(const Clip& clip, std::size_t bins = 16);

}  // namespace divita::seg
