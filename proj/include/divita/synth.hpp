#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "divita/frame.hpp"
#include "divita/genres.hpp"
#include "divita/random.hpp"
#include "divita/records.hpp"
#include "divita/segmenter.hpp"

namespace divita::synth {

enum class Transition { cut, fade, black_run };

const char* to_string(Transition t);
Transition parse_transition(const std::string& text);

struct VideoSpec {
  std::size_t width = 64;
  std::size_t height = 48;
  // Used verbatim when non-empty; otherwise n_shots lengths are drawn
  // uniformly from [min_shot_length, max_shot_length].
  std::vector<std::size_t> shot_lengths;
  std::size_t n_shots = 8;
  std::size_t min_shot_length = 12;
  std::size_t max_shot_length = 60;
  // Used verbatim when non-empty (one per shot gap); otherwise drawn with
  // the weights below.
  std::vector<Transition> transitions;
  double cut_weight = 0.6;
  double fade_weight = 0.2;
  double black_weight = 0.2;
  std::size_t fade_length = 6;   // even; half fades out, half fades in
  std::size_t black_length = 4;
  double pixel_noise = 3.0;      // uniform +- levels per pixel and frame

  void validate() const;
};

struct SynthVideo {
  std::vector<Frame> frames;
  // Ground truth in the detector's convention: transition frames up to the
  // end of the dark part belong to the preceding shot.
  std::vector<seg::Shot> shots;
  std::vector<Transition> transitions;
  std::vector<std::size_t> hard_cuts;  // first frame after each hard cut
  // Half-open frame ranges occupied by fades and black runs.
  std::vector<std::pair<std::size_t, std::size_t>> transition_ranges;
  std::size_t content_frames = 0;
};

SynthVideo synth_video(const VideoSpec& spec, Rng& rng);

// Trailer-like label sets: 1 to 4 genres with mean cardinality 2.5, drama
// the most frequent genre and a few preferred pairings.
GenreSet sample_labels(Rng& rng);

// Genre prototype matrix P, width x kNumGenres row-major, entries N(0, 1).
std::vector<double> prototype_matrix(std::size_t width, std::uint64_t seed);

struct FeatureSpec {
  std::size_t n_trailers = 600;
  std::size_t width = 64;
  std::size_t min_clips = 10;
  std::size_t max_clips = 40;
  double signal_fraction = 0.5;  // share of clips carrying P*y
  double noise_sigma = 1.0;
  std::uint64_t prototype_seed = 1;
  std::size_t streams = 1;       // stream k uses prototype seed + k
  std::string backbone_id = "synth";

  void validate() const;
};

struct SynthFeatures {
  std::vector<TrailerRecord> records;
  // streams x trailers; all streams share clip counts and labels.
  std::vector<std::vector<FeatureSequence>> features;
};

SynthFeatures synth_features(const FeatureSpec& spec, Rng& rng);

// Writes manifest.jsonl with features/<id>.dvtf, plus manifest_s<k>.jsonl
// and features_s<k>/ for every further stream. Returns the manifest paths.
std::vector<std::filesystem::path> write_synth_features(const std::filesystem::path& dir,
                                                        const SynthFeatures& data);

// Shot-structured corpus for strategy comparisons. Clip features are derived
// from where each clip falls: inside a signal shot it carries the genre
// signal scaled by its content share, anything straddling a shot boundary or
// inside a distractor shot is pure noise.
struct LayoutSpec {
  std::size_t n_trailers = 300;
  std::size_t width = 32;
  std::size_t min_shots = 16;
  std::size_t max_shots = 32;
  double shot_length_mean = 24.0;  // frames at 24 fps
  double shot_length_std = 6.0;
  std::size_t min_shot_length = 8;
  std::size_t max_shot_length = 60;
  double signal_shot_fraction = 0.5;
  double noise_sigma = 1.5;
  std::uint64_t prototype_seed = 1;

  void validate() const;
};

struct LayoutTrailer {
  std::string id;
  GenreSet labels;
  std::vector<seg::Shot> shots;  // 24 fps timeline
  std::vector<bool> signal;      // per shot
  std::size_t n_frames() const { return shots.empty() ? 0 : shots.back().end_frame; }
};

std::vector<LayoutTrailer> synth_layout_corpus(const LayoutSpec& spec, Rng& rng);

struct Strategy {
  bool shot_aware = true;
  std::size_t f = 24;
  std::string name() const;
};

// "Seq-24", "Shot-32", ...; shot and seq are matched case-insensitively.
Strategy parse_strategy(const std::string& text);

std::vector<seg::ClipSpan> strategy_layout(const std::vector<seg::Shot>& shots_24fps, std::size_t n_frames,
                                           const Strategy& strategy, int fps);

FeatureSequence layout_features(const LayoutTrailer& trailer, const Strategy& strategy, int fps,
                                const std::vector<double>& prototypes, double noise_sigma, Rng& rng,
                                const std::string& backbone_id = "synth-layout");

// Stand-in backbone for raster clips: a fixed seeded random projection of the
// clip's mean color histogram, or of its keyframe's histogram.
class HistogramFeaturizer {
 public:
  HistogramFeaturizer(std::size_t width, std::uint64_t seed, bool keyframe_mode = false,
                      std::size_t bins = 16);
  std::size_t width() const { return width_; }
  std::vector<float> featurize(const seg::Clip& clip) const;
  FeatureSequence featurize_all(const std::vector<seg::Clip>& clips, const std::string& backbone_id) const;

 private:
  std::size_t width_;
  std::size_t bins_;
  bool keyframe_mode_;
  std::vector<double> projection_;  // width x 3*bins
};

}  // namespace divita::synth
