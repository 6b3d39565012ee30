#include "divita/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "divita/error.hpp"
#include "divita/feature_file.hpp"
#include "divita/manifest.hpp"

namespace divita::synth {

namespace {

std::size_t weighted_choice(Rng& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  // Rounding left u just past the end; take the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return 0;
}

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform_index(rng, hi - lo + 1));
}

std::uint8_t clamp_level(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

struct ShotLook {
  std::array<double, 3> base{};
  std::array<double, 3> gradient{};
  std::array<double, 3> drift{};
  std::vector<double> texture;  // one value in [-1, 1] per pixel
};

ShotLook draw_look(Rng& rng, std::size_t pixels, const ShotLook* previous) {
  ShotLook look;
  // Consecutive shots get clearly separated palettes so every hard cut is
  // visible to a histogram detector.
  for (int attempt = 0;; ++attempt) {
    for (auto& c : look.base) c = 70.0 + 120.0 * uniform01(rng);
    if (!previous || attempt > 64) break;
    double total = 0.0, largest = 0.0;
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const double d = std::abs(look.base[ch] - previous->base[ch]);
      total += d;
      largest = std::max(largest, d);
    }
    if (total >= 120.0 && largest >= 60.0) break;
  }
  for (auto& g : look.gradient) g = 24.0 * (2.0 * uniform01(rng) - 1.0);
  for (auto& d : look.drift) d = 0.3 * (2.0 * uniform01(rng) - 1.0);
  look.texture.resize(pixels);
  for (auto& t : look.texture) t = 2.0 * uniform01(rng) - 1.0;
  return look;
}

Frame render(const ShotLook& look, std::size_t w, std::size_t h, std::size_t t, double noise, Rng& rng) {
  std::vector<std::uint8_t> rgb(3 * w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      const double u = static_cast<double>(x) / static_cast<double>(w) - 0.5;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double v = look.base[ch] + look.drift[ch] * static_cast<double>(t) + look.gradient[ch] * u +
                         8.0 * look.texture[p] + noise * (2.0 * uniform01(rng) - 1.0);
        rgb[3 * p + ch] = clamp_level(v);
      }
    }
  }
  return Frame(w, h, std::move(rgb));
}

Frame scaled(const Frame& frame, double factor) {
  std::vector<std::uint8_t> rgb(frame.data().size());
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = clamp_level(factor * frame.data()[i]);
  return Frame(frame.width(), frame.height(), std::move(rgb));
}

}  // namespace

const char* to_string(Transition t) {
  switch (t) {
    case Transition::cut: return "cut";
    case Transition::fade: return "fade";
    case Transition::black_run: return "black-run";
  }
  return "?";
}

Transition parse_transition(const std::string& text) {
  if (text == "cut") return Transition::cut;
  if (text == "fade") return Transition::fade;
  if (text == "black-run") return Transition::black_run;
  fail(ErrorKind::validation, "unknown transition '" + text + "'");
}

void VideoSpec::validate() const {
  if (width == 0 || height == 0) fail(ErrorKind::validation, "video resolution must be positive");
  const std::size_t shots = shot_lengths.empty() ? n_shots : shot_lengths.size();
  if (shots == 0) fail(ErrorKind::validation, "video needs at least one shot");
  if (shot_lengths.empty() && (min_shot_length == 0 || min_shot_length > max_shot_length))
    fail(ErrorKind::validation, "invalid shot length range");
  for (auto len : shot_lengths)
    if (len == 0) fail(ErrorKind::validation, "shot lengths must be positive");
  if (!transitions.empty() && transitions.size() + 1 != shots)
    fail(ErrorKind::validation, "need one transition per shot gap");
  if (cut_weight < 0 || fade_weight < 0 || black_weight < 0 || cut_weight + fade_weight + black_weight <= 0)
    fail(ErrorKind::validation, "transition weights must be non-negative and not all zero");
  if (fade_length < 2 || fade_length % 2 != 0) fail(ErrorKind::validation, "fade length must be even and >= 2");
  if (black_length == 0) fail(ErrorKind::validation, "black run length must be positive");
  if (pixel_noise < 0) fail(ErrorKind::validation, "pixel noise must be non-negative");
}

SynthVideo synth_video(const VideoSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<std::size_t> lengths = spec.shot_lengths;
  if (lengths.empty())
    for (std::size_t i = 0; i < spec.n_shots; ++i)
      lengths.push_back(uniform_between(rng, spec.min_shot_length, spec.max_shot_length));
  std::vector<Transition> transitions = spec.transitions;
  if (transitions.empty())
    for (std::size_t i = 0; i + 1 < lengths.size(); ++i)
      transitions.push_back(static_cast<Transition>(
          weighted_choice(rng, {spec.cut_weight, spec.fade_weight, spec.black_weight})));

  const std::size_t w = spec.width, h = spec.height;
  SynthVideo out;
  out.transitions = transitions;
  std::vector<ShotLook> looks;
  for (std::size_t s = 0; s < lengths.size(); ++s)
    looks.push_back(draw_look(rng, w * h, s ? &looks.back() : nullptr));

  std::size_t shot_start = 0;
  std::vector<Frame> fade_in;  // frames that open the current shot
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    for (auto& f : fade_in) out.frames.push_back(std::move(f));
    fade_in.clear();
    Frame last;
    for (std::size_t t = 0; t < lengths[s]; ++t) {
      last = render(looks[s], w, h, t, spec.pixel_noise, rng);
      out.frames.push_back(last);
    }
    out.content_frames += lengths[s];
    if (s + 1 == lengths.size()) break;

    switch (transitions[s]) {
      case Transition::cut:
        out.hard_cuts.push_back(out.frames.size());
        break;
      case Transition::black_run: {
        const std::size_t begin = out.frames.size();
        for (std::size_t k = 0; k < spec.black_length; ++k) out.frames.push_back(Frame::black(w, h));
        out.transition_ranges.emplace_back(begin, out.frames.size());
        break;
      }
      case Transition::fade: {
        const std::size_t half = spec.fade_length / 2;
        const std::size_t begin = out.frames.size();
        for (std::size_t k = 0; k < half; ++k)
          out.frames.push_back(scaled(last, static_cast<double>(half - 1 - k) / static_cast<double>(half)));
        // The zero-factor frame of the fade-in stays with the outgoing shot,
        // so the boundary lands where the incoming picture first appears.
        out.frames.push_back(Frame::black(w, h));
        Frame first = render(looks[s + 1], w, h, 0, spec.pixel_noise, rng);
        for (std::size_t k = 1; k < half; ++k)
          fade_in.push_back(scaled(first, static_cast<double>(k) / static_cast<double>(half)));
        out.transition_ranges.emplace_back(begin, out.frames.size() + fade_in.size());
        break;
      }
    }
    out.shots.push_back({shot_start, out.frames.size()});
    shot_start = out.frames.size();
  }
  out.shots.push_back({shot_start, out.frames.size()});
  return out;
}

GenreSet sample_labels(Rng& rng) {
  // action adventure comedy crime drama fantasy horror romance sci-fi thriller
  static const std::vector<double> prevalence = {0.20, 0.12, 0.22, 0.11, 0.30,
                                                 0.07, 0.09, 0.11, 0.08, 0.20};
  static const std::vector<std::pair<std::size_t, std::size_t>> affinity = {
      {0, 1}, {0, 9}, {3, 9}, {4, 7}, {2, 7}, {1, 5}, {6, 9}, {0, 8}, {3, 4}, {4, 9}};
  static const std::vector<double> cardinality = {0.15, 0.35, 0.35, 0.15};

  const std::size_t k = 1 + weighted_choice(rng, cardinality);
  GenreSet labels;
  std::vector<double> weights = prevalence;
  for (std::size_t n = 0; n < k; ++n) {
    const std::size_t g = weighted_choice(rng, weights);
    labels.insert(g);
    weights[g] = 0.0;
    for (auto [a, b] : affinity) {
      if (a == g && weights[b] > 0) weights[b] *= 2.0;
      if (b == g && weights[a] > 0) weights[a] *= 2.0;
    }
  }
  return labels;
}

std::vector<double> prototype_matrix(std::size_t width, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "prototypes"));
  std::vector<double> p(width * kNumGenres);
  for (auto& v : p) v = standard_normal(rng);
  return p;
}

namespace {

// P*y scaled by `gain`, plus sigma * N(0, 1) noise, written into `row`.
void signal_row(std::span<float> row, const std::vector<double>& p, GenreSet labels, double gain,
                double sigma, Rng& rng) {
  const std::size_t width = row.size();
  for (std::size_t i = 0; i < width; ++i) {
    double v = 0.0;
    if (gain != 0.0)
      for (std::size_t g = 0; g < kNumGenres; ++g)
        if (labels.contains(g)) v += p[i * kNumGenres + g];
    row[i] = static_cast<float>(gain * v + sigma * standard_normal(rng));
  }
}

std::string trailer_id(std::size_t i) {
  std::string digits = std::to_string(i);
  return "synth-" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
}

}  // namespace

void FeatureSpec::validate() const {
  if (n_trailers == 0) fail(ErrorKind::validation, "n_trailers must be positive");
  if (width == 0) fail(ErrorKind::validation, "feature width must be positive");
  if (min_clips == 0 || min_clips > max_clips) fail(ErrorKind::validation, "invalid clip count range");
  if (signal_fraction < 0 || signal_fraction > 1) fail(ErrorKind::validation, "signal fraction outside [0, 1]");
  if (!(noise_sigma > 0)) fail(ErrorKind::validation, "noise sigma must be positive");
  if (streams == 0) fail(ErrorKind::validation, "need at least one stream");
}

SynthFeatures synth_features(const FeatureSpec& spec, Rng& rng) {
  spec.validate();
  SynthFeatures out;
  out.features.resize(spec.streams);
  std::vector<std::vector<double>> protos;
  for (std::size_t s = 0; s < spec.streams; ++s) protos.push_back(prototype_matrix(spec.width, spec.prototype_seed + s));

  for (std::size_t i = 0; i < spec.n_trailers; ++i) {
    TrailerRecord rec;
    rec.id = trailer_id(i);
    rec.genres = sample_labels(rng);
    const std::size_t n = uniform_between(rng, spec.min_clips, spec.max_clips);
    std::vector<bool> carries(n);
    for (std::size_t j = 0; j < n; ++j) carries[j] = uniform01(rng) < spec.signal_fraction;
    rec.duration_frames = n * 24;
    rec.feature_path = "features/" + rec.id + ".dvtf";
    for (std::size_t s = 0; s < spec.streams; ++s) {
      std::vector<float> values(n * spec.width);
      for (std::size_t j = 0; j < n; ++j)
        signal_row(std::span<float>(values.data() + j * spec.width, spec.width), protos[s], rec.genres,
                   carries[j] ? 1.0 : 0.0, spec.noise_sigma, rng);
      out.features[s].emplace_back(spec.backbone_id + (s ? "-s" + std::to_string(s) : ""), spec.width,
                                   std::move(values));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::filesystem::path> write_synth_features(const std::filesystem::path& dir,
                                                        const SynthFeatures& data) {
  std::vector<std::filesystem::path> manifests;
  for (std::size_t s = 0; s < data.features.size(); ++s) {
    const std::string suffix = s ? "_s" + std::to_string(s) : "";
    auto records = data.records;
    for (std::size_t i = 0; i < records.size(); ++i) {
      records[i].feature_path = "features" + suffix + "/" + records[i].id + ".dvtf";
      write_features(dir / *records[i].feature_path, data.features[s][i]);
    }
    manifests.push_back(dir / ("manifest" + suffix + ".jsonl"));
    write_manifest(manifests.back(), records);
  }
  return manifests;
}

void LayoutSpec::validate() const {
  if (n_trailers == 0 || width == 0) fail(ErrorKind::validation, "layout corpus needs trailers and width");
  if (min_shots == 0 || min_shots > max_shots) fail(ErrorKind::validation, "invalid shot count range");
  if (min_shot_length == 0 || min_shot_length > max_shot_length)
    fail(ErrorKind::validation, "invalid shot length range");
  if (signal_shot_fraction < 0 || signal_shot_fraction > 1)
    fail(ErrorKind::validation, "signal shot fraction outside [0, 1]");
  if (!(noise_sigma > 0)) fail(ErrorKind::validation, "noise sigma must be positive");
}

std::vector<LayoutTrailer> synth_layout_corpus(const LayoutSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<LayoutTrailer> out;
  for (std::size_t i = 0; i < spec.n_trailers; ++i) {
    LayoutTrailer t;
    t.id = trailer_id(i);
    t.labels = sample_labels(rng);
    const std::size_t n_shots = uniform_between(rng, spec.min_shots, spec.max_shots);
    std::size_t start = 0;
    for (std::size_t s = 0; s < n_shots; ++s) {
      const double raw = spec.shot_length_mean + spec.shot_length_std * standard_normal(rng);
      const auto len = static_cast<std::size_t>(std::clamp(
          std::lround(raw), static_cast<long>(spec.min_shot_length), static_cast<long>(spec.max_shot_length)));
      t.shots.push_back({start, start + len});
      t.signal.push_back(uniform01(rng) < spec.signal_shot_fraction);
      start += len;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string Strategy::name() const { return std::string(shot_aware ? "Shot-" : "Seq-") + std::to_string(f); }

Strategy parse_strategy(const std::string& text) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  Strategy s;
  std::string rest;
  if (lower.rfind("shot-", 0) == 0) {
    s.shot_aware = true;
    rest = lower.substr(5);
  } else if (lower.rfind("seq-", 0) == 0) {
    s.shot_aware = false;
    rest = lower.substr(4);
  } else {
    fail(ErrorKind::validation, "unknown strategy '" + text + "' (expected Seq-f or Shot-f)");
  }
  if (rest.empty() || !std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(c); }))
    fail(ErrorKind::validation, "strategy '" + text + "' has no frame count");
  s.f = std::stoul(rest);
  if (s.f == 0) fail(ErrorKind::validation, "strategy '" + text + "' has f = 0");
  return s;
}

std::vector<seg::ClipSpan> strategy_layout(const std::vector<seg::Shot>& shots, std::size_t n_frames,
                                           const Strategy& strategy, int fps) {
  auto reduced = seg::downsample_shots(shots, 24, fps);
  const std::size_t total = seg::downsample_indices(n_frames, 24, fps).size();
  return strategy.shot_aware ? seg::shot_clip_layout(reduced, strategy.f)
                             : seg::seq_clip_layout(total, strategy.f);
}

FeatureSequence layout_features(const LayoutTrailer& trailer, const Strategy& strategy, int fps,
                                const std::vector<double>& prototypes, double noise_sigma, Rng& rng,
                                const std::string& backbone_id) {
  const std::size_t width = prototypes.size() / kNumGenres;
  auto reduced = seg::downsample_shots(trailer.shots, 24, fps);
  // downsample_shots drops shots that lose every frame; keep signal flags aligned.
  std::vector<bool> signal;
  {
    const std::size_t step = static_cast<std::size_t>(24 / fps);
    for (std::size_t s = 0; s < trailer.shots.size(); ++s) {
      const auto first = (trailer.shots[s].start_frame + step - 1) / step;
      const auto last = (trailer.shots[s].end_frame + step - 1) / step;
      if (last > first) signal.push_back(trailer.signal[s]);
    }
  }
  const auto layout = strategy_layout(trailer.shots, trailer.n_frames(), strategy, fps);

  std::vector<float> values(layout.size() * width);
  for (std::size_t j = 0; j < layout.size(); ++j) {
    const auto& clip = layout[j];
    // Shot containing the clip's content, or none if it straddles a boundary.
    std::size_t owner = reduced.size();
    for (std::size_t s = 0; s < reduced.size(); ++s)
      if (reduced[s].start_frame <= clip.start_frame && clip.end_frame() <= reduced[s].end_frame) owner = s;
    double gain = 0.0;
    if (owner < reduced.size() && signal[owner])
      gain = static_cast<double>(clip.length) / static_cast<double>(strategy.f);
    signal_row(std::span<float>(values.data() + j * width, width), prototypes, trailer.labels, gain, noise_sigma,
               rng);
  }
  return FeatureSequence(backbone_id, width, std::move(values));
}

HistogramFeaturizer::HistogramFeaturizer(std::size_t width, std::uint64_t seed, bool keyframe_mode,
                                         std::size_t bins)
    : width_(width), bins_(bins), keyframe_mode_(keyframe_mode) {
  if (width == 0) fail(ErrorKind::validation, "featurizer width must be positive");
  Rng rng(derive_seed(seed, "histogram-featurizer"));
  projection_.resize(width * 3 * bins);
  const double scale = std::sqrt(static_cast<double>(3 * bins));
  for (auto& v : projection_) v = scale * standard_normal(rng);
}

std::vector<float> HistogramFeaturizer::featurize(const seg::Clip& clip) const {
  const std::size_t k = 3 * bins_;
  std::vector<double> h(k, 0.0);
  if (keyframe_mode_) {
    h = seg::frame_histogram(clip.frames[seg::select_keyframe(clip, bins_)], bins_);
  } else {
    // Pad frames are part of the clip the backbone sees.
    for (const auto& frame : clip.frames) {
      auto fh = seg::frame_histogram(frame, bins_);
      for (std::size_t i = 0; i < k; ++i) h[i] += fh[i];
    }
    for (auto& v : h) v /= static_cast<double>(clip.frames.size());
  }
  std::vector<float> out(width_);
  for (std::size_t r = 0; r < width_; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += projection_[r * k + i] * (h[i] - 1.0 / static_cast<double>(bins_));
    out[r] = static_cast<float>(acc);
  }
  return out;
}

FeatureSequence HistogramFeaturizer::featurize_all(const std::vector<seg::Clip>& clips,
                                                   const std::string& backbone_id) const {
  if (clips.empty()) fail(ErrorKind::validation, "no clips to featurize");
  std::vector<float> values;
  values.reserve(clips.size() * width_);
  for (const auto& c : clips) {
    auto row = featurize(c);
    values.insert(values.end(), row.begin(), row.end());
  }
  return FeatureSequence(backbone_id, width_, std::move(values));
}

}  // namespace divita::synth
