#include "divita/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "divita/error.hpp"
#include "divita/feature_file.hpp"
#include "divita/frame.hpp"
#include "divita/manifest.hpp"
#include "divita/splitter.hpp"
#include "divita/table_files.hpp"
#include "file_util.hpp"

namespace divita::exp {

using nlohmann::ordered_json;

const char* to_string(Streams streams) { return streams == Streams::single ? "single" : "fusion"; }

Streams parse_streams(const std::string& text) {
  if (text == "single") return Streams::single;
  if (text == "fusion") return Streams::fusion;
  fail(ErrorKind::validation, "unknown streams '" + text + "' (expected single or fusion)");
}

const char* to_string(Source source) { return source == Source::layout_synth ? "layout-synth" : "manifest"; }

Source parse_source(const std::string& text) {
  if (text == "layout-synth") return Source::layout_synth;
  if (text == "manifest") return Source::manifest;
  fail(ErrorKind::validation, "unknown source '" + text + "' (expected layout-synth or manifest)");
}

void ExperimentSpec::validate() const {
  synth::parse_strategy(strategy);
  if (fps <= 0 || 24 % fps != 0) fail(ErrorKind::validation, "fps must divide 24, got " + std::to_string(fps));
  if (clips_per_snippet == 0) fail(ErrorKind::validation, "clips per snippet must be positive");
  if (folds.empty()) fail(ErrorKind::validation, "no folds selected");
  for (int k : folds)
    if (k < 1) fail(ErrorKind::validation, "fold ids start at 1");
  if (heads == 0 || blocks == 0) fail(ErrorKind::validation, "blocks and heads must be positive");
  if (dropout < 0 || dropout >= 1) fail(ErrorKind::validation, "dropout outside [0, 1)");
  if (source == Source::manifest) {
    if (manifest.empty()) fail(ErrorKind::configuration, "source 'manifest' needs --manifest");
    if (!std::filesystem::exists(manifest))
      fail(ErrorKind::configuration, "manifest not found: " + manifest.string());
    if (!manifest_b.empty() && !std::filesystem::exists(manifest_b))
      fail(ErrorKind::configuration, "second-stream manifest not found: " + manifest_b.string());
  } else {
    layout.validate();
  }
  if (!split_file.empty() && !std::filesystem::exists(split_file))
    fail(ErrorKind::configuration, "split file not found: " + split_file.string());
  if (!boundaries.empty() && !std::filesystem::exists(boundaries))
    fail(ErrorKind::configuration, "boundary file not found: " + boundaries.string());
  train.validate();
}

std::string spec_to_json(const ExperimentSpec& s) {
  ordered_json j;
  j["strategy"] = s.strategy;
  j["fps"] = s.fps;
  j["clips_per_snippet"] = s.clips_per_snippet;
  j["aggregator"] = agg::to_string(s.aggregator);
  j["streams"] = to_string(s.streams);
  j["seed"] = s.seed;
  j["folds"] = s.folds;
  j["model_width"] = s.model_width;
  j["blocks"] = s.blocks;
  j["heads"] = s.heads;
  j["dropout"] = s.dropout;
  j["positional"] = s.positional == agg::PositionalEncoding::sinusoidal ? "sinusoidal" : "none";
  j["gru_hidden"] = s.gru_hidden;
  j["conv_filters"] = s.conv_filters;
  ordered_json t;
  t["epochs"] = s.train.epochs;
  t["batch_size"] = s.train.batch_size;
  t["lr0"] = s.train.lr0;
  t["plateau_patience"] = s.train.plateau_patience;
  t["lr_factor"] = s.train.lr_factor;
  t["early_stop_patience"] = s.train.early_stop_patience;
  j["train"] = t;
  j["source"] = to_string(s.source);
  if (s.source == Source::layout_synth) {
    ordered_json l;
    l["n_trailers"] = s.layout.n_trailers;
    l["width"] = s.layout.width;
    l["shots"] = {s.layout.min_shots, s.layout.max_shots};
    l["shot_length_mean"] = s.layout.shot_length_mean;
    l["shot_length_std"] = s.layout.shot_length_std;
    l["signal_shot_fraction"] = s.layout.signal_shot_fraction;
    l["noise_sigma"] = s.layout.noise_sigma;
    l["prototype_seed"] = s.layout.prototype_seed;
    j["layout"] = l;
  } else {
    j["manifest"] = s.manifest.generic_string();
    if (!s.manifest_b.empty()) j["manifest_b"] = s.manifest_b.generic_string();
    if (!s.boundaries.empty()) j["boundaries"] = s.boundaries.generic_string();
    j["featurizer_width"] = s.featurizer_width;
    j["keyframes"] = s.keyframes;
  }
  if (!s.split_file.empty()) j["split_file"] = s.split_file.generic_string();
  j["shuffle_labels"] = s.shuffle_labels;
  return j.dump(2) + "\n";
}

std::size_t auto_model_width(std::size_t input_width, std::size_t heads) {
  if (input_width > 128) return 128;
  std::size_t d = (input_width / 2) / heads * heads;
  return std::max(d, heads);
}

agg::AggregatorConfig model_config(const ExperimentSpec& spec, std::size_t input_width, std::uint64_t init_seed) {
  agg::AggregatorConfig c;
  c.kind = spec.aggregator;
  c.input_width = input_width;
  c.model_width = spec.model_width ? spec.model_width : auto_model_width(input_width, spec.heads);
  c.blocks = spec.blocks;
  c.heads = spec.heads;
  c.dropout = spec.dropout;
  c.positional = spec.positional;
  c.gru_hidden = spec.gru_hidden;
  c.conv_filters = spec.conv_filters;
  c.init_seed = init_seed;
  c.validate();
  return c;
}

train::Dataset load_manifest_dataset(const std::filesystem::path& manifest, const synth::Strategy& strategy,
                                     int fps, const std::filesystem::path& boundaries,
                                     std::size_t featurizer_width, std::uint64_t featurizer_seed,
                                     bool keyframes) {
  const auto records = read_manifest(manifest);
  std::vector<BoundaryRow> rows;
  if (!boundaries.empty()) rows = read_boundary_file(boundaries);
  std::optional<synth::HistogramFeaturizer> featurizer;

  train::Dataset data;
  for (const auto& rec : records) {
    data.ids.push_back(rec.id);
    data.labels.push_back(rec.genres);
    if (rec.feature_path) {
      data.features.push_back(read_features(resolve_path(manifest, *rec.feature_path)));
      continue;
    }
    const double src = rec.fps;
    if (src != std::floor(src)) fail(ErrorKind::validation, "trailer '" + rec.id + "' has non-integral fps");
    const int src_fps = static_cast<int>(src);
    auto frames = read_ppm_stream(resolve_path(manifest, *rec.video_path));
    std::vector<seg::Shot> shots =
        rows.empty() ? seg::detect_shots(frames) : seg::import_boundaries(rows, rec.id, frames.size());
    auto reduced_frames = seg::downsample_fps(frames, src_fps, fps);
    auto reduced_shots = seg::downsample_shots(shots, src_fps, fps);
    auto clips = strategy.shot_aware ? seg::build_clip_sequence(reduced_frames, reduced_shots, strategy.f)
                                     : seg::seq_partition(reduced_frames, strategy.f);
    if (!featurizer) featurizer.emplace(featurizer_width, featurizer_seed, keyframes);
    data.features.push_back(
        featurizer->featurize_all(clips, keyframes ? "histogram-keyframe" : "histogram-clip"));
  }
  if (!data.features.empty()) {
    const auto b = data.features.front().width();
    for (std::size_t i = 0; i < data.features.size(); ++i)
      if (data.features[i].width() != b)
        fail(ErrorKind::validation, "trailer '" + data.ids[i] + "' has feature width " +
                                        std::to_string(data.features[i].width()) + ", expected " +
                                        std::to_string(b));
  }
  return data;
}

Streamed prepare_data(const ExperimentSpec& spec) {
  const auto strategy = synth::parse_strategy(spec.strategy);
  Streamed out;
  if (spec.source == Source::layout_synth) {
    Rng corpus_rng(derive_seed(spec.seed, "layout-corpus"));
    const auto corpus = synth::synth_layout_corpus(spec.layout, corpus_rng);
    const int n_streams = spec.streams == Streams::fusion ? 2 : 1;
    for (int s = 0; s < n_streams; ++s) {
      const auto protos = synth::prototype_matrix(spec.layout.width, spec.layout.prototype_seed + s);
      Rng noise(derive_seed(spec.seed, s ? "layout-noise-b" : "layout-noise-a"));
      train::Dataset d;
      for (const auto& t : corpus) {
        d.ids.push_back(t.id);
        d.labels.push_back(t.labels);
        d.features.push_back(
            synth::layout_features(t, strategy, spec.fps, protos, spec.layout.noise_sigma, noise));
      }
      if (s == 0)
        out.a = std::move(d);
      else
        out.b = std::move(d);
    }
  } else {
    out.a = load_manifest_dataset(spec.manifest, strategy, spec.fps, spec.boundaries, spec.featurizer_width,
                                  derive_seed(spec.seed, "featurizer-a"), spec.keyframes);
    if (spec.streams == Streams::fusion) {
      // Without a second manifest the second stream is the keyframe view of
      // the same videos.
      out.b = spec.manifest_b.empty()
                  ? load_manifest_dataset(spec.manifest, strategy, spec.fps, spec.boundaries,
                                          spec.featurizer_width, derive_seed(spec.seed, "featurizer-b"),
                                          !spec.keyframes)
                  : load_manifest_dataset(spec.manifest_b, strategy, spec.fps, spec.boundaries,
                                          spec.featurizer_width, derive_seed(spec.seed, "featurizer-b"),
                                          spec.keyframes);
      if (out.b->ids != out.a.ids) fail(ErrorKind::validation, "fusion streams list different trailers");
      for (std::size_t i = 0; i < out.a.size(); ++i)
        if (out.a.features[i].n_clips() != out.b->features[i].n_clips())
          fail(ErrorKind::validation, "fusion streams disagree on the clip count of '" + out.a.ids[i] + "'");
    }
  }
  if (spec.shuffle_labels) {
    Rng rng(derive_seed(spec.seed, "label-shuffle"));
    shuffle(std::span<GenreSet>(out.a.labels), rng);
    if (out.b) out.b->labels = out.a.labels;
  }
  return out;
}

std::vector<SplitAssignment> prepare_folds(const ExperimentSpec& spec, const train::Dataset& data) {
  std::vector<SplitAssignment> all;
  if (!spec.split_file.empty()) {
    all = read_split_file(spec.split_file);
  } else {
    const int n = *std::max_element(spec.folds.begin(), spec.folds.end());
    all = split::make_folds(data.ids, data.labels, derive_seed(spec.seed, "split"), static_cast<std::size_t>(n));
  }
  std::vector<SplitAssignment> chosen;
  for (int k : spec.folds) {
    auto it = std::find_if(all.begin(), all.end(), [k](const SplitAssignment& a) { return a.fold == k; });
    if (it == all.end()) fail(ErrorKind::configuration, "fold " + std::to_string(k) + " not in split file");
    chosen.push_back(*it);
  }
  return chosen;
}

metrics::PredictionSet predict_subset(const train::Dataset& data, const std::vector<std::string>& ids,
                                      const agg::AggregatorModel& model, std::size_t c) {
  metrics::PredictionSet out;
  for (auto i : data.indices_of(ids))
    out.items.push_back({data.ids[i], metrics::predict_trailer(data.features[i], model, c), data.labels[i]});
  return out;
}

metrics::PredictionSet predict_subset_fused(const train::Dataset& a, const agg::AggregatorModel& model_a,
                                            const train::Dataset& b, const agg::AggregatorModel& model_b,
                                            const std::vector<std::string>& ids, std::size_t c) {
  metrics::PredictionSet out;
  const auto ia = a.indices_of(ids);
  const auto ib = b.indices_of(ids);
  for (std::size_t k = 0; k < ia.size(); ++k)
    out.items.push_back({a.ids[ia[k]],
                         metrics::predict_trailer_fused(a.features[ia[k]], model_a, b.features[ib[k]], model_b, c),
                         a.labels[ia[k]]});
  return out;
}

std::string predictions_to_jsonl(const metrics::PredictionSet& predictions) {
  std::string out;
  for (const auto& p : predictions.items) {
    ordered_json j;
    j["id"] = p.id;
    j["probabilities"] = p.probabilities;
    j["genres"] = p.truth.names();
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

train::TrainConfig train_config(const ExperimentSpec& spec, std::uint64_t seed) {
  auto t = spec.train;
  t.clips_per_snippet = spec.clips_per_snippet;
  t.strategy = spec.strategy;
  t.seed = seed;
  return t;
}

train::FitResult train_stream(const ExperimentSpec& spec, const train::Dataset& data, const SplitAssignment& split,
                              const std::string& tag, std::optional<agg::AggregatorModel>& model) {
  const std::string prefix = "fold-" + std::to_string(split.fold) + "/";
  model.emplace(model_config(spec, data.features.front().width(), derive_seed(spec.seed, prefix + "init-" + tag)));
  const auto seed = derive_seed(spec.seed, prefix + "train-" + tag);
  Rng rng(seed);
  return train::fit(data, split, *model, train_config(spec, seed), rng);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto data = prepare_data(spec);
  const auto folds = prepare_folds(spec, data.a);
  const bool fusion = spec.streams == Streams::fusion;
  const auto& out = spec.out_dir;
  if (!out.empty()) {
    detail::write_text_file(out / "experiment.json", spec_to_json(spec));
    write_split_file(out / "splits.csv", folds);
  }

  ExperimentResult result;
  std::vector<metrics::PredictionSet> per_fold;
  for (const auto& split : folds) {
    FoldOutcome fo;
    fo.fold = split.fold;
    std::optional<agg::AggregatorModel> ma, mb;
    fo.fit_a = train_stream(spec, data.a, split, "a", ma);
    if (fusion) fo.fit_b = train_stream(spec, *data.b, split, "b", mb);
    const auto test_ids = split.ids_in(Subset::test);
    fo.test = fusion ? predict_subset_fused(data.a, *ma, *data.b, *mb, test_ids, spec.clips_per_snippet)
                     : predict_subset(data.a, test_ids, *ma, spec.clips_per_snippet);
    if (!out.empty()) {
      const auto dir = out / ("fold-" + std::to_string(split.fold));
      ma->save(dir / "model_a.dvtm");
      detail::write_text_file(dir / "train_log_a.jsonl", train::history_to_jsonl(fo.fit_a.history));
      if (fusion) {
        mb->save(dir / "model_b.dvtm");
        detail::write_text_file(dir / "train_log_b.jsonl", train::history_to_jsonl(fo.fit_b->history));
      }
      detail::write_text_file(dir / "predictions.jsonl", predictions_to_jsonl(fo.test));
    }
    per_fold.push_back(fo.test);
    result.folds.push_back(std::move(fo));
  }
  result.report = metrics::evaluate_folds(per_fold);
  if (!out.empty()) {
    detail::write_text_file(out / "report.json", metrics::report_to_json(result.report));
    const std::string title = spec.strategy + " " + to_string(spec.streams) + " c=" +
                              std::to_string(spec.clips_per_snippet) + " fps=" + std::to_string(spec.fps) + " " +
                              agg::to_string(spec.aggregator);
    detail::write_text_file(out / "report.txt", metrics::render_report(result.report, title));
  }
  return result;
}

std::string SweepRow::name() const {
  return spec.strategy + "_" + to_string(spec.streams) + "_c" + std::to_string(spec.clips_per_snippet) + "_fps" +
         std::to_string(spec.fps) + "_" + agg::to_string(spec.aggregator);
}

std::vector<SweepRow> run_sweep(const SweepSpec& sweep) {
  const auto& base = sweep.base;
  auto or_base = [](auto axis, auto value) {
    if (axis.empty()) axis.push_back(value);
    return axis;
  };
  const auto strategies = or_base(sweep.strategies, base.strategy);
  const auto streams = or_base(sweep.streams, base.streams);
  const auto clips = or_base(sweep.clips, base.clips_per_snippet);
  const auto fps = or_base(sweep.fps, base.fps);
  const auto aggregators = or_base(sweep.aggregators, base.aggregator);

  std::vector<SweepRow> rows;
  for (const auto& st : strategies)
    for (auto sm : streams)
      for (auto c : clips)
        for (auto f : fps)
          for (auto a : aggregators) {
            SweepRow row;
            row.spec = base;
            row.spec.strategy = st;
            row.spec.streams = sm;
            row.spec.clips_per_snippet = c;
            row.spec.fps = f;
            row.spec.aggregator = a;
            if (!base.out_dir.empty()) row.spec.out_dir = base.out_dir / row.name();
            row.report = run_experiment(row.spec).report;
            rows.push_back(std::move(row));
          }
  if (!base.out_dir.empty()) {
    detail::write_text_file(base.out_dir / "sweep.json", sweep_to_json(rows));
    detail::write_text_file(base.out_dir / "sweep.txt", render_sweep(rows));
  }
  return rows;
}

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json e;
    e["name"] = r.name();
    e["strategy"] = r.spec.strategy;
    e["streams"] = to_string(r.spec.streams);
    e["clips_per_snippet"] = r.spec.clips_per_snippet;
    e["fps"] = r.spec.fps;
    e["aggregator"] = agg::to_string(r.spec.aggregator);
    e["report"] = ordered_json::parse(metrics::report_to_json(r.report));
    j.push_back(e);
  }
  ordered_json top;
  top["rows"] = j;
  return top.dump(2) + "\n";
}

std::string render_sweep(const std::vector<SweepRow>& rows) {
  auto cell = [](const metrics::MetricSummary& m) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f\xC2\xB1%.2f", m.mean, m.std);
    return std::string(buf);
  };
  std::string out = "variant\tmuAP\tmAP\twAP\tsAP\n";
  for (const auto& r : rows)
    out += r.name() + "\t" + cell(r.report.micro_ap) + "\t" + cell(r.report.macro_ap) + "\t" +
           cell(r.report.weighted_ap) + "\t" + cell(r.report.sample_ap) + "\n";
  return out;
}

}  // namespace divita::exp
