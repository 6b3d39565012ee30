#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "divita/aggregator.hpp"
#include "divita/metrics.hpp"
#include "divita/records.hpp"
#include "divita/segmenter.hpp"
#include "divita/synth.hpp"
#include "divita/trainer.hpp"

namespace divita::exp {

enum class Streams { single, fusion };

const char* to_string(Streams streams);
Streams parse_streams(const std::string& text);

// Where trailers come from. `layout_synth` generates a shot-structured corpus
// in memory from the experiment seed; `manifest` reads feature files, or
// raster videos that are segmented and featurized on the fly.
enum class Source { layout_synth, manifest };

const char* to_string(Source source);
Source parse_source(const std::string& text);

struct ExperimentSpec {
  std::string strategy = "Shot-24";
  int fps = 24;
  std::size_t clips_per_snippet = 30;
  agg::AggregatorKind aggregator = agg::AggregatorKind::transformer;
  Streams streams = Streams::single;
  std::uint64_t seed = 0;
  std::vector<int> folds = {1, 2, 3};

  std::size_t model_width = 0;  // 0: 128, or half the input width when that is smaller
  std::size_t blocks = 4;
  std::size_t heads = 4;
  double dropout = 0.1;
  agg::PositionalEncoding positional = agg::PositionalEncoding::sinusoidal;
  std::size_t gru_hidden = 115;
  std::size_t conv_filters = 128;
  train::TrainConfig train;  // strategy, seed and clips_per_snippet are taken from above

  Source source = Source::layout_synth;
  synth::LayoutSpec layout;
  std::filesystem::path manifest;
  std::filesystem::path manifest_b;   // second stream for fusion over feature files
  std::filesystem::path split_file;   // otherwise folds come from make_folds
  std::filesystem::path boundaries;   // ground-truth shots for video manifests
  std::size_t featurizer_width = 64;
  bool keyframes = false;
  bool shuffle_labels = false;        // chance-level control

  std::filesystem::path out_dir;      // empty: nothing is written

  void validate() const;
};

std::string spec_to_json(const ExperimentSpec& spec);

// Model width used when `model_width` is 0.
std::size_t auto_model_width(std::size_t input_width, std::size_t heads);
agg::AggregatorConfig model_config(const ExperimentSpec& spec, std::size_t input_width, std::uint64_t init_seed);

struct Streamed {
  train::Dataset a;
  std::optional<train::Dataset> b;
};

// Per-trailer clip features for the experiment's strategy and frame rate.
Streamed prepare_data(const ExperimentSpec& spec);

// Reads features or, for video records, segments and featurizes them.
train::Dataset load_manifest_dataset(const std::filesystem::path& manifest, const synth::Strategy& strategy,
                                     int fps, const std::filesystem::path& boundaries,
                                     std::size_t featurizer_width, std::uint64_t featurizer_seed,
                                     bool keyframes);

std::vector<SplitAssignment> prepare_folds(const ExperimentSpec& spec, const train::Dataset& data);

metrics::PredictionSet predict_subset(const train::Dataset& data, const std::vector<std::string>& ids,
                                      const agg::AggregatorModel& model, std::size_t c);
metrics::PredictionSet predict_subset_fused(const train::Dataset& a, const agg::AggregatorModel& model_a,
                                            const train::Dataset& b, const agg::AggregatorModel& model_b,
                                            const std::vector<std::string>& ids, std::size_t c);

std::string predictions_to_jsonl(const metrics::PredictionSet& predictions);

struct FoldOutcome {
  int fold = 1;
  train::FitResult fit_a;
  std::optional<train::FitResult> fit_b;
  metrics::PredictionSet test;
};

struct ExperimentResult {
  metrics::EvalReport report;
  std::vector<FoldOutcome> folds;
};

// Split, train every fold, predict the test subsets and aggregate. With an
// out_dir it writes experiment.json, splits.csv, report.json, report.txt and
// per fold fold-k/{model_a,model_b}.dvtm, train_log_{a,b}.jsonl and
// predictions.jsonl.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct SweepSpec {
  ExperimentSpec base;
  std::vector<std::string> strategies;
  std::vector<Streams> streams;
  std::vector<std::size_t> clips;
  std::vector<int> fps;
  std::vector<agg::AggregatorKind> aggregators;
};

struct SweepRow {
  ExperimentSpec spec;
  metrics::EvalReport report;
  std::string name() const;
};

// Cartesian product of the non-empty axes (empty axes keep the base value).
// Each variant writes into out_dir/<name>; sweep.json and sweep.txt summarize.
std::vector<SweepRow> run_sweep(const SweepSpec& sweep);

std::string sweep_to_json(const std::vector<SweepRow>& rows);
std::string render_sweep(const std::vector<SweepRow>& rows);

}  // namespace divita::exp
