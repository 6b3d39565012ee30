// Command-line front end. Every subcommand reads its flags from the command
// line or from a TOML/INI file given with --config (flags win).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "divita/aggregator.hpp"
#include "divita/error.hpp"
#include "divita/experiment.hpp"
#include "divita/frame.hpp"
#include "divita/manifest.hpp"
#include "divita/metrics.hpp"
#include "divita/segmenter.hpp"
#include "divita/splitter.hpp"
#include "divita/synth.hpp"
#include "divita/table_files.hpp"
#include "divita/trainer.hpp"

namespace fs = std::filesystem;
using namespace divita;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) fail(ErrorKind::io, "cannot write " + path.string());
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) fail(ErrorKind::io, "short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) fail(ErrorKind::io, "cannot read " + path.string());
  std::string out;
  char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

// String-typed view of ExperimentSpec for flag binding.
struct SpecFlags {
  exp::ExperimentSpec spec;
  std::string aggregator = "transformer";
  std::string streams = "single";
  std::string positional = "sinusoidal";
  std::string source = "layout-synth";
  std::string manifest, manifest_b, split_file, boundaries, out;

  void add_data(CLI::App* app) {
    app->add_option("--strategy", spec.strategy, "Seq-24, Seq-32, Shot-24 or Shot-32")->capture_default_str();
    app->add_option("--fps", spec.fps, "frame rate after downsampling (divides 24)")->capture_default_str();
    app->add_option("--seed", spec.seed, "root seed")->capture_default_str();
    app->add_option("--boundaries", boundaries, "ground-truth boundary CSV for video manifests");
    app->add_option("--featurizer-width", spec.featurizer_width, "width of histogram features for videos")
        ->capture_default_str();
    app->add_flag("--keyframes", spec.keyframes, "featurize video clips from their keyframe");
  }

  void add_model(CLI::App* app) {
    app->add_option("--aggregator", aggregator, "transformer, gru or conv")->capture_default_str();
    app->add_option("--model-width", spec.model_width, "d; 0 picks 128 or b/2")->capture_default_str();
    app->add_option("--blocks", spec.blocks)->capture_default_str();
    app->add_option("--heads", spec.heads)->capture_default_str();
    app->add_option("--dropout", spec.dropout)->capture_default_str();
    app->add_option("--positional", positional, "sinusoidal or none")->capture_default_str();
    app->add_option("--gru-hidden", spec.gru_hidden)->capture_default_str();
    app->add_option("--conv-filters", spec.conv_filters)->capture_default_str();
  }

  void add_training(CLI::App* app) {
    app->add_option("--clips", spec.clips_per_snippet, "clips per snippet")->capture_default_str();
    app->add_option("--epochs", spec.train.epochs)->capture_default_str();
    app->add_option("--batch-size", spec.train.batch_size)->capture_default_str();
    app->add_option("--lr", spec.train.lr0, "initial learning rate")->capture_default_str();
    app->add_option("--plateau-patience", spec.train.plateau_patience)->capture_default_str();
    app->add_option("--lr-factor", spec.train.lr_factor)->capture_default_str();
    app->add_option("--early-stop", spec.train.early_stop_patience)->capture_default_str();
  }

  void add_experiment(CLI::App* app) {
    add_data(app);
    add_model(app);
    add_training(app);
    app->add_option("--streams", streams, "single or fusion")->capture_default_str();
    app->add_option("--folds", spec.folds, "fold ids")->delimiter(',')->capture_default_str();
    app->add_option("--source", source, "layout-synth or manifest")->capture_default_str();
    app->add_option("--manifest", manifest);
    app->add_option("--manifest-b", manifest_b, "second-stream manifest for fusion");
    app->add_option("--split", split_file, "split CSV; default is make_folds on the seed");
    app->add_flag("--shuffle-labels", spec.shuffle_labels, "permute labels across trailers");
    app->add_option("--trailers", spec.layout.n_trailers, "layout-synth corpus size")->capture_default_str();
    app->add_option("--width", spec.layout.width, "layout-synth feature width")->capture_default_str();
    app->add_option("--sigma", spec.layout.noise_sigma, "layout-synth noise")->capture_default_str();
    app->add_option("--signal-shots", spec.layout.signal_shot_fraction, "layout-synth signal share")
        ->capture_default_str();
    app->add_option("--prototype-seed", spec.layout.prototype_seed)->capture_default_str();
    app->add_option("--out", out, "output directory")->required();
  }

  exp::ExperimentSpec resolve() const {
    auto s = spec;
    s.aggregator = agg::parse_aggregator_kind(aggregator);
    s.streams = exp::parse_streams(streams);
    if (positional == "sinusoidal")
      s.positional = agg::PositionalEncoding::sinusoidal;
    else if (positional == "none")
      s.positional = agg::PositionalEncoding::none;
    else
      fail(ErrorKind::validation, "unknown positional encoding '" + positional + "'");
    s.source = exp::parse_source(source);
    s.manifest = manifest;
    s.manifest_b = manifest_b;
    s.split_file = split_file;
    s.boundaries = boundaries;
    s.out_dir = out;
    return s;
  }
};

SplitAssignment load_fold(const std::string& path, int fold) {
  for (auto& a : read_split_file(path))
    if (a.fold == fold) return a;
  fail(ErrorKind::configuration, "fold " + std::to_string(fold) + " not in " + path);
}

train::Dataset load_dataset(const exp::ExperimentSpec& s, const fs::path& manifest, const char* tag, bool keyframes) {
  if (manifest.empty()) fail(ErrorKind::configuration, "missing --manifest");
  if (!fs::exists(manifest)) fail(ErrorKind::configuration, "manifest not found: " + manifest.string());
  return exp::load_manifest_dataset(manifest, synth::parse_strategy(s.strategy), s.fps, s.boundaries,
                                    s.featurizer_width, derive_seed(s.seed, std::string("featurizer-") + tag),
                                    keyframes);
}

void write_eval_outputs(const fs::path& out, const metrics::PredictionSet& preds, const std::string& title) {
  preds.validate();
  auto report = metrics::evaluate_folds({preds});
  write_text(out / "report.json", metrics::report_to_json(report));
  write_text(out / "report.txt", metrics::render_report(report, title));
  write_text(out / "predictions.jsonl", exp::predictions_to_jsonl(preds));
  std::vector<double> scores;
  std::vector<int> labels;
  metrics::flatten(preds, scores, labels);
  write_text(out / "pr_curve.csv", metrics::pr_curve_csv(metrics::pr_curve(scores, labels)));
  std::cout << metrics::render_report(report, title);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Movie-trailer genre classification from clip snippets"};
  app.set_config("--config", "", "TOML/INI file supplying any flag");
  app.require_subcommand(1);

  // synth video
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic data");
  synth_cmd->require_subcommand(1);
  auto* sv = synth_cmd->add_subcommand("video", "raster trailers with planted shots");
  synth::VideoSpec vspec;
  std::size_t n_videos = 10;
  std::uint64_t video_seed = 0;
  std::string video_out;
  std::vector<std::size_t> shot_lengths;
  std::vector<std::string> transition_names;
  sv->add_option("--out", video_out, "output directory")->required();
  sv->add_option("--videos", n_videos)->capture_default_str();
  sv->add_option("--seed", video_seed)->capture_default_str();
  sv->add_option("--width", vspec.width)->capture_default_str();
  sv->add_option("--height", vspec.height)->capture_default_str();
  sv->add_option("--shots", vspec.n_shots)->capture_default_str();
  sv->add_option("--shot-lengths", shot_lengths, "fixed shot lengths")->delimiter(',');
  sv->add_option("--transitions", transition_names, "cut, fade or black-run per gap")->delimiter(',');
  sv->add_option("--min-shot", vspec.min_shot_length)->capture_default_str();
  sv->add_option("--max-shot", vspec.max_shot_length)->capture_default_str();
  sv->add_option("--cut-weight", vspec.cut_weight)->capture_default_str();
  sv->add_option("--fade-weight", vspec.fade_weight)->capture_default_str();
  sv->add_option("--black-weight", vspec.black_weight)->capture_default_str();
  sv->add_option("--fade-length", vspec.fade_length)->capture_default_str();
  sv->add_option("--black-length", vspec.black_length)->capture_default_str();
  sv->add_option("--noise", vspec.pixel_noise, "pixel noise amplitude")->capture_default_str();

  // synth features
  auto* sf = synth_cmd->add_subcommand("features", "clip feature files with a planted genre signal");
  synth::FeatureSpec fspec;
  std::uint64_t feature_seed = 0;
  std::string feature_out;
  sf->add_option("--out", feature_out, "output directory")->required();
  sf->add_option("--seed", feature_seed)->capture_default_str();
  sf->add_option("--trailers", fspec.n_trailers)->capture_default_str();
  sf->add_option("--width", fspec.width, "b")->capture_default_str();
  sf->add_option("--min-clips", fspec.min_clips)->capture_default_str();
  sf->add_option("--max-clips", fspec.max_clips)->capture_default_str();
  sf->add_option("--signal-fraction", fspec.signal_fraction)->capture_default_str();
  sf->add_option("--sigma", fspec.noise_sigma)->capture_default_str();
  sf->add_option("--prototype-seed", fspec.prototype_seed)->capture_default_str();
  sf->add_option("--streams", fspec.streams, "number of feature streams")->capture_default_str();

  // segment
  auto* seg_cmd = app.add_subcommand("segment", "detect shots in video manifests");
  seg::DetectorConfig det;
  std::string seg_manifest, seg_out;
  seg_cmd->add_option("--manifest", seg_manifest)->required();
  seg_cmd->add_option("--out", seg_out, "boundary CSV")->required();
  seg_cmd->add_option("--bins", det.bins)->capture_default_str();
  seg_cmd->add_option("--threshold", det.cut_threshold)->capture_default_str();
  seg_cmd->add_option("--black-threshold", det.black_threshold)->capture_default_str();
  seg_cmd->add_option("--min-shot", det.min_shot_length)->capture_default_str();

  // split
  auto* split_cmd = app.add_subcommand("split", "stratified train/val/test folds");
  std::string split_manifest, split_out;
  std::size_t n_folds = 3;
  std::uint64_t split_seed = 0;
  split::Ratios ratios;
  split_cmd->add_option("--manifest", split_manifest)->required();
  split_cmd->add_option("--out", split_out, "split CSV")->required();
  split_cmd->add_option("--folds", n_folds)->capture_default_str();
  split_cmd->add_option("--seed", split_seed, "root seed; fold k uses derive(seed, split) then fold-k")
      ->capture_default_str();
  split_cmd->add_option("--train", ratios.train)->capture_default_str();
  split_cmd->add_option("--val", ratios.val)->capture_default_str();
  split_cmd->add_option("--test", ratios.test)->capture_default_str();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "label statistics of a manifest");
  std::string stats_manifest, stats_out;
  stats_cmd->add_option("--manifest", stats_manifest)->required();
  stats_cmd->add_option("--out", stats_out, "output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train one stream on one fold");
  SpecFlags train_flags;
  std::string train_manifest, train_split, train_out;
  int train_fold = 1;
  std::string train_stream = "a";
  train_flags.add_data(train_cmd);
  train_flags.add_model(train_cmd);
  train_flags.add_training(train_cmd);
  train_cmd->add_option("--manifest", train_manifest)->required();
  train_cmd->add_option("--split", train_split)->required();
  train_cmd->add_option("--fold", train_fold)->capture_default_str();
  train_cmd->add_option("--stream", train_stream, "seed tag, a or b")->capture_default_str();
  train_cmd->add_option("--out", train_out, "output directory")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a subset");
  SpecFlags eval_flags;
  std::string eval_manifest, eval_split, eval_ckpt, eval_out, eval_subset = "test";
  int eval_fold = 1;
  eval_flags.add_data(eval_cmd);
  eval_cmd->add_option("--clips", eval_flags.spec.clips_per_snippet, "clips per snippet")->capture_default_str();
  eval_cmd->add_option("--manifest", eval_manifest)->required();
  eval_cmd->add_option("--split", eval_split)->required();
  eval_cmd->add_option("--fold", eval_fold)->capture_default_str();
  eval_cmd->add_option("--subset", eval_subset)->capture_default_str();
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--out", eval_out, "output directory")->required();

  // fuse-eval
  auto* fuse_cmd = app.add_subcommand("fuse-eval", "evaluate two streams with late fusion");
  SpecFlags fuse_flags;
  std::string fuse_manifest, fuse_manifest_b, fuse_split, fuse_ckpt, fuse_ckpt_b, fuse_out, fuse_subset = "test";
  int fuse_fold = 1;
  fuse_flags.add_data(fuse_cmd);
  fuse_cmd->add_option("--clips", fuse_flags.spec.clips_per_snippet, "clips per snippet")->capture_default_str();
  fuse_cmd->add_option("--manifest", fuse_manifest)->required();
  fuse_cmd->add_option("--manifest-b", fuse_manifest_b, "second stream; default is the keyframe view");
  fuse_cmd->add_option("--split", fuse_split)->required();
  fuse_cmd->add_option("--fold", fuse_fold)->capture_default_str();
  fuse_cmd->add_option("--subset", fuse_subset)->capture_default_str();
  fuse_cmd->add_option("--checkpoint", fuse_ckpt)->required();
  fuse_cmd->add_option("--checkpoint-b", fuse_ckpt_b)->required();
  fuse_cmd->add_option("--out", fuse_out, "output directory")->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run experiments over a grid of settings");
  SpecFlags sweep_flags;
  std::vector<std::string> sweep_strategies, sweep_streams, sweep_aggs;
  std::vector<std::size_t> sweep_clips;
  std::vector<int> sweep_fps;
  sweep_flags.add_experiment(sweep_cmd);
  sweep_cmd->add_option("--strategies", sweep_strategies)->delimiter(',');
  sweep_cmd->add_option("--streams-list", sweep_streams)->delimiter(',');
  sweep_cmd->add_option("--clips-list", sweep_clips)->delimiter(',');
  sweep_cmd->add_option("--fps-list", sweep_fps)->delimiter(',');
  sweep_cmd->add_option("--aggregators", sweep_aggs)->delimiter(',');

  // report
  auto* report_cmd = app.add_subcommand("report", "render report.json or sweep.json files as tables");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report_cmd->add_option("inputs", report_inputs)->required();
  report_cmd->add_option("--out", report_out, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sv) {
      vspec.shot_lengths = shot_lengths;
      for (const auto& t : transition_names) vspec.transitions.push_back(synth::parse_transition(t));
      vspec.validate();
      if (n_videos == 0) fail(ErrorKind::validation, "--videos must be positive");
      const fs::path out = video_out;
      std::vector<TrailerRecord> records;
      std::vector<BoundaryRow> rows;
      std::string cuts = "trailer_id,frame\n";
      for (std::size_t i = 0; i < n_videos; ++i) {
        const std::string id = "video-" + std::to_string(i);
        Rng rng(derive_seed(video_seed, "synth-video/" + id));
        auto video = synth::synth_video(vspec, rng);
        TrailerRecord rec;
        rec.id = id;
        rec.genres = synth::sample_labels(rng);
        rec.video_path = "videos/" + id + ".ppm";
        rec.fps = 24;
        rec.duration_frames = video.frames.size();
        write_ppm_stream(out / *rec.video_path, video.frames);
        auto b = seg::export_boundaries(video.shots, id);
        rows.insert(rows.end(), b.begin(), b.end());
        for (auto c : video.hard_cuts) cuts += id + "," + std::to_string(c) + "\n";
        records.push_back(std::move(rec));
      }
      write_manifest(out / "manifest.jsonl", records);
      write_boundary_file(out / "boundaries.csv", rows);
      write_text(out / "hard_cuts.csv", cuts);
      std::cout << "wrote " << n_videos << " videos to " << out.string() << "\n";
    } else if (*sf) {
      Rng rng(derive_seed(feature_seed, "synth-features"));
      auto data = synth::synth_features(fspec, rng);
      auto manifests = synth::write_synth_features(feature_out, data);
      for (const auto& m : manifests) std::cout << "wrote " << m.string() << "\n";
    } else if (*seg_cmd) {
      det.validate();
      const fs::path manifest = seg_manifest;
      std::vector<BoundaryRow> rows;
      for (const auto& rec : read_manifest(manifest)) {
        if (!rec.video_path) fail(ErrorKind::validation, "trailer '" + rec.id + "' has no video_path");
        auto frames = read_ppm_stream(resolve_path(manifest, *rec.video_path));
        auto shots = seg::detect_shots(frames, det);
        auto b = seg::export_boundaries(shots, rec.id);
        rows.insert(rows.end(), b.begin(), b.end());
      }
      write_boundary_file(seg_out, rows);
      std::cout << "wrote " << rows.size() << " shots to " << seg_out << "\n";
    } else if (*split_cmd) {
      auto records = read_manifest(split_manifest);
      std::vector<std::string> ids;
      std::vector<GenreSet> labels;
      for (const auto& r : records) {
        ids.push_back(r.id);
        labels.push_back(r.genres);
      }
      auto folds = split::make_folds(ids, labels, derive_seed(split_seed, "split"), n_folds, ratios);
      write_split_file(split_out, folds);
      for (const auto& f : folds)
        std::cout << "fold " << f.fold << ": " << f.count(Subset::train) << " train, " << f.count(Subset::val)
                  << " val, " << f.count(Subset::test) << " test\n";
    } else if (*stats_cmd) {
      std::vector<GenreSet> labels;
      for (const auto& r : read_manifest(stats_manifest)) labels.push_back(r.genres);
      auto stats = split::genre_stats(labels);
      const fs::path out = stats_out;
      write_text(out / "stats.json", split::stats_to_json(stats));
      write_text(out / "cooccurrence.csv", split::cooccurrence_csv(stats));
      std::printf("examples %zu, label cardinality %.4f, density %.4f\n", stats.examples, stats.cardinality,
                  stats.density);
    } else if (*train_cmd) {
      auto s = train_flags.resolve();
      s.clips_per_snippet = train_flags.spec.clips_per_snippet;
      const auto data = load_dataset(s, train_manifest, train_stream == "b" ? "b" : "a", s.keyframes);
      const auto split = load_fold(train_split, train_fold);
      const std::string prefix = "fold-" + std::to_string(train_fold) + "/";
      agg::AggregatorModel model(exp::model_config(
          s, data.features.front().width(), derive_seed(s.seed, prefix + "init-" + train_stream)));
      auto tc = s.train;
      tc.clips_per_snippet = s.clips_per_snippet;
      tc.strategy = s.strategy;
      tc.seed = derive_seed(s.seed, prefix + "train-" + train_stream);
      Rng rng(tc.seed);
      auto fit = train::fit(data, split, model, tc, rng, [](const train::EpochRecord& r) {
        std::printf("epoch %zu lr %.2e train %.5f val %.5f muAP %.4f\n", r.epoch, r.lr, r.train_loss, r.val_loss,
                    r.val_micro_ap);
      });
      const fs::path out = train_out;
      model.save(out / "model.dvtm");
      write_text(out / "train_log.jsonl", train::history_to_jsonl(fit.history));
      std::printf("best epoch %zu, val loss %.6f%s\n", fit.best_epoch, fit.best_val_loss,
                  fit.early_stopped ? " (early stop)" : "");
    } else if (*eval_cmd) {
      auto s = eval_flags.resolve();
      const auto model = agg::AggregatorModel::load(eval_ckpt);
      const auto data = load_dataset(s, eval_manifest, "a", s.keyframes);
      const auto split = load_fold(eval_split, eval_fold);
      auto preds = exp::predict_subset(data, split.ids_in(parse_subset(eval_subset)), model, s.clips_per_snippet);
      write_eval_outputs(eval_out, preds, "fold " + std::to_string(eval_fold) + " " + eval_subset);
    } else if (*fuse_cmd) {
      auto s = fuse_flags.resolve();
      const auto ma = agg::AggregatorModel::load(fuse_ckpt);
      const auto mb = agg::AggregatorModel::load(fuse_ckpt_b);
      const auto a = load_dataset(s, fuse_manifest, "a", s.keyframes);
      const auto b = fuse_manifest_b.empty() ? load_dataset(s, fuse_manifest, "b", !s.keyframes)
                                             : load_dataset(s, fuse_manifest_b, "b", s.keyframes);
      const auto split = load_fold(fuse_split, fuse_fold);
      auto preds = exp::predict_subset_fused(a, ma, b, mb, split.ids_in(parse_subset(fuse_subset)), s.clips_per_snippet);
      write_eval_outputs(fuse_out, preds, "fusion, fold " + std::to_string(fuse_fold) + " " + fuse_subset);
    } else if (*sweep_cmd) {
      exp::SweepSpec sweep;
      sweep.base = sweep_flags.resolve();
      sweep.strategies = sweep_strategies;
      for (const auto& s : sweep_streams) sweep.streams.push_back(exp::parse_streams(s));
      sweep.clips = sweep_clips;
      sweep.fps = sweep_fps;
      for (const auto& a : sweep_aggs) sweep.aggregators.push_back(agg::parse_aggregator_kind(a));
      auto rows = exp::run_sweep(sweep);
      std::cout << exp::render_sweep(rows);
    } else if (*report_cmd) {
      std::string table;
      for (const auto& in : report_inputs) {
        const auto text = read_text(in);
        const auto j = nlohmann::json::parse(text);
        if (j.contains("rows")) {
          std::vector<exp::SweepRow> rows;
          for (const auto& r : j.at("rows")) {
            exp::SweepRow row;
            row.spec.strategy = r.at("strategy").get<std::string>();
            row.spec.streams = exp::parse_streams(r.at("streams").get<std::string>());
            row.spec.clips_per_snippet = r.at("clips_per_snippet").get<std::size_t>();
            row.spec.fps = r.at("fps").get<int>();
            row.spec.aggregator = agg::parse_aggregator_kind(r.at("aggregator").get<std::string>());
            row.report = metrics::report_from_json(r.at("report").dump());
            rows.push_back(std::move(row));
          }
          table += exp::render_sweep(rows);
        } else {
          table += metrics::render_report(metrics::report_from_json(text), in);
        }
      }
      if (report_out.empty())
        std::cout << table;
      else
        write_text(report_out, table);
    }
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
