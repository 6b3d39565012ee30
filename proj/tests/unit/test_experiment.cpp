#include <doctest.h>

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "divita/experiment.hpp"
#include "support.hpp"

using namespace divita;
using namespace divita::exp;
using testing::thrown_kind;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ExperimentSpec tiny(const std::filesystem::path& out) {
  ExperimentSpec s;
  s.seed = 4;
  s.clips_per_snippet = 4;
  s.blocks = 1;
  s.heads = 2;
  s.dropout = 0.0;
  s.train.epochs = 2;
  s.train.batch_size = 8;
  s.train.lr0 = 1e-3;
  s.layout.n_trailers = 45;
  s.layout.width = 12;
  s.layout.min_shots = 4;
  s.layout.max_shots = 6;
  s.out_dir = out;
  return s;
}

// Tiny folds routinely miss a genre; the exclusion warnings are expected here.
struct QuietWarnings {
  QuietWarnings() { set_warning_sink([](const std::string&) {}); }
  ~QuietWarnings() { set_warning_sink({}); }
};

}  // namespace

TEST_CASE("automatic model width") {
  CHECK(auto_model_width(768, 4) == 128);
  CHECK(auto_model_width(256, 4) == 128);
  CHECK(auto_model_width(128, 4) == 64);
  CHECK(auto_model_width(64, 4) == 32);
  CHECK(auto_model_width(16, 4) == 8);
  CHECK(auto_model_width(6, 4) == 4);
  for (std::size_t b : {8u, 30u, 64u, 200u, 2048u}) {
    const auto d = auto_model_width(b, 4);
    CHECK(d < b);
    CHECK(d % 4 == 0);
  }
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec s;
  s.fps = 5;
  CHECK(thrown_kind([&] { s.validate(); }) == ErrorKind::validation);
  s = ExperimentSpec{};
  s.source = Source::manifest;
  CHECK(thrown_kind([&] { s.validate(); }) == ErrorKind::configuration);
  s.manifest = "/nonexistent/manifest.jsonl";
  try {
    s.validate();
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
    CHECK(std::string(e.what()).find("/nonexistent/manifest.jsonl") != std::string::npos);
  }
  s = ExperimentSpec{};
  s.split_file = "/nonexistent/splits.csv";
  CHECK(thrown_kind([&] { run_experiment(s); }) == ErrorKind::configuration);
  CHECK(parse_streams("fusion") == Streams::fusion);
  CHECK(parse_source("manifest") == Source::manifest);
}

TEST_CASE("run_experiment writes a three-fold report and is reproducible") {
  QuietWarnings quiet;
  auto dir_a = testing::scratch_dir("exp-a"), dir_b = testing::scratch_dir("exp-b");
  auto a = run_experiment(tiny(dir_a));
  auto b = run_experiment(tiny(dir_b));
  CHECK(a.report == b.report);
  CHECK(a.report.folds() == 3);
  REQUIRE(a.folds.size() == 3);
  for (const auto& f : a.folds) {
    CHECK(f.fit_a.history.size() == 2);
    CHECK_FALSE(f.fit_b.has_value());
  }

  auto report = nlohmann::json::parse(slurp(dir_a / "report.json"));
  for (const char* metric : {"micro_ap", "macro_ap", "weighted_ap", "sample_ap"}) {
    REQUIRE(report["metrics"].contains(metric));
    CHECK(report["metrics"][metric].contains("mean"));
    CHECK(report["metrics"][metric].contains("std"));
    CHECK(report["metrics"][metric]["per_fold"].size() == 3);
  }
  CHECK(report["folds"] == 3);
  CHECK(metrics::report_from_json(slurp(dir_a / "report.json")) == a.report);

  for (const char* rel : {"experiment.json", "splits.csv", "report.json", "report.txt", "fold-1/model_a.dvtm",
                          "fold-1/model_a.json", "fold-2/train_log_a.jsonl", "fold-3/predictions.jsonl"}) {
    CAPTURE(rel);
    REQUIRE(std::filesystem::exists(dir_a / rel));
    CHECK(slurp(dir_a / rel) == slurp(dir_b / rel));
  }
  CHECK_FALSE(std::filesystem::exists(dir_a / "fold-1/model_b.dvtm"));
  auto model = agg::AggregatorModel::load(dir_a / "fold-1/model_a.dvtm");
  CHECK(model.config().input_width == 12);
  CHECK(model.config().model_width == 6);
}

TEST_CASE("seed changes the outcome") {
  QuietWarnings quiet;
  auto s = tiny({});
  auto a = run_experiment(s);
  s.seed = 5;
  auto b = run_experiment(s);
  CHECK_FALSE(a.report == b.report);
}

TEST_CASE("fusion of two streams trains two models per fold") {
  QuietWarnings quiet;
  auto dir = testing::scratch_dir("exp-fusion");
  auto s = tiny(dir);
  s.streams = Streams::fusion;
  s.folds = {2};
  auto r = run_experiment(s);
  REQUIRE(r.folds.size() == 1);
  CHECK(r.folds[0].fold == 2);
  CHECK(r.folds[0].fit_b.has_value());
  CHECK(std::filesystem::exists(dir / "fold-2/model_b.dvtm"));
  CHECK(std::filesystem::exists(dir / "fold-2/train_log_b.jsonl"));
  CHECK(r.report.folds() == 1);
}

TEST_CASE("fused prediction of one stream with itself equals the single stream") {
  auto s = tiny({});
  s.folds = {1};
  auto data = prepare_data(s);
  auto folds = prepare_folds(s, data.a);
  auto cfg = model_config(s, data.a.features[0].width(), 9);
  agg::AggregatorModel m(cfg);
  auto ids = folds[0].ids_in(Subset::test);
  auto single = predict_subset(data.a, ids, m, s.clips_per_snippet);
  auto fused = predict_subset_fused(data.a, m, data.a, m, ids, s.clips_per_snippet);
  REQUIRE(single.items.size() == fused.items.size());
  for (std::size_t i = 0; i < single.items.size(); ++i) CHECK(single.items[i].probabilities == fused.items[i].probabilities);
  CHECK(predictions_to_jsonl(single) == predictions_to_jsonl(fused));
}

TEST_CASE("sweep over strategies and streams") {
  QuietWarnings quiet;
  auto dir = testing::scratch_dir("sweep");
  SweepSpec sw;
  sw.base = tiny(dir);
  sw.base.folds = {1};
  sw.base.train.epochs = 1;
  sw.strategies = {"Seq-24", "Shot-24"};
  sw.streams = {Streams::single, Streams::fusion};
  auto rows = run_sweep(sw);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].name() == "Seq-24_single_c4_fps24_transformer");
  CHECK(std::filesystem::exists(dir / rows[3].name() / "report.json"));
  auto json = nlohmann::json::parse(slurp(dir / "sweep.json"));
  REQUIRE(json["rows"].size() == 4);
  CHECK(json["rows"][1]["streams"] == "fusion");
  CHECK(json["rows"][2]["strategy"] == "Shot-24");
  CHECK(json["rows"][0]["report"]["metrics"].contains("micro_ap"));
  auto text = slurp(dir / "sweep.txt");
  CHECK(text.find("Shot-24") != std::string::npos);
  CHECK(render_sweep(rows) == text);
}
