#include <doctest.h>

#include <cmath>
#include <limits>

#include "divita/splitter.hpp"
#include "divita/synth.hpp"
#include "divita/trainer.hpp"
#include "support.hpp"

using namespace divita;
using namespace divita::train;
using testing::thrown_kind;
namespace ts = divita::tensor;

namespace {

Dataset small_dataset(std::size_t n, std::uint64_t seed, double noise = 1.0) {
  synth::FeatureSpec spec;
  spec.n_trailers = n;
  spec.width = 16;
  spec.min_clips = 3;
  spec.max_clips = 9;
  spec.noise_sigma = noise;
  Rng rng(seed);
  auto s = synth::synth_features(spec, rng);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.ids.push_back(s.records[i].id);
    d.labels.push_back(s.records[i].genres);
  }
  d.features = s.features[0];
  return d;
}

agg::AggregatorConfig small_model() {
  agg::AggregatorConfig c;
  c.input_width = 16;
  c.model_width = 8;
  c.blocks = 1;
  c.heads = 2;
  c.dropout = 0.0;
  c.init_seed = 5;
  return c;
}

TrainConfig quick(std::size_t epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 8;
  t.lr0 = 3e-3;
  t.clips_per_snippet = 4;
  t.seed = 1;
  return t;
}

SplitAssignment fold_of(const Dataset& d) { return split::make_folds(d.ids, d.labels, 3, 1).front(); }

ts::ParamStore single(double value, double grad) {
  ts::ParamStore ps;
  ps.add("w", ts::Tensor::matrix(1, 1, value));
  ps.at("w").grad[0] = grad;
  return ps;
}

}  // namespace

TEST_CASE("BCE worked cases") {
  std::vector<double> half(10, 0.5), y(10, 0.0);
  y[2] = y[7] = 1.0;
  CHECK(bce_loss(half, y) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  std::vector<double> exact = y;
  const double perfect = bce_loss(exact, y);
  CHECK(perfect <= 1e-6);
  CHECK(perfect >= 0.0);
  Rng rng(30);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(10), t(10);
    double oracle = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
      p[k] = uniform01(rng);
      t[k] = uniform01(rng) < 0.3 ? 1.0 : 0.0;
      const double q = std::clamp(p[k], 1e-7, 1.0 - 1e-7);
      oracle -= t[k] * std::log(q) + (1 - t[k]) * std::log(1 - q);
    }
    CHECK(bce_loss(p, t) == doctest::Approx(oracle / 10).epsilon(1e-14));
  }
  std::vector<double> wrong = {0.0, 1.0}, truth = {1.0, 0.0};
  CHECK(bce_loss(wrong, truth) == doctest::Approx(-std::log(1e-7)).epsilon(1e-8));
}

TEST_CASE("Adam zero gradient leaves parameters unchanged") {
  auto ps = single(0.25, 0.0);
  Adam adam(ps);
  for (int i = 0; i < 5; ++i) adam.step(ps, 1e-3);
  CHECK(ps.at("w").value[0] == 0.25);
  CHECK(adam.steps() == 5);
}

TEST_CASE("Adam first step moves by lr against the gradient sign") {
  for (double g : {3.0, -0.02, 1e-3}) {
    auto ps = single(1.0, g);
    Adam adam(ps);
    adam.step(ps, 1e-4);
    const double delta = ps.at("w").value[0] - 1.0;
    CHECK(delta == doctest::Approx(-1e-4 * (g > 0 ? 1 : -1)).epsilon(1e-4));
  }
}

TEST_CASE("Adam matches a closed-form moment trace") {
  const double lr = 1e-2, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  auto ps = single(0.0, 0.0);
  Adam adam(ps);
  double w = 0.0, m = 0.0, v = 0.0;
  Rng rng(31);
  for (int t = 1; t <= 200; ++t) {
    const double g = (t % 3 == 0 ? -1.0 : 2.0) * (0.5 + uniform01(rng));
    ps.at("w").grad[0] = g;
    adam.step(ps, lr);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    w -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    CHECK(ps.at("w").value[0] == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("Adam constant gradient steps approach lr") {
  auto ps = single(0.0, 0.7);
  Adam adam(ps);
  double prev = 0.0, step = 0.0;
  for (int t = 0; t < 500; ++t) {
    adam.step(ps, 1e-3);
    step = prev - ps.at("w").value[0];
    prev = ps.at("w").value[0];
  }
  CHECK(step == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("Adam rejects non-finite gradients by parameter name") {
  ts::ParamStore ps;
  ps.add("fine", ts::Tensor::matrix(1, 2, 0.0));
  ps.add("broken.weight", ts::Tensor::matrix(2, 2, 0.0));
  ps.at("broken.weight").grad[3] = std::numeric_limits<double>::quiet_NaN();
  Adam adam(ps);
  try {
    adam.step(ps, 1e-3);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
    CHECK(std::string(e.what()).find("broken.weight") != std::string::npos);
  }
  CHECK(ps.at("fine").value[0] == 0.0);
  CHECK(adam.steps() == 0);
}

TEST_CASE("plateau schedule on a flat loss") {
  PlateauState s;
  std::vector<double> lr;
  for (int epoch = 1; epoch <= 45; ++epoch) lr.push_back(plateau_schedule(s, 1.0));
  CHECK(lr[19] == 1e-4);   // after epoch 20
  CHECK(lr[20] == 1e-5);   // after epoch 21
  CHECK(lr[39] == 1e-5);
  CHECK(lr[40] == 1e-4 / 10.0 / 10.0);  // after epoch 41
  CHECK(s.since_best == 44);
}

TEST_CASE("plateau schedule improvement interrupts a flat stretch") {
  PlateauState s;
  for (int epoch = 1; epoch <= 18; ++epoch) plateau_schedule(s, 1.0);
  plateau_schedule(s, 0.9);  // epoch 19
  double lr = 0.0;
  for (int epoch = 20; epoch <= 38; ++epoch) lr = plateau_schedule(s, 0.9);
  CHECK(lr == 1e-4);
  CHECK(plateau_schedule(s, 0.9) == 1e-5);  // epoch 39
  PlateauState tiny;
  plateau_schedule(tiny, 1.0);
  for (int epoch = 2; epoch <= 21; ++epoch) lr = plateau_schedule(tiny, 1.0 - 1e-7 * epoch);
  CHECK(lr == 1e-5);  // sub-threshold gains do not count
}

TEST_CASE("plateau schedule keeps lr on strictly improving loss") {
  PlateauState s;
  for (int epoch = 1; epoch <= 100; ++epoch) CHECK(plateau_schedule(s, 10.0 - 1e-3 * epoch) == 1e-4);
}

TEST_CASE("training config validation") {
  auto t = quick(1);
  t.lr0 = 0.0;
  CHECK(thrown_kind([&] { t.validate(); }) == ErrorKind::configuration);
  t = quick(1);
  t.batch_size = 0;
  CHECK(thrown_kind([&] { t.validate(); }) == ErrorKind::configuration);
  TrainConfig defaults;
  CHECK(defaults.epochs == 100);
  CHECK(defaults.batch_size == 32);
  CHECK(defaults.lr0 == 1e-4);
  CHECK(defaults.clips_per_snippet == 30);
}

TEST_CASE("fit rejects empty subsets and unknown ids") {
  auto d = small_dataset(30, 1);
  auto split = fold_of(d);
  auto no_val = split;
  for (auto& s : no_val.subsets)
    if (s == Subset::val) s = Subset::train;
  agg::AggregatorModel m(small_model());
  Rng rng(1);
  CHECK(thrown_kind([&] { fit(d, no_val, m, quick(1), rng); }) == ErrorKind::configuration);
  auto no_train = split;
  for (auto& s : no_train.subsets)
    if (s == Subset::train) s = Subset::test;
  CHECK(thrown_kind([&] { fit(d, no_train, m, quick(1), rng); }) == ErrorKind::configuration);
  auto ghost = split;
  ghost.ids[0] = "ghost";
  CHECK(thrown_kind([&] { fit(d, ghost, m, quick(1), rng); }) == ErrorKind::configuration);
}

TEST_CASE("fit is deterministic and restores the best epoch") {
  auto d = small_dataset(90, 2);
  auto split = fold_of(d);
  auto cfg = quick(8);
  cfg.lr0 = 3e-2;
  agg::AggregatorModel a(small_model()), b(small_model());
  Rng ra(7), rb(7);
  std::vector<EpochRecord> seen;
  auto ha = fit(d, split, a, cfg, ra, [&](const EpochRecord& r) { seen.push_back(r); });
  auto hb = fit(d, split, b, cfg, rb);
  CHECK(ha.history == hb.history);
  CHECK(seen == ha.history);
  CHECK(a.params() == b.params());
  CHECK(history_to_jsonl(ha.history) == history_to_jsonl(hb.history));
  REQUIRE(ha.history.size() == 8);

  std::size_t argmin = 0;
  for (std::size_t i = 1; i < ha.history.size(); ++i)
    if (ha.history[i].val_loss < ha.history[argmin].val_loss) argmin = i;
  CHECK(ha.best_epoch == argmin + 1);
  auto val = evaluate(d, d.indices_of(split.ids_in(Subset::val)), a, cfg.clips_per_snippet);
  CHECK(val.loss == ha.history[argmin].val_loss);
  CHECK(ha.best_val_loss == val.loss);
}

TEST_CASE("returned model is the best epoch, not the last") {
  // A large lr overshoots after a few epochs so the minimum is interior.
  auto d = small_dataset(60, 3);
  auto split = fold_of(d);
  auto cfg = quick(12);
  cfg.lr0 = 0.3;
  agg::AggregatorModel m(small_model());
  Rng rng(8);
  auto h = fit(d, split, m, cfg, rng);
  const auto val_idx = d.indices_of(split.ids_in(Subset::val));
  const double restored = evaluate(d, val_idx, m, cfg.clips_per_snippet).loss;
  CHECK(restored == h.history[h.best_epoch - 1].val_loss);
  if (h.best_epoch != h.history.size()) CHECK(restored != h.history.back().val_loss);
}

TEST_CASE("training loss falls over the first epochs on separable data") {
  auto d = small_dataset(120, 4, 0.5);
  auto split = fold_of(d);
  auto cfg = quick(5);
  agg::AggregatorModel m(small_model());
  Rng rng(9);
  auto h = fit(d, split, m, cfg, rng);
  REQUIRE(h.history.size() == 5);
  std::vector<double> avg;
  for (std::size_t i = 2; i < 5; ++i)
    avg.push_back((h.history[i - 2].train_loss + h.history[i - 1].train_loss + h.history[i].train_loss) / 3);
  CHECK(avg[1] < avg[0]);
  CHECK(avg[2] < avg[1]);
}

TEST_CASE("learning-rate drops are exact tenths and early stopping fires") {
  auto d = small_dataset(45, 5);
  auto split = fold_of(d);
  auto cfg = quick(40);
  cfg.lr0 = 1e-9;  // nothing moves, so every epoch is a plateau
  cfg.plateau_patience = 2;
  cfg.early_stop_patience = 7;
  agg::AggregatorModel m(small_model());
  Rng rng(10);
  auto h = fit(d, split, m, cfg, rng);
  CHECK(h.early_stopped);
  CHECK(h.history.size() < 40);
  std::size_t drops = 0;
  for (std::size_t i = 1; i < h.history.size(); ++i) {
    const double prev = h.history[i - 1].lr, cur = h.history[i].lr;
    CHECK(cur <= prev);
    if (cur != prev) {
      ++drops;
      CHECK(cur == prev / 10.0);
    }
  }
  CHECK(drops >= 2);
}

TEST_CASE("epoch log records") {
  EpochRecord r{3, 1e-4, 0.5, 0.25, 0.75, 0.8};
  CHECK(epoch_to_json(r) ==
        "{\"epoch\":3,\"lr\":0.0001,\"train_loss\":0.5,\"val_loss\":0.25,\"val_micro_ap\":0.75,\"val_sample_ap\":0.8}");
  CHECK(history_to_jsonl({r, r}) == epoch_to_json(r) + "\n" + epoch_to_json(r) + "\n");
}
