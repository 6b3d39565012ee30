#include "divita/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include <json.hpp>

#include "divita/error.hpp"

namespace divita::metrics {

void PredictionSet::validate() const {
  std::set<std::string> seen;
  for (const auto& p : items) {
    if (!seen.insert(p.id).second) fail(ErrorKind::validation, "duplicate prediction id '" + p.id + "'");
    for (double v : p.probabilities)
      if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::validation, "probability out of range for '" + p.id + "'");
  }
}

tensor::Tensor snippet_matrix(const FeatureSequence& features, const snip::Snippet& snippet) {
  const auto b = features.width();
  tensor::Tensor m = tensor::Tensor::matrix(snippet.size(), b);
  for (std::size_t r = 0; r < snippet.size(); ++r) {
    const auto idx = snippet.clip_indices[r];
    if (idx >= features.n_clips()) fail(ErrorKind::argument, "snippet index beyond clip sequence");
    auto row = features.row(idx);
    for (std::size_t k = 0; k < b; ++k) m(r, k) = static_cast<double>(row[k]);
  }
  return m;
}

namespace {

std::array<double, kNumGenres> to_array(const tensor::Tensor& t) {
  if (t.size() != kNumGenres) fail(ErrorKind::dimension, "model output width is not the genre count");
  std::array<double, kNumGenres> out{};
  for (std::size_t k = 0; k < kNumGenres; ++k) out[k] = t[k];
  return out;
}

void check_width(const FeatureSequence& f, const agg::AggregatorModel& m) {
  if (f.width() != m.config().input_width)
    fail(ErrorKind::dimension, "feature width " + std::to_string(f.width()) + " does not match model input width " +
                                   std::to_string(m.config().input_width));
  if (f.n_clips() == 0) fail(ErrorKind::argument, "empty feature sequence");
}

}  // namespace

std::array<double, kNumGenres> predict_trailer(const FeatureSequence& features,
                                               const agg::AggregatorModel& model, std::size_t c) {
  check_width(features, model);
  auto plan = snip::enumerate_inference_snippets(features.n_clips(), c);
  std::array<double, kNumGenres> acc{};
  for (const auto& s : plan.snippets) {
    auto p = to_array(model.predict_probabilities(snippet_matrix(features, s)));
    for (std::size_t k = 0; k < kNumGenres; ++k) acc[k] += p[k];
  }
  for (auto& v : acc) v /= static_cast<double>(plan.snippets.size());
  return acc;
}

std::array<double, kNumGenres> predict_trailer_fused(const FeatureSequence& features_a,
                                                     const agg::AggregatorModel& model_a,
                                                     const FeatureSequence& features_b,
                                                     const agg::AggregatorModel& model_b,
                                                     std::size_t c) {
  check_width(features_a, model_a);
  check_width(features_b, model_b);
  if (features_a.n_clips() != features_b.n_clips())
    fail(ErrorKind::dimension, "fused streams have different clip counts");
  auto plan = snip::enumerate_inference_snippets(features_a.n_clips(), c);
  std::array<double, kNumGenres> acc{};
  for (const auto& s : plan.snippets) {
    auto z = agg::fuse_logits(model_a.predict_logits(snippet_matrix(features_a, s)),
                              model_b.predict_logits(snippet_matrix(features_b, s)));
    auto p = to_array(agg::sigmoid(z));
    for (std::size_t k = 0; k < kNumGenres; ++k) acc[k] += p[k];
  }
  for (auto& v : acc) v /= static_cast<double>(plan.snippets.size());
  return acc;
}

std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorKind::dimension, "scores and labels differ in length");
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
  if (positives == 0) fail(ErrorKind::undefined_result, "average precision needs at least one positive");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<PrPoint> curve;
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == t) {
      (labels[order[j]] ? tp : fp) += 1;
      ++j;
    }
    curve.push_back({t, tp / (tp + fp), tp / static_cast<double>(positives)});
    i = j;
  }
  return curve;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  double ap = 0.0, prev_recall = 0.0;
  for (const auto& pt : pr_curve(scores, labels)) {
    ap += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
  }
  return ap;
}

std::string pr_curve_csv(const std::vector<PrPoint>& curve) {
  std::string out = "threshold,precision,recall\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.precision, p.recall);
    out += buf;
  }
  return out;
}

void flatten(const PredictionSet& predictions, std::vector<double>& scores, std::vector<int>& labels) {
  scores.clear();
  labels.clear();
  for (const auto& p : predictions.items)
    for (std::size_t k = 0; k < kNumGenres; ++k) {
      scores.push_back(p.probabilities[k]);
      labels.push_back(p.truth.contains(k) ? 1 : 0);
    }
}

double micro_ap(const PredictionSet& predictions) {
  std::vector<double> scores;
  std::vector<int> labels;
  flatten(predictions, scores, labels);
  return average_precision(scores, labels);
}

namespace {

// Per-genre AP plus positive counts; genres without positives are nullopt.
std::vector<std::optional<double>> per_genre(const PredictionSet& predictions, std::vector<double>& counts) {
  std::vector<std::optional<double>> out(kNumGenres);
  counts.assign(kNumGenres, 0.0);
  std::vector<double> scores(predictions.items.size());
  std::vector<int> labels(predictions.items.size());
  for (std::size_t k = 0; k < kNumGenres; ++k) {
    for (std::size_t i = 0; i < predictions.items.size(); ++i) {
      scores[i] = predictions.items[i].probabilities[k];
      labels[i] = predictions.items[i].truth.contains(k) ? 1 : 0;
      counts[k] += labels[i];
    }
    if (counts[k] > 0) out[k] = average_precision(scores, labels);
  }
  return out;
}

AveragedAp class_average(const PredictionSet& predictions, bool weighted) {
  std::vector<double> counts;
  AveragedAp r;
  r.per_item = per_genre(predictions, counts);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < kNumGenres; ++k) {
    if (!r.per_item[k]) {
      ++r.excluded;
      continue;
    }
    const double w = weighted ? counts[k] : 1.0;
    num += w * *r.per_item[k];
    den += w;
  }
  if (den == 0.0) fail(ErrorKind::undefined_result, "no genre has a positive example");
  if (r.excluded > 0)
    warn(std::to_string(r.excluded) + " genre(s) without positives excluded from the class average");
  r.value = num / den;
  return r;
}

}  // namespace

AveragedAp macro_ap(const PredictionSet& predictions) { return class_average(predictions, false); }
AveragedAp weighted_ap(const PredictionSet& predictions) { return class_average(predictions, true); }

AveragedAp sample_ap(const PredictionSet& predictions) {
  AveragedAp r;
  std::vector<int> labels(kNumGenres);
  double total = 0.0;
  std::size_t used = 0;
  for (const auto& p : predictions.items) {
    if (p.truth.empty()) {
      r.per_item.emplace_back();
      ++r.excluded;
      continue;
    }
    for (std::size_t k = 0; k < kNumGenres; ++k) labels[k] = p.truth.contains(k) ? 1 : 0;
    const double ap = average_precision(p.probabilities, labels);
    r.per_item.emplace_back(ap);
    total += ap;
    ++used;
  }
  if (used == 0) fail(ErrorKind::undefined_result, "no sample has a label");
  if (r.excluded > 0) warn(std::to_string(r.excluded) + " sample(s) without labels excluded from sAP");
  r.value = total / static_cast<double>(used);
  return r;
}

MetricSummary summarize(const std::vector<std::optional<double>>& per_fold_fraction) {
  MetricSummary s;
  std::vector<double> vals;
  for (const auto& v : per_fold_fraction) {
    s.per_fold.push_back(v ? std::optional<double>(*v * 100.0) : std::nullopt);
    if (v) vals.push_back(*v * 100.0);
  }
  if (vals.empty()) return s;
  s.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
  double var = 0.0;
  for (double v : vals) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(vals.size()));
  return s;
}

EvalReport evaluate_folds(const std::vector<PredictionSet>& folds) {
  if (folds.empty()) fail(ErrorKind::argument, "no folds to evaluate");
  std::vector<std::optional<double>> mu, ma, wa, sa;
  std::array<std::vector<std::optional<double>>, kNumGenres> genre;
  EvalReport report;
  for (const auto& f : folds) {
    f.validate();
    mu.emplace_back(micro_ap(f));
    auto m = macro_ap(f);
    ma.emplace_back(m.value);
    wa.emplace_back(weighted_ap(f).value);
    auto s = sample_ap(f);
    sa.emplace_back(s.value);
    for (std::size_t k = 0; k < kNumGenres; ++k) genre[k].push_back(m.per_item[k]);
    report.excluded_genres.push_back(m.excluded);
    report.excluded_samples.push_back(s.excluded);
  }
  report.micro_ap = summarize(mu);
  report.macro_ap = summarize(ma);
  report.weighted_ap = summarize(wa);
  report.sample_ap = summarize(sa);
  for (std::size_t k = 0; k < kNumGenres; ++k) report.per_genre_ap[k] = summarize(genre[k]);
  return report;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson summary_json(const MetricSummary& s) {
  ojson j;
  j["mean"] = s.mean;
  j["std"] = s.std;
  ojson folds = ojson::array();
  for (const auto& v : s.per_fold) folds.push_back(v ? ojson(*v) : ojson(nullptr));
  j["per_fold"] = folds;
  return j;
}

MetricSummary summary_from(const nlohmann::json& j) {
  MetricSummary s;
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  for (const auto& v : j.at("per_fold"))
    s.per_fold.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
  return s;
}

constexpr const char* kMetricKeys[] = {"micro_ap", "macro_ap", "weighted_ap", "sample_ap"};

}  // namespace

std::string report_to_json(const EvalReport& r) {
  ojson j;
  j["folds"] = r.folds();
  ojson m;
  m["micro_ap"] = summary_json(r.micro_ap);
  m["macro_ap"] = summary_json(r.macro_ap);
  m["weighted_ap"] = summary_json(r.weighted_ap);
  m["sample_ap"] = summary_json(r.sample_ap);
  j["metrics"] = m;
  ojson g;
  for (std::size_t k = 0; k < kNumGenres; ++k) g[std::string(kGenreNames[k])] = summary_json(r.per_genre_ap[k]);
  j["per_genre_ap"] = g;
  j["excluded_genres"] = r.excluded_genres;
  j["excluded_samples"] = r.excluded_samples;
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  EvalReport r;
  try {
    auto j = nlohmann::json::parse(text);
    const auto& m = j.at("metrics");
    r.micro_ap = summary_from(m.at(kMetricKeys[0]));
    r.macro_ap = summary_from(m.at(kMetricKeys[1]));
    r.weighted_ap = summary_from(m.at(kMetricKeys[2]));
    r.sample_ap = summary_from(m.at(kMetricKeys[3]));
    for (std::size_t k = 0; k < kNumGenres; ++k)
      r.per_genre_ap[k] = summary_from(j.at("per_genre_ap").at(std::string(kGenreNames[k])));
    r.excluded_genres = j.at("excluded_genres").get<std::vector<std::size_t>>();
    r.excluded_samples = j.at("excluded_samples").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("bad report: ") + e.what());
  }
  return r;
}

std::string render_report(const EvalReport& r, const std::string& title) {
  auto cell = [](const MetricSummary& s) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", s.mean, s.std);
    return std::string(buf);
  };
  std::string out;
  if (!title.empty()) out += title + "\n";
  out += "folds: " + std::to_string(r.folds()) + "\n";
  out += "muAP          mAP           wAP           sAP\n";
  std::string row;
  for (const auto* s : {&r.micro_ap, &r.macro_ap, &r.weighted_ap, &r.sample_ap}) {
    auto c = cell(*s);
    // "±" is two bytes but one column.
    c.resize(std::max<std::size_t>(c.size(), 15), ' ');
    row += c;
  }
  row.erase(row.find_last_not_of(' ') + 1);
  out += row + "\nper-genre AP\n";
  for (std::size_t k = 0; k < kNumGenres; ++k) {
    std::string name(kGenreNames[k]);
    name.resize(17, ' ');
    out += "  " + name + cell(r.per_genre_ap[k]) + "\n";
  }
  return out;
}

}  // namespace divita::metrics
