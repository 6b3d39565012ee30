#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divita/aggregator.hpp"
#include "divita/genres.hpp"
#include "divita/records.hpp"
#include "divita/snippets.hpp"

namespace divita::metrics {

struct Prediction {
  std::string id;
  std::array<double, kNumGenres> probabilities{};
  GenreSet truth;
};

struct PredictionSet {
  std::vector<Prediction> items;

  // Throws validation error on duplicate ids or probabilities outside [0, 1].
  void validate() const;
};

// Widened float64 matrix of the snippet's clip rows.
tensor::Tensor snippet_matrix(const FeatureSequence& features, const snip::Snippet& snippet);

// Inference mode: mean of sigmoid outputs over all snippets of the plan.
std::array<double, kNumGenres> predict_trailer(const FeatureSequence& features,
                                               const agg::AggregatorModel& model, std::size_t c);
// Two-stream variant: per snippet, logits of both streams are averaged before
// the sigmoid. Streams must describe the same clip sequence.
std::array<double, kNumGenres> predict_trailer_fused(const FeatureSequence& features_a,
                                                     const agg::AggregatorModel& model_a,
                                                     const FeatureSequence& features_b,
                                                     const agg::AggregatorModel& model_b,
                                                     std::size_t c);

// Step-wise area under the precision-recall curve. Items with equal scores
// enter together. Throws undefined_result when there are no positives.
double average_precision(std::span<const double> scores, std::span<const int> labels);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};
std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const int> labels);
std::string pr_curve_csv(const std::vector<PrPoint>& curve);

// Averages over classes or samples; `per_item` is empty where excluded.
struct AveragedAp {
  double value = 0.0;
  std::vector<std::optional<double>> per_item;
  std::size_t excluded = 0;
};

double micro_ap(const PredictionSet& predictions);
AveragedAp macro_ap(const PredictionSet& predictions);
AveragedAp weighted_ap(const PredictionSet& predictions);
AveragedAp sample_ap(const PredictionSet& predictions);

// Flattened (trailer, genre) pairs, used by micro AP and the PR curve export.
void flatten(const PredictionSet& predictions, std::vector<double>& scores, std::vector<int>& labels);

// Values are x100. std is the population standard deviation over folds.
struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
  std::vector<std::optional<double>> per_fold;

  friend bool operator==(const MetricSummary&, const MetricSummary&) = default;
};

MetricSummary summarize(const std::vector<std::optional<double>>& per_fold_fraction);

struct EvalReport {
  MetricSummary micro_ap;
  MetricSummary macro_ap;
  MetricSummary weighted_ap;
  MetricSummary sample_ap;
  std::array<MetricSummary, kNumGenres> per_genre_ap;
  std::vector<std::size_t> excluded_genres;   // per fold
  std::vector<std::size_t> excluded_samples;  // per fold

  std::size_t folds() const { return micro_ap.per_fold.size(); }
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport evaluate_folds(const std::vector<PredictionSet>& folds);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
// Fixed-width table of "mean±std" cells at two decimals.
std::string render_report(const EvalReport& report, const std::string& title = "");

}  // namespace divita::metrics
