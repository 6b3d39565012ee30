#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "divita/aggregator.hpp"
#include "divita/genres.hpp"
#include "divita/records.hpp"

namespace divita::train {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double lr0 = 1e-4;
  std::size_t plateau_patience = 20;
  double lr_factor = 10.0;
  double plateau_threshold = 1e-5;
  std::size_t early_stop_patience = 30;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t clips_per_snippet = 30;
  std::string strategy = "Shot-24";

  void validate() const;
};

// In-memory training corpus: one feature sequence and label set per trailer.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<FeatureSequence> features;
  std::vector<GenreSet> labels;

  std::size_t size() const { return ids.size(); }
  // Indices of `wanted` ids; throws configuration error for unknown ids.
  std::vector<std::size_t> indices_of(const std::vector<std::string>& wanted) const;
};

// Mean over all entries of -[y ln p + (1-y) ln(1-p)], p clamped to
// [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> p, std::span<const double> y);

class Adam {
 public:
  Adam(const tensor::ParamStore& params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // One bias-corrected update from the gradients held in `params`. Throws a
  // numeric error naming the parameter if any gradient is not finite.
  void step(tensor::ParamStore& params, double lr);
  std::uint64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Reduce-on-plateau and early-stopping bookkeeping on validation loss.
struct PlateauState {
  double lr = 1e-4;
  double best = 0.0;
  bool has_best = false;
  std::size_t since_improvement = 0;  // resets on every lr drop
  std::size_t since_best = 0;         // drives early stopping
  std::size_t patience = 20;
  double factor = 10.0;
  double threshold = 1e-5;
};

// Feeds one epoch's validation loss; returns the lr for the next epoch.
double plateau_schedule(PlateauState& state, double val_loss);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_micro_ap = 0.0;
  double val_sample_ap = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct FitResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Trains `model` in place and leaves it holding the parameters of the epoch
// with the lowest validation loss. Each epoch visits every training trailer
// once in shuffled order with one random snippet per trailer.
FitResult fit(const Dataset& data, const SplitAssignment& split, agg::AggregatorModel& model,
              const TrainConfig& config, Rng& rng, const EpochCallback& on_epoch = {});

// Mean BCE and metrics of inference-mode predictions on `indices`.
struct Evaluation {
  double loss = 0.0;
  double micro_ap = 0.0;
  double sample_ap = 0.0;
};
Evaluation evaluate(const Dataset& data, const std::vector<std::size_t>& indices,
                    const agg::AggregatorModel& model, std::size_t c);

std::string epoch_to_json(const EpochRecord& record);
std::string history_to_jsonl(const std::vector<EpochRecord>& history);

}  // namespace divita::train
