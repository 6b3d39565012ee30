#include "divita/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "divita/checkpoint.hpp"
#include "divita/error.hpp"
#include "divita/metrics.hpp"
#include "divita/snippets.hpp"

namespace divita::train {

namespace ts = divita::tensor;

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || plateau_patience < 1 || early_stop_patience < 1 || clips_per_snippet < 1)
    fail(ErrorKind::configuration, "training counts must be >= 1");
  if (!(lr0 > 0.0)) fail(ErrorKind::configuration, "initial learning rate must be positive");
  if (!(lr_factor > 1.0)) fail(ErrorKind::configuration, "learning-rate factor must exceed 1");
}

std::vector<std::size_t> Dataset::indices_of(const std::vector<std::string>& wanted) const {
  std::vector<std::size_t> out;
  out.reserve(wanted.size());
  for (const auto& id : wanted) {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) fail(ErrorKind::configuration, "split refers to unknown trailer '" + id + "'");
    out.push_back(static_cast<std::size_t>(it - ids.begin()));
  }
  return out;
}

double bce_loss(std::span<const double> p, std::span<const double> y) {
  if (p.size() != y.size() || p.empty()) fail(ErrorKind::dimension, "bce: widths differ or are empty");
  double loss = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double q = std::clamp(p[k], ts::kProbClamp, 1.0 - ts::kProbClamp);
    loss -= y[k] * std::log(q) + (1.0 - y[k]) * std::log(1.0 - q);
  }
  return loss / static_cast<double>(p.size());
}

Adam::Adam(const ts::ParamStore& params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params.items()) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

void Adam::step(ts::ParamStore& params, double lr) {
  if (params.size() != m_.size()) fail(ErrorKind::argument, "optimizer state does not match parameters");
  for (const auto& p : params.items())
    for (double g : p.grad.values())
      if (!std::isfinite(g)) fail(ErrorKind::numeric, "non-finite gradient in parameter '" + p.name + "'");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.at(i);
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p.value[k] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

double plateau_schedule(PlateauState& s, double val_loss) {
  if (!s.has_best || val_loss < s.best - s.threshold) {
    s.best = val_loss;
    s.has_best = true;
    s.since_improvement = 0;
    s.since_best = 0;
  } else {
    ++s.since_improvement;
    ++s.since_best;
  }
  if (s.since_improvement >= s.patience) {
    s.lr /= s.factor;
    s.since_improvement = 0;
  }
  return s.lr;
}

Evaluation evaluate(const Dataset& data, const std::vector<std::size_t>& indices,
                    const agg::AggregatorModel& model, std::size_t c) {
  if (indices.empty()) fail(ErrorKind::configuration, "evaluation subset is empty");
  metrics::PredictionSet preds;
  double loss = 0.0;
  for (auto i : indices) {
    auto p = metrics::predict_trailer(data.features[i], model, c);
    auto y = data.labels[i].indicator();
    loss += bce_loss(p, y);
    preds.items.push_back({data.ids[i], p, data.labels[i]});
  }
  Evaluation e;
  e.loss = loss / static_cast<double>(indices.size());
  e.micro_ap = metrics::micro_ap(preds);
  e.sample_ap = metrics::sample_ap(preds).value;
  return e;
}

FitResult fit(const Dataset& data, const SplitAssignment& split, agg::AggregatorModel& model,
              const TrainConfig& config, Rng& rng, const EpochCallback& on_epoch) {
  config.validate();
  auto train_idx = data.indices_of(split.ids_in(Subset::train));
  auto val_idx = data.indices_of(split.ids_in(Subset::val));
  if (train_idx.empty()) fail(ErrorKind::configuration, "training subset is empty");
  if (val_idx.empty()) fail(ErrorKind::configuration, "validation subset is empty");

  auto& params = model.params();
  Adam adam(params, config.adam_beta1, config.adam_beta2, config.adam_eps);
  PlateauState plateau;
  plateau.lr = config.lr0;
  plateau.patience = config.plateau_patience;
  plateau.factor = config.lr_factor;
  plateau.threshold = config.plateau_threshold;

  FitResult result;
  ts::ParamStore best = params;
  bool have_best = false;
  const std::size_t c = config.clips_per_snippet;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = plateau.lr;
    std::vector<std::size_t> order = train_idx;
    shuffle(std::span<std::size_t>(order), rng);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      ts::Graph g;
      std::vector<ts::Var> losses;
      for (std::size_t k = begin; k < end; ++k) {
        const auto i = order[k];
        const auto& seq = data.features[i];
        auto snippet = snip::sample_training_snippet(seq.n_clips(), c, rng);
        auto x = g.constant(metrics::snippet_matrix(seq, snippet));
        auto p = ts::sigmoid(model.snippet_logits(g, x, &rng));
        auto y = data.labels[i].indicator();
        losses.push_back(ts::binary_cross_entropy(p, ts::Tensor::row(y)));
      }
      auto batch_loss = ts::scale(ts::sum(ts::concat(losses, 1)), 1.0 / static_cast<double>(losses.size()));
      params.zero_grad();
      g.backward(batch_loss);
      adam.step(params, lr);
      loss_sum += batch_loss.value()[0] * static_cast<double>(losses.size());
    }

    auto val = evaluate(data, val_idx, model, c);
    EpochRecord rec{epoch, lr, loss_sum / static_cast<double>(order.size()), val.loss, val.micro_ap, val.sample_ap};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!have_best || val.loss < result.best_val_loss) {
      best = params;
      have_best = true;
      result.best_epoch = epoch;
      result.best_val_loss = val.loss;
    }
    plateau_schedule(plateau, val.loss);
    if (plateau.since_best >= config.early_stop_patience) {
      result.early_stopped = epoch < config.epochs;
      break;
    }
  }
  ts::load_values(params, best);
  return result;
}

std::string epoch_to_json(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["lr"] = r.lr;
  j["train_loss"] = r.train_loss;
  j["val_loss"] = r.val_loss;
  j["val_micro_ap"] = r.val_micro_ap;
  j["val_sample_ap"] = r.val_sample_ap;
  return j.dump();
}

std::string history_to_jsonl(const std::vector<EpochRecord>& history) {
  std::string out;
  for (const auto& r : history) out += epoch_to_json(r) + "\n";
  return out;
}

}  // namespace divita::train
