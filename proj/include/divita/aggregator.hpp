#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "divita/genres.hpp"
#include "divita/random.hpp"
#include "divita/tensor.hpp"

namespace divita::agg {

using tensor::Graph;
using tensor::ParamStore;
using tensor::Tensor;
using tensor::Var;

enum class AggregatorKind { transformer, gru, conv };
enum class PositionalEncoding { sinusoidal, none };

const char* to_string(AggregatorKind kind);
AggregatorKind parse_aggregator_kind(const std::string& text);

struct AggregatorConfig {
  AggregatorKind kind = AggregatorKind::transformer;
  std::size_t input_width = 0;    // b, backbone output width
  std::size_t model_width = 128;  // d, after the reduction layer
  std::size_t blocks = 4;
  std::size_t heads = 4;
  std::size_t ffn_width = 0;      // 0 selects 4 * model_width
  double dropout = 0.1;
  PositionalEncoding positional = PositionalEncoding::sinusoidal;
  std::size_t gru_hidden = 115;
  std::size_t conv_filters = 128;
  std::size_t conv_width = 3;
  std::size_t genres = kNumGenres;
  double norm_eps = 1e-9;
  std::uint64_t init_seed = 0;

  std::size_t effective_ffn_width() const { return ffn_width ? ffn_width : 4 * model_width; }
  std::size_t representation_width() const;
  void validate() const;

  friend bool operator==(const AggregatorConfig&, const AggregatorConfig&) = default;
};

std::string config_to_json(const AggregatorConfig& config);
AggregatorConfig config_from_json(const std::string& text);

// Per-head attention weights of one block, recorded for inspection.
struct AttentionTrace {
  std::vector<std::vector<Tensor>> blocks;  // [block][head] c x c
};

class AggregatorModel {
 public:
  explicit AggregatorModel(AggregatorConfig config);

  const AggregatorConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Position-wise affine map c x b -> c x d.
  Var reduce_clips(Graph& g, Var clips) const;
  // Positional encoding (optional) plus the post-norm encoder blocks.
  Var encode(Graph& g, Var x, Rng* dropout_rng = nullptr, AttentionTrace* trace = nullptr) const;
  // Column mean over time, 1 x d.
  static Var pool(Var x);
  // Affine CLS layer producing pre-sigmoid logits 1 x g.
  Var classify(Graph& g, Var s) const;
  Var aggregate_gru(Graph& g, Var clips) const;
  Var aggregate_conv(Graph& g, Var clips) const;

  // Snippet representation s for the configured aggregator.
  Var represent(Graph& g, Var clips, Rng* dropout_rng = nullptr, AttentionTrace* trace = nullptr) const;
  Var snippet_logits(Graph& g, Var clips, Rng* dropout_rng = nullptr) const;

  // Inference helpers without gradient recording.
  Tensor predict_logits(const Tensor& clips) const;
  Tensor predict_probabilities(const Tensor& clips) const;

  void save(const std::filesystem::path& checkpoint) const;
  static AggregatorModel load(const std::filesystem::path& checkpoint);

 private:
  Var linear(Graph& g, Var x, const std::string& prefix) const;
  void add_linear(const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);
  Var param(Graph& g, const std::string& name) const;

  AggregatorConfig config_;
  ParamStore params_;
};

// Config file written next to a checkpoint (same stem, .json extension).
std::filesystem::path config_path_for(const std::filesystem::path& checkpoint);

// Late fusion: elementwise mean of two streams' logits.
Tensor fuse_logits(const Tensor& a, const Tensor& b);

Tensor sigmoid(const Tensor& logits);

}  // namespace divita::agg
