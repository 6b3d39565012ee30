#include "divita/aggregator.hpp"

#include <cmath>

#include <json.hpp>

#include "divita/checkpoint.hpp"
#include "divita/error.hpp"
#include "file_util.hpp"

namespace divita::agg {

namespace ts = divita::tensor;

const char* to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::transformer: return "transformer";
    case AggregatorKind::gru: return "gru";
    case AggregatorKind::conv: return "conv";
  }
  return "?";
}

AggregatorKind parse_aggregator_kind(const std::string& text) {
  if (text == "transformer") return AggregatorKind::transformer;
  if (text == "gru") return AggregatorKind::gru;
  if (text == "conv") return AggregatorKind::conv;
  fail(ErrorKind::validation, "unknown aggregator '" + text + "'");
}

std::size_t AggregatorConfig::representation_width() const {
  switch (kind) {
    case AggregatorKind::transformer: return model_width;
    case AggregatorKind::gru: return gru_hidden;
    case AggregatorKind::conv: return conv_filters;
  }
  return model_width;
}

void AggregatorConfig::validate() const {
  if (input_width == 0 || model_width == 0) fail(ErrorKind::configuration, "widths must be positive");
  if (model_width >= input_width)
    fail(ErrorKind::configuration, "model width d=" + std::to_string(model_width) +
                                       " must be smaller than input width b=" + std::to_string(input_width));
  if (genres == 0) fail(ErrorKind::configuration, "genre count must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorKind::configuration, "dropout must be in [0, 1)");
  switch (kind) {
    case AggregatorKind::transformer:
      if (blocks == 0 || heads == 0) fail(ErrorKind::configuration, "blocks and heads must be positive");
      if (model_width % heads != 0)
        fail(ErrorKind::configuration, "model width must be divisible by the head count");
      break;
    case AggregatorKind::gru:
      if (gru_hidden == 0) fail(ErrorKind::configuration, "GRU hidden width must be positive");
      break;
    case AggregatorKind::conv:
      if (conv_filters == 0 || conv_width % 2 == 0)
        fail(ErrorKind::configuration, "convolution needs filters and an odd width");
      break;
  }
}

std::string config_to_json(const AggregatorConfig& c) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(c.kind);
  j["input_width"] = c.input_width;
  j["model_width"] = c.model_width;
  j["blocks"] = c.blocks;
  j["heads"] = c.heads;
  j["ffn_width"] = c.ffn_width;
  j["dropout"] = c.dropout;
  j["positional"] = c.positional == PositionalEncoding::sinusoidal ? "sinusoidal" : "none";
  j["gru_hidden"] = c.gru_hidden;
  j["conv_filters"] = c.conv_filters;
  j["conv_width"] = c.conv_width;
  j["genres"] = c.genres;
  j["norm_eps"] = c.norm_eps;
  j["init_seed"] = c.init_seed;
  return j.dump(2) + "\n";
}

AggregatorConfig config_from_json(const std::string& text) {
  AggregatorConfig c;
  try {
    auto j = nlohmann::json::parse(text);
    c.kind = parse_aggregator_kind(j.at("kind").get<std::string>());
    c.input_width = j.at("input_width").get<std::size_t>();
    c.model_width = j.at("model_width").get<std::size_t>();
    c.blocks = j.value("blocks", c.blocks);
    c.heads = j.value("heads", c.heads);
    c.ffn_width = j.value("ffn_width", c.ffn_width);
    c.dropout = j.value("dropout", c.dropout);
    auto pos = j.value("positional", std::string("sinusoidal"));
    if (pos != "sinusoidal" && pos != "none") fail(ErrorKind::validation, "unknown positional encoding '" + pos + "'");
    c.positional = pos == "none" ? PositionalEncoding::none : PositionalEncoding::sinusoidal;
    c.gru_hidden = j.value("gru_hidden", c.gru_hidden);
    c.conv_filters = j.value("conv_filters", c.conv_filters);
    c.conv_width = j.value("conv_width", c.conv_width);
    c.genres = j.value("genres", c.genres);
    c.norm_eps = j.value("norm_eps", c.norm_eps);
    c.init_seed = j.value("init_seed", c.init_seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("bad model config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

Tensor uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  Tensor t = Tensor::matrix(rows, cols);
  for (auto& v : t.values()) v = (2.0 * uniform01(rng) - 1.0) * bound;
  return t;
}

std::string block_name(std::size_t i, const char* part) { return "block" + std::to_string(i) + "." + part; }

}  // namespace

AggregatorModel::AggregatorModel(AggregatorConfig config) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(config_.init_seed, "aggregator-init"));
  const auto b = config_.input_width, d = config_.model_width;
  add_linear("reduce", b, d, rng);
  switch (config_.kind) {
    case AggregatorKind::transformer:
      for (std::size_t i = 0; i < config_.blocks; ++i) {
        for (const char* part : {"attn.q", "attn.k", "attn.v", "attn.out"}) add_linear(block_name(i, part), d, d, rng);
        params_.add(block_name(i, "norm1.gamma"), Tensor::matrix(1, d, 1.0));
        params_.add(block_name(i, "norm1.beta"), Tensor::matrix(1, d, 0.0));
        add_linear(block_name(i, "ffn.in"), d, config_.effective_ffn_width(), rng);
        add_linear(block_name(i, "ffn.out"), config_.effective_ffn_width(), d, rng);
        params_.add(block_name(i, "norm2.gamma"), Tensor::matrix(1, d, 1.0));
        params_.add(block_name(i, "norm2.beta"), Tensor::matrix(1, d, 0.0));
      }
      break;
    case AggregatorKind::gru: {
      const auto h = config_.gru_hidden;
      params_.add("gru.weight_ih", uniform_init(d, 3 * h, d, rng));
      params_.add("gru.weight_hh", uniform_init(h, 3 * h, h, rng));
      params_.add("gru.bias_ih", Tensor::matrix(1, 3 * h));
      params_.add("gru.bias_hh", Tensor::matrix(1, 3 * h));
      break;
    }
    case AggregatorKind::conv:
      add_linear("conv", config_.conv_width * d, config_.conv_filters, rng);
      break;
  }
  add_linear("cls", config_.representation_width(), config_.genres, rng);
}

void AggregatorModel::add_linear(const std::string& prefix, std::size_t in, std::size_t out, Rng& rng) {
  params_.add(prefix + ".weight", uniform_init(in, out, in, rng));
  params_.add(prefix + ".bias", Tensor::matrix(1, out));
}

Var AggregatorModel::param(Graph& g, const std::string& name) const {
  // Gradient slots are written through a recording graph; values are not.
  if (g.recording()) return g.param(const_cast<ParamStore&>(params_), name);
  return g.param(params_, name);
}

Var AggregatorModel::linear(Graph& g, Var x, const std::string& prefix) const {
  return ts::add(ts::matmul(x, param(g, prefix + ".weight")), param(g, prefix + ".bias"));
}

Var AggregatorModel::reduce_clips(Graph& g, Var clips) const {
  if (clips.value().rank() != 2 || clips.value().cols() != config_.input_width)
    fail(ErrorKind::dimension, "clip matrix width " + std::to_string(clips.value().cols()) +
                                   " does not match model input width " + std::to_string(config_.input_width));
  if (clips.value().rows() == 0) fail(ErrorKind::argument, "snippet has no clips");
  return linear(g, clips, "reduce");
}

Var AggregatorModel::encode(Graph& g, Var x, Rng* dropout_rng, AttentionTrace* trace) const {
  const auto c = x.value().rows();
  const auto d = config_.model_width;
  const auto heads = config_.heads;
  const auto dh = d / heads;
  const double rate = dropout_rng ? config_.dropout : 0.0;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  auto drop = [&](Var v) { return rate > 0.0 ? ts::dropout(v, rate, *dropout_rng) : v; };

  if (config_.positional == PositionalEncoding::sinusoidal)
    x = ts::add(x, g.constant(ts::sinusoidal_positions(c, d)));
  if (trace) trace->blocks.clear();

  for (std::size_t i = 0; i < config_.blocks; ++i) {
    auto q = linear(g, x, block_name(i, "attn.q"));
    auto k = linear(g, x, block_name(i, "attn.k"));
    auto v = linear(g, x, block_name(i, "attn.v"));
    std::vector<Var> head_out;
    std::vector<Tensor> head_weights;
    for (std::size_t h = 0; h < heads; ++h) {
      auto qh = heads == 1 ? q : ts::slice(q, 1, h * dh, (h + 1) * dh);
      auto kh = heads == 1 ? k : ts::slice(k, 1, h * dh, (h + 1) * dh);
      auto vh = heads == 1 ? v : ts::slice(v, 1, h * dh, (h + 1) * dh);
      auto weights = ts::softmax(ts::scale(ts::matmul(qh, ts::transpose(kh)), inv_sqrt), 1);
      if (trace) head_weights.push_back(weights.value());
      head_out.push_back(ts::matmul(weights, vh));
    }
    if (trace) trace->blocks.push_back(std::move(head_weights));
    auto attn = linear(g, heads == 1 ? head_out[0] : ts::concat(head_out, 1), block_name(i, "attn.out"));
    x = ts::layer_norm(ts::add(x, drop(attn)), param(g, block_name(i, "norm1.gamma")),
                       param(g, block_name(i, "norm1.beta")), config_.norm_eps);
    auto ffn = linear(g, ts::relu(linear(g, x, block_name(i, "ffn.in"))), block_name(i, "ffn.out"));
    x = ts::layer_norm(ts::add(x, drop(ffn)), param(g, block_name(i, "norm2.gamma")),
                       param(g, block_name(i, "norm2.beta")), config_.norm_eps);
  }
  return x;
}

Var AggregatorModel::pool(Var x) {
  if (x.value().rows() == 0) fail(ErrorKind::argument, "cannot pool an empty sequence");
  return ts::mean(x, 0);
}

Var AggregatorModel::classify(Graph& g, Var s) const { return linear(g, s, "cls"); }

Var AggregatorModel::aggregate_gru(Graph& g, Var clips) const {
  auto x = reduce_clips(g, clips);
  const auto c = x.value().rows();
  const auto h = config_.gru_hidden;
  auto gi = ts::add(ts::matmul(x, param(g, "gru.weight_ih")), param(g, "gru.bias_ih"));
  auto w_hh = param(g, "gru.weight_hh");
  auto b_hh = param(g, "gru.bias_hh");
  Var state = g.constant(Tensor::matrix(1, h));
  for (std::size_t t = 0; t < c; ++t) {
    auto gi_t = ts::slice(gi, 0, t, t + 1);
    auto gh_t = ts::add(ts::matmul(state, w_hh), b_hh);
    auto r = ts::sigmoid(ts::add(ts::slice(gi_t, 1, 0, h), ts::slice(gh_t, 1, 0, h)));
    auto z = ts::sigmoid(ts::add(ts::slice(gi_t, 1, h, 2 * h), ts::slice(gh_t, 1, h, 2 * h)));
    auto n = ts::tanh(ts::add(ts::slice(gi_t, 1, 2 * h, 3 * h), ts::mul(r, ts::slice(gh_t, 1, 2 * h, 3 * h))));
    // h' = (1 - z) * n + z * h
    state = ts::add(ts::mul(ts::add_scalar(ts::scale(z, -1.0), 1.0), n), ts::mul(z, state));
  }
  return state;
}

Var AggregatorModel::aggregate_conv(Graph& g, Var clips) const {
  auto x = reduce_clips(g, clips);
  const auto c = x.value().rows();
  const auto d = config_.model_width;
  const auto half = config_.conv_width / 2;
  Var padded = x;
  if (half > 0) {
    auto zeros = g.constant(Tensor::matrix(half, d));
    padded = ts::concat({zeros, x, zeros}, 0);
  }
  std::vector<Var> taps;
  for (std::size_t o = 0; o < config_.conv_width; ++o) taps.push_back(ts::slice(padded, 0, o, o + c));
  auto windows = taps.size() == 1 ? taps[0] : ts::concat(taps, 1);
  return pool(ts::relu(linear(g, windows, "conv")));
}

Var AggregatorModel::represent(Graph& g, Var clips, Rng* dropout_rng, AttentionTrace* trace) const {
  switch (config_.kind) {
    case AggregatorKind::transformer: return pool(encode(g, reduce_clips(g, clips), dropout_rng, trace));
    case AggregatorKind::gru: return aggregate_gru(g, clips);
    case AggregatorKind::conv: return aggregate_conv(g, clips);
  }
  return clips;
}

Var AggregatorModel::snippet_logits(Graph& g, Var clips, Rng* dropout_rng) const {
  return classify(g, represent(g, clips, dropout_rng));
}

Tensor AggregatorModel::predict_logits(const Tensor& clips) const {
  Graph g(false);
  return snippet_logits(g, g.constant(clips)).value();
}

Tensor AggregatorModel::predict_probabilities(const Tensor& clips) const {
  return sigmoid(predict_logits(clips));
}

std::filesystem::path config_path_for(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p.replace_extension(".json");
  return p;
}

void AggregatorModel::save(const std::filesystem::path& checkpoint) const {
  ts::write_checkpoint(checkpoint, params_);
  detail::write_text_file(config_path_for(checkpoint), config_to_json(config_));
}

AggregatorModel AggregatorModel::load(const std::filesystem::path& checkpoint) {
  auto config = config_from_json(detail::read_text_file(config_path_for(checkpoint)));
  AggregatorModel model(config);
  ts::load_values(model.params_, ts::read_checkpoint(checkpoint));
  return model;
}

Tensor fuse_logits(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) fail(ErrorKind::dimension, "fused logits must have equal widths");
  Tensor out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (a[k] + b[k]) / 2.0;
  return out;
}

Tensor sigmoid(const Tensor& logits) {
  Tensor p = logits;
  for (auto& v : p.values()) v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  return p;
}

}  // namespace divita::agg
