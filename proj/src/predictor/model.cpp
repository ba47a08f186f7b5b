#include "apifk/predictor/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "apifk/errors.hpp"
#include "apifk/log_model.hpp"

namespace apifk::predictor {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Large: return "large";
    case Variant::Small: return "small";
    case Variant::Tiny: break;
  }
  return "tiny";
}

Variant variant_from_string(const std::string& text) {
  if (text == "large") return Variant::Large;
  if (text == "small") return Variant::Small;
  if (text == "tiny") return Variant::Tiny;
  throw InvalidConfig("unknown model variant '" + text + "'");
}

std::size_t ModelConfig::conv_output_length() const {
  std::size_t len = input_length;
  for (const auto& layer : conv) {
    len = output_length(len, layer.kernel, layer.stride);
    if (layer.pool) len = output_length(len, *layer.pool, *layer.pool);
  }
  return len;
}

std::size_t ModelConfig::parameter_count() const {
  std::size_t n = 0;
  for (const auto& s : parameter_layout(*this)) n += s.weight_count + s.bias_count;
  return n;
}

std::vector<ParamSlice> parameter_layout(const ModelConfig& config) {
  std::vector<ParamSlice> layout;
  std::size_t offset = 0;
  auto push = [&](std::size_t weights, std::size_t biases) {
    ParamSlice s{offset, weights, offset + weights, biases};
    offset += weights + biases;
    layout.push_back(s);
  };
  for (const auto& c : config.conv) push(c.shape().weight_count(), c.out_features);
  std::size_t in = config.flattened_size();
  for (std::size_t out : config.fc) {
    push(out * in, out);
    in = out;
  }
  return layout;
}

ModelConfig make_config(Variant variant, std::size_t alphabet_size, std::size_t num_labels,
                        std::optional<std::size_t> input_length) {
  std::size_t frame = 0;
  std::size_t hidden = 0;
  std::size_t l0 = kDefaultInputLength;
  switch (variant) {
    case Variant::Large:
      frame = 1024;
      hidden = 2048;
      break;
    case Variant::Small:
      frame = 256;
      hidden = 1024;
      break;
    case Variant::Tiny:
      frame = 64;
      hidden = 128;
      l0 = 256;
      break;
  }
  ModelConfig c;
  c.variant = variant;
  c.input_length = input_length.value_or(l0);
  c.conv[0] = {alphabet_size, frame, 7, 1, 3};
  c.conv[1] = {frame, frame, 7, 1, 3};
  c.conv[2] = {frame, frame, 3, 1, std::nullopt};
  c.conv[3] = {frame, frame, 3, 1, std::nullopt};
  c.conv[4] = {frame, frame, 3, 1, std::nullopt};
  c.conv[5] = {frame, frame, 3, 1, 3};
  c.fc = {hidden, hidden, num_labels};
  c.dropout = 0.5;
  return c;
}

double default_init_std(Variant variant) {
  switch (variant) {
    case Variant::Large: return 0.02;
    case Variant::Small: return 0.05;
    case Variant::Tiny: break;
  }
  // With 64-wide frames and one-hot input, 0.05 starves the upper layers and
  // training stalls at the majority class.
  return 0.1;
}

ConvNetModel::ConvNetModel(ModelConfig config, Alphabet alphabet, std::vector<std::string> labels)
    : config_(std::move(config)), alphabet_(std::move(alphabet)), labels_(std::move(labels)) {
  std::set<std::string> unique(labels_.begin(), labels_.end());
  if (unique.size() != labels_.size()) {
    throw InvalidConfig("label list repeats a label");
  }
  if (!unique.contains(std::string(OutcomeLabel::kRight))) {
    throw InvalidConfig("label list must contain Right");
  }
  if (config_.fc.back() != labels_.size()) {
    throw InvalidConfig("output layer size does not match label count");
  }
  if (config_.conv[0].in_features != alphabet_.size()) {
    throw InvalidConfig("first conv layer width does not match alphabet size");
  }
  for (std::size_t l = 1; l < kConvLayers; ++l) {
    if (config_.conv[l].in_features != config_.conv[l - 1].out_features) {
      throw ShapeError("conv layer " + std::to_string(l + 1) + " input width mismatch");
    }
  }
  if (!(config_.dropout >= 0.0 && config_.dropout < 1.0)) {
    throw InvalidConfig("dropout probability must be in [0, 1)");
  }
  layout_ = parameter_layout(config_);
  params_.assign(config_.parameter_count(), 0.0);
}

std::size_t ConvNetModel::label_index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw UnknownLabel("unknown label " + label);
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

bool ConvNetModel::operator==(const ConvNetModel& other) const {
  return config_ == other.config_ && alphabet_ == other.alphabet_ && labels_ == other.labels_ &&
         params_ == other.params_;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::span<const double> weights_of(const ConvNetModel& m, std::size_t layer) {
  const auto& s = m.layout()[layer];
  return m.parameters().subspan(s.weight_offset, s.weight_count);
}

std::span<const double> bias_of(const ConvNetModel& m, std::size_t layer) {
  const auto& s = m.layout()[layer];
  return m.parameters().subspan(s.bias_offset, s.bias_count);
}

const Matrix& conv_result(const ForwardCache& cache, const ModelConfig& cfg, std::size_t l) {
  return cfg.conv[l].pool ? cache.pooled[l] : cache.conv_out[l];
}

void run_forward(const ConvNetModel& model, const QuantizedInput& input, Mode mode,
                 std::uint64_t dropout_seed, ForwardCache& cache, std::vector<double>& logits) {
  const auto& cfg = model.config();
  if (input.alphabet_size != model.alphabet().size() || input.length() != cfg.input_length) {
    throw ShapeError("input is " + std::to_string(input.alphabet_size) + "x" +
                     std::to_string(input.length()) + ", model expects " +
                     std::to_string(model.alphabet().size()) + "x" +
                     std::to_string(cfg.input_length));
  }
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const auto& layer = cfg.conv[l];
    if (l == 0) {
      conv1d_forward_onehot(input, weights_of(model, l), bias_of(model, l), layer.shape(),
                            cache.conv_out[l]);
    } else {
      conv1d_forward(conv_result(cache, cfg, l - 1), weights_of(model, l), bias_of(model, l),
                     layer.shape(), cache.conv_out[l]);
    }
    relu_inplace(cache.conv_out[l].data);
    if (layer.pool) {
      maxpool1d(cache.conv_out[l], *layer.pool, *layer.pool, cache.pooled[l], cache.argmax[l]);
    }
  }
  const Matrix& last = conv_result(cache, cfg, kConvLayers - 1);
  cache.flat = last.data;

  const double keep = 1.0 - cfg.dropout;
  std::mt19937_64 rng(dropout_seed);
  std::span<const double> in = cache.flat;
  for (std::size_t f = 0; f < kFcLayers; ++f) {
    const std::size_t layer = kConvLayers + f;
    auto& out = f + 1 < kFcLayers ? cache.fc_out[f] : logits;
    out.assign(cfg.fc[f], 0.0);
    dense_forward(in, weights_of(model, layer), bias_of(model, layer), out);
    if (f + 1 < kFcLayers) {
      relu_inplace(out);
      auto& scale = cache.dropout_scale[f];
      scale.assign(out.size(), 1.0);
      if (mode == Mode::Train && cfg.dropout > 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) {
          const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
          scale[i] = u < keep ? 1.0 / keep : 0.0;
          out[i] *= scale[i];
        }
      }
      in = out;
    }
  }
}

}  // namespace

ForwardResult forward(const ConvNetModel& model, const QuantizedInput& input, Mode mode,
                      std::uint64_t dropout_seed, ForwardCache* cache) {
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  ForwardResult result;
  run_forward(model, input, mode, dropout_seed, c, result.logits);
  result.probabilities.assign(result.logits.size(), 0.0);
  softmax(result.logits, result.probabilities);
  return result;
}

Gradients loss_and_backward(const ConvNetModel& model, std::span<const Example> batch, Mode mode,
                            std::uint64_t seed_base) {
  if (batch.empty()) {
    throw EmptyInput("loss_and_backward on an empty batch");
  }
  const auto& cfg = model.config();
  const auto num_labels = model.labels().size();
  for (const auto& ex : batch) {
    if (ex.label >= num_labels) {
      throw UnknownLabel("label index " + std::to_string(ex.label) + " out of range");
    }
  }

  Gradients grad;
  grad.values.assign(model.parameters().size(), 0.0);
  auto slice_w = [&](std::size_t layer) {
    const auto& s = model.layout()[layer];
    return std::span<double>(grad.values).subspan(s.weight_offset, s.weight_count);
  };
  auto slice_b = [&](std::size_t layer) {
    const auto& s = model.layout()[layer];
    return std::span<double>(grad.values).subspan(s.bias_offset, s.bias_count);
  };

  ForwardCache cache;
  std::vector<double> logits;
  std::vector<double> probs;
  std::array<std::vector<double>, kFcLayers> dfc;  // gradient wrt each FC layer's output
  std::vector<double> dflat;
  Matrix dcur;
  Matrix dconv;
  double total_loss = 0.0;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ex = batch[b];
    run_forward(model, ex.input, mode, mix_seed(seed_base, b), cache, logits);
    probs.assign(logits.size(), 0.0);
    softmax(logits, probs);

    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - peak);
    total_loss += peak + std::log(sum) - logits[ex.label];
    if (static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) -
                                 logits.begin()) == ex.label) {
      ++grad.correct;
    }

    dfc[kFcLayers - 1] = probs;
    dfc[kFcLayers - 1][ex.label] -= 1.0;

    for (std::size_t f = kFcLayers; f-- > 0;) {
      const std::size_t layer = kConvLayers + f;
      const std::vector<double>& in = f == 0 ? cache.flat : cache.fc_out[f - 1];
      std::vector<double>& din = f == 0 ? dflat : dfc[f - 1];
      din.assign(in.size(), 0.0);
      dense_backward(in, weights_of(model, layer), dfc[f], slice_w(layer), slice_b(layer), din);
      if (f > 0) {
        const auto& scale = cache.dropout_scale[f - 1];
        for (std::size_t i = 0; i < din.size(); ++i) din[i] *= scale[i];
        relu_backward(cache.fc_out[f - 1], din);
      }
    }

    const Matrix& last = conv_result(cache, cfg, kConvLayers - 1);
    dcur.rows = last.rows;
    dcur.cols = last.cols;
    dcur.data = dflat;
    for (std::size_t l = kConvLayers; l-- > 0;) {
      const auto& layer = cfg.conv[l];
      if (layer.pool) {
        maxpool1d_backward(dcur, cache.argmax[l], cache.conv_out[l].cols, dconv);
      } else {
        std::swap(dconv, dcur);
      }
      relu_backward(cache.conv_out[l].data, dconv.data);
      if (l == 0) {
        conv1d_backward_onehot(ex.input, layer.shape(), dconv, slice_w(l), slice_b(l));
      } else {
        conv1d_backward(conv_result(cache, cfg, l - 1), weights_of(model, l), layer.shape(),
                        dconv, slice_w(l), slice_b(l), &dcur);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad.values) g *= inv;
  grad.loss = total_loss * inv;
  return grad;
}

}  // namespace apifk::predictor
