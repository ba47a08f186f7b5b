#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apifk/predictor/alphabet.hpp"
#include "apifk/predictor/layers.hpp"
#include "apifk/predictor/quantize.hpp"

namespace apifk::predictor {

enum class Variant : std::uint8_t { Large = 0, Small = 1, Tiny = 2 };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& text);

struct ConvLayerCfg {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::optional<std::size_t> pool;  // pool size == pool stride

  ConvShape shape() const { return {in_features, out_features, kernel, stride}; }
  bool operator==(const ConvLayerCfg&) const = default;
};

inline constexpr std::size_t kConvLayers = 6;
inline constexpr std::size_t kFcLayers = 3;

struct ModelConfig {
  Variant variant = Variant::Tiny;
  std::size_t input_length = kDefaultInputLength;  // l0
  std::array<ConvLayerCfg, kConvLayers> conv{};
  std::array<std::size_t, kFcLayers> fc{};  // last entry == number of labels
  double dropout = 0.5;

  // Frame length after the sixth conv layer (and its pool). Throws
  // ShapeError if any layer would see an input shorter than its window.
  std::size_t conv_output_length() const;
  std::size_t frame_size() const { return conv.back().out_features; }
  std::size_t flattened_size() const { return frame_size() * conv_output_length(); }
  std::size_t parameter_count() const;

  bool operator==(const ModelConfig&) const = default;
};

// Per-variant layer stack: kernels 7,7,3,3,3,3, stride 1, max-pool 3/3 after
// layers 1, 2 and 6. Frame sizes 1024 / 256 / 64, hidden FC 2048 / 1024 / 128.
// Tiny defaults to l0 = 256; Large and Small to 1014.
ModelConfig make_config(Variant variant, std::size_t alphabet_size, std::size_t num_labels,
                        std::optional<std::size_t> input_length = std::nullopt);

// Initialization std for the variant: 0.02 Large, 0.05 Small, 0.1 Tiny.
double default_init_std(Variant variant);

struct ParamSlice {
  std::size_t weight_offset = 0;
  std::size_t weight_count = 0;
  std::size_t bias_offset = 0;
  std::size_t bias_count = 0;
};

// Flat parameter layout: for each conv layer then each FC layer, weights
// followed by biases.
std::vector<ParamSlice> parameter_layout(const ModelConfig& config);

class ConvNetModel {
 public:
  // Parameters start at zero. Throws InvalidConfig when the label list lacks
  // "Right", repeats a label, or does not match the output layer size.
  ConvNetModel(ModelConfig config, Alphabet alphabet, std::vector<std::string> labels);

  const ModelConfig& config() const { return config_; }
  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<ParamSlice>& layout() const { return layout_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Throws UnknownLabel.
  std::size_t label_index(const std::string& label) const;

  QuantizedInput encode(const std::string& text) const {
    return quantize(text, alphabet_, config_.input_length);
  }

  bool operator==(const ConvNetModel& other) const;

 private:
  ModelConfig config_;
  Alphabet alphabet_;
  std::vector<std::string> labels_;
  std::vector<ParamSlice> layout_;
  std::vector<double> params_;
};

enum class Mode { Train, Eval };

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> probabilities;
};

// Intermediate activations kept for the backward pass; reusable across
// calls to avoid reallocation.
struct ForwardCache {
  std::array<Matrix, kConvLayers> conv_out;  // post-ReLU, pre-pool
  std::array<Matrix, kConvLayers> pooled;    // post-pool (only for pooled layers)
  std::array<std::vector<std::uint32_t>, kConvLayers> argmax;
  std::array<std::vector<double>, kFcLayers> fc_out;  // post-ReLU(+dropout) for hidden layers
  std::array<std::vector<double>, kFcLayers - 1> dropout_scale;
  std::vector<double> flat;
  std::vector<double> probabilities;
};

// Throws ShapeError if the input does not match the model's m x l0.
ForwardResult forward(const ConvNetModel& model, const QuantizedInput& input, Mode mode,
                      std::uint64_t dropout_seed = 0, ForwardCache* cache = nullptr);

struct Example {
  QuantizedInput input;
  std::size_t label = 0;
};

struct Gradients {
  std::vector<double> values;  // same layout as the model parameters
  double loss = 0.0;           // mean cross-entropy over the batch
  std::size_t correct = 0;     // examples whose argmax matched the label
};

// Mean multinomial cross-entropy over the batch and its gradient. In Train
// mode dropout masks are drawn from seed_base + example position. Throws
// UnknownLabel for out-of-range labels and EmptyInput for an empty batch.
Gradients loss_and_backward(const ConvNetModel& model, std::span<const Example> batch,
                            Mode mode = Mode::Train, std::uint64_t seed_base = 0);

// Per-sample seed derivation used for dropout streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace apifk::predictor
