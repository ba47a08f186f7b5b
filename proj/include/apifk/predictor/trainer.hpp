#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apifk/log_model.hpp"
#include "apifk/predictor/model.hpp"

namespace apifk::predictor {

struct TrainConfig {
  std::size_t minibatch = 128;
  double momentum = 0.9;
  double initial_lr = 0.01;
  std::size_t lr_halvings = 10;
  std::size_t epochs_per_halving = 3;
  // Defaults to lr_halvings * epochs_per_halving.
  std::optional<std::size_t> epochs;
  // Defaults to default_init_std(variant).
  std::optional<double> init_std;
  std::uint64_t seed = 42;

  std::size_t total_epochs() const { return epochs.value_or(lr_halvings * epochs_per_halving); }
};

// Throws InvalidConfig for non-positive settings.
void validate(const TrainConfig& cfg);

// initial_lr * 2^-min(floor(epoch / epochs_per_halving), lr_halvings)
double learning_rate(const TrainConfig& cfg, std::size_t epoch);

// Rates for epochs 0 .. lr_halvings * epochs_per_halving inclusive; the last
// entry is the rate after the final halving.
std::vector<double> lr_schedule(const TrainConfig& cfg);

struct ModelSpec {
  Variant variant = Variant::Tiny;
  Alphabet alphabet = Alphabet::default_alphabet();
  std::optional<std::size_t> input_length;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;  // from the training-mode (dropout) forward passes
  std::size_t batches = 0;
};

struct TrainResult {
  ConvNetModel model;
  std::vector<EpochMetrics> epochs;
};

// "Right" first, then error codes in ascending order.
std::vector<std::string> collect_labels(std::span<const ApiCallRecord> records);

// Weights ~ N(0, std) from the seeded stream; biases zero.
void initialize(ConvNetModel& model, double std, std::uint64_t seed);

void sgd_momentum_step(std::span<double> weights, std::span<double> velocity,
                       std::span<const double> gradient, double lr, double momentum);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Throws InsufficientData unless the records span at least two classes.
TrainResult train(std::span<const ApiCallRecord> dataset, const ModelSpec& spec,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

struct Prediction {
  OutcomeLabel label;
  double probability = 0.0;
  std::vector<double> probabilities;  // aligned with model.labels()
};

// Argmax with ties resolved toward the earlier label.
Prediction predict(const ConvNetModel& model, const ApiCallRecord& record);
Prediction predict(const ConvNetModel& model, const std::string& api, const ParamList& params);

struct ClassPrecision {
  std::size_t predicted = 0;
  std::size_t correct = 0;
  double precision = 0.0;
};

struct PrecisionReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double overall = 0.0;  // correct / total
  double macro = 0.0;    // mean over classes that were predicted at least once
  std::map<std::string, ClassPrecision> per_class;
};

// Throws LengthMismatch.
PrecisionReport precision(std::span<const OutcomeLabel> predictions,
                          std::span<const OutcomeLabel> truths);

}  // namespace apifk::predictor
