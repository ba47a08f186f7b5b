#include "apifk/predictor/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "apifk/errors.hpp"

namespace apifk::predictor {

void validate(const TrainConfig& cfg) {
  if (cfg.minibatch == 0 || cfg.epochs_per_halving == 0 || !(cfg.initial_lr > 0.0) ||
      !(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw InvalidConfig("invalid training configuration");
  }
  if (cfg.init_std && !(*cfg.init_std > 0.0)) {
    throw InvalidConfig("init std must be positive");
  }
}

double learning_rate(const TrainConfig& cfg, std::size_t epoch) {
  const std::size_t halvings = std::min(epoch / cfg.epochs_per_halving, cfg.lr_halvings);
  return std::ldexp(cfg.initial_lr, -static_cast<int>(halvings));
}

std::vector<double> lr_schedule(const TrainConfig& cfg) {
  std::vector<double> out;
  const std::size_t horizon = cfg.lr_halvings * cfg.epochs_per_halving;
  for (std::size_t e = 0; e <= horizon; ++e) out.push_back(learning_rate(cfg, e));
  return out;
}

std::vector<std::string> collect_labels(std::span<const ApiCallRecord> records) {
  std::set<std::string> codes;
  for (const auto& r : records) {
    if (!r.outcome.is_right()) codes.insert(r.outcome.code());
  }
  std::vector<std::string> labels{std::string(OutcomeLabel::kRight)};
  labels.insert(labels.end(), codes.begin(), codes.end());
  return labels;
}

void initialize(ConvNetModel& model, double std, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std);
  auto params = model.parameters();
  for (const auto& slice : model.layout()) {
    for (std::size_t i = 0; i < slice.weight_count; ++i) {
      params[slice.weight_offset + i] = normal(rng);
    }
    for (std::size_t i = 0; i < slice.bias_count; ++i) params[slice.bias_offset + i] = 0.0;
  }
}

void sgd_momentum_step(std::span<double> weights, std::span<double> velocity,
                       std::span<const double> gradient, double lr, double momentum) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    velocity[i] = momentum * velocity[i] - lr * gradient[i];
    weights[i] += velocity[i];
  }
}

TrainResult train(std::span<const ApiCallRecord> dataset, const ModelSpec& spec,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  validate(cfg);
  auto labels = collect_labels(dataset);
  if (labels.size() < 2 || dataset.size() < 2) {
    throw InsufficientData("training needs records from at least two classes");
  }
  bool has_right = false;
  for (const auto& r : dataset) has_right = has_right || r.outcome.is_right();
  if (!has_right && labels.size() < 3) {
    throw InsufficientData("training needs records from at least two classes");
  }

  auto config = make_config(spec.variant, spec.alphabet.size(), labels.size(), spec.input_length);
  config.conv_output_length();  // surfaces ShapeError before allocating
  ConvNetModel model(config, spec.alphabet, labels);
  initialize(model, cfg.init_std.value_or(default_init_std(spec.variant)), cfg.seed);

  std::vector<Example> examples;
  examples.reserve(dataset.size());
  for (const auto& r : dataset) {
    examples.push_back({model.encode(serialize_request(r)), model.label_index(r.outcome.str())});
  }

  std::vector<double> velocity(model.parameters().size(), 0.0);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x5348));
  std::vector<Example> batch;
  batch.reserve(cfg.minibatch);

  TrainResult result{std::move(model), {}};
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.total_epochs(); ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const double lr = learning_rate(cfg, epoch);
    EpochMetrics m;
    m.epoch = epoch;
    m.learning_rate = lr;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
      const std::size_t end = std::min(start + cfg.minibatch, order.size());
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
      auto grad = loss_and_backward(result.model, batch, Mode::Train,
                                    mix_seed(cfg.seed ^ 0xD80F, step++));
      sgd_momentum_step(result.model.parameters(), velocity, grad.values, lr, cfg.momentum);
      loss_sum += grad.loss * static_cast<double>(batch.size());
      correct += grad.correct;
      ++m.batches;
    }
    m.mean_loss = loss_sum / static_cast<double>(order.size());
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
    result.epochs.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return result;
}

Prediction predict(const ConvNetModel& model, const std::string& api, const ParamList& params) {
  const auto out = forward(model, model.encode(serialize_request(api, params)), Mode::Eval);
  // max_element returns the first maximum, i.e. the earliest label on ties.
  const auto best = std::max_element(out.probabilities.begin(), out.probabilities.end());
  const auto idx = static_cast<std::size_t>(best - out.probabilities.begin());
  return Prediction{OutcomeLabel::parse(model.labels()[idx]), *best, out.probabilities};
}

Prediction predict(const ConvNetModel& model, const ApiCallRecord& record) {
  return predict(model, record.api, record.params);
}

PrecisionReport precision(std::span<const OutcomeLabel> predictions,
                          std::span<const OutcomeLabel> truths) {
  if (predictions.size() != truths.size()) {
    throw LengthMismatch("precision: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(truths.size()) + " truths");
  }
  PrecisionReport report;
  report.total = predictions.size();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto& cls = report.per_class[predictions[i].str()];
    ++cls.predicted;
    if (predictions[i] == truths[i]) {
      ++cls.correct;
      ++report.correct;
    }
  }
  double macro_sum = 0.0;
  for (auto& [label, cls] : report.per_class) {
    cls.precision = static_cast<double>(cls.correct) / static_cast<double>(cls.predicted);
    macro_sum += cls.precision;
  }
  if (report.total > 0) {
    report.overall = static_cast<double>(report.correct) / static_cast<double>(report.total);
    report.macro = macro_sum / static_cast<double>(report.per_class.size());
  }
  return report;
}

}  // namespace apifk::predictor
