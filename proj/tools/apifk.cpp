// Command-line front end: simulate, mine, train, predict, serve, sr.
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "json.hpp"

#include "apifk/errors.hpp"
#include "apifk/knowledge_store.hpp"
#include "apifk/log_model.hpp"
#include "apifk/mining.hpp"
#include "apifk/predictor/checkpoint.hpp"
#include "apifk/predictor/trainer.hpp"
#include "apifk/service.hpp"
#include "apifk/simulator.hpp"

namespace {

using namespace apifk;

apifk::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(path + ": " + e.what());
  }
}

ApiCatalog load_catalog(const std::optional<std::string>& catalog_path,
                        const std::optional<std::string>& scenario_path) {
  if (catalog_path) return catalog_from_json(read_json(*catalog_path));
  if (scenario_path) return sim::load_scenario(*scenario_path).catalog();
  return sim::default_scenario().catalog();
}

struct Options {
  std::string log;
  std::string out;
  std::string model;
  std::string request;
  std::string variant = "tiny";
  std::string knowledge = "knowledge";
  std::string host = "127.0.0.1";
  std::optional<std::string> catalog;
  std::optional<std::string> scenario;
  std::optional<std::size_t> epochs;
  std::optional<double> init_std;
  std::optional<std::size_t> input_length;
  std::uint64_t seed = 7;
  std::size_t n = 1000;
  std::size_t threshold = kDefaultEnumThreshold;
  std::size_t top_k = 10;
  std::size_t minibatch = 128;
  double alpha = 1.0;
  double beta = 1.0;
  double sigma = 1.0;
  double holdout = 0.0;
  int port = 8080;
  bool write_scenario = false;
  bool seed_given = false;
};

int cmd_simulate(const Options& o) {
  auto scenario = o.scenario ? sim::load_scenario(*o.scenario) : sim::default_scenario(o.seed);
  if (o.scenario && o.seed_given) scenario.seed = o.seed;
  if (o.write_scenario) {
    std::cout << sim::to_json(scenario).dump(2) << '\n';
    return 0;
  }
  const auto records = sim::generate(scenario, o.n);
  write_log(o.out, records);
  const auto sr = compute_sr(records);
  std::cout << "wrote " << records.size() << " records to " << o.out << " (sr "
            << sr.call_success << "/" << sr.call_number << ")\n";
  return 0;
}

int cmd_mine(const Options& o) {
  const auto log = load_log(o.log);
  MiningOptions mining;
  mining.enum_threshold = o.threshold;
  mining.top_k = o.top_k;
  mining.rank.weights = {o.alpha, o.beta, o.sigma};
  const auto docs = mine_knowledge(log.records, load_catalog(o.catalog, o.scenario), mining);
  const auto paths = save_all(docs, resolve_knowledge_dir(o.out));
  for (const auto& p : paths) std::cout << p << '\n';
  std::cout << log.records.size() << " records, " << log.skipped << " skipped, "
            << paths.size() << " documents\n";
  for (const auto& d : log.diagnostics) std::cerr << "skipped: " << d << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  const auto log = load_log(o.log);
  auto records = log.records;
  std::vector<ApiCallRecord> held_out;
  if (o.holdout > 0.0) {
    const auto keep =
        records.size() - static_cast<std::size_t>(static_cast<double>(records.size()) * o.holdout);
    held_out.assign(records.begin() + static_cast<std::ptrdiff_t>(keep), records.end());
    records.resize(keep);
  }
  predictor::ModelSpec spec;
  spec.variant = predictor::variant_from_string(o.variant);
  spec.input_length = o.input_length;
  predictor::TrainConfig cfg;
  cfg.seed = o.seed;
  cfg.epochs = o.epochs;
  cfg.init_std = o.init_std;
  cfg.minibatch = o.minibatch;
  auto result = predictor::train(records, spec, cfg, [](const predictor::EpochMetrics& m) {
    std::cout << "epoch " << m.epoch << " lr " << m.learning_rate << " loss " << m.mean_loss
              << " train_acc " << m.train_accuracy << '\n'
              << std::flush;
  });
  predictor::save_checkpoint(result.model, o.out);
  std::cout << "saved " << o.out << '\n';
  if (!held_out.empty()) {
    std::vector<OutcomeLabel> preds, truths;
    for (const auto& r : held_out) {
      preds.push_back(predictor::predict(result.model, r).label);
      truths.push_back(r.outcome);
    }
    const auto report = predictor::precision(preds, truths);
    std::cout << "held-out precision " << report.overall << " (" << report.correct << "/"
              << report.total << ")\n";
  }
  return 0;
}

int cmd_predict(const Options& o) {
  const auto model = predictor::load_checkpoint(o.model);
  const auto body = read_json(o.request);
  if (!body.is_object() || !body.contains("api") || !body["api"].is_string()) {
    throw InvalidConfig("request must be {\"api\": string, \"params\": {...}}");
  }
  ParamList params;
  if (body.contains("params")) {
    for (const auto& [k, v] : body["params"].items()) {
      if (!v.is_string()) throw InvalidConfig("parameter " + k + " must be a string");
      params.emplace_back(k, v.get<std::string>());
    }
  }
  const auto p = predictor::predict(model, body["api"].get<std::string>(), params);
  nlohmann::ordered_json probs = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < model.labels().size(); ++i) {
    probs[model.labels()[i]] = p.probabilities[i];
  }
  std::cout << nlohmann::ordered_json{{"label", p.label.str()},
                                      {"probability", p.probability},
                                      {"probabilities", probs}}
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_serve(const Options& o) {
  ServiceConfig cfg;
  cfg.knowledge_dir = o.knowledge;
  if (!o.model.empty()) cfg.model_path = o.model;
  if (!o.log.empty()) cfg.log_path = o.log;
  if (o.scenario) cfg.scenario = sim::load_scenario(*o.scenario);
  if (o.catalog) cfg.catalog = catalog_from_json(read_json(*o.catalog));
  cfg.mining.enum_threshold = o.threshold;
  cfg.mining.top_k = o.top_k;
  cfg.mining.rank.weights = {o.alpha, o.beta, o.sigma};
  Service service(std::move(cfg));
  const int port = service.bind(o.host, o.port);
  if (port < 0) throw IoError("cannot bind " + o.host + ":" + std::to_string(o.port));
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << o.host << ":" << port << "/v1\n" << std::flush;
  service.run();
  g_service = nullptr;
  return 0;
}

int cmd_sr(const Options& o) {
  const auto log = load_log(o.log);
  std::cout << to_json(compute_sr(log.records)).dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"API log knowledge mining and pre-call outcome prediction"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic call log");
  simulate->add_option("--out", o.out, "Output log (JSON lines)");
  simulate->add_option("--n", o.n, "Number of records");
  auto* simulate_seed = simulate->add_option("--seed", o.seed, "Scenario seed (overrides the scenario file's)");
  simulate->add_option("--scenario", o.scenario, "Scenario JSON (default: built-in SMS scenario)");
  simulate->add_flag("--write-scenario", o.write_scenario, "Print the scenario JSON and exit");
  simulate->callback([&] {
    if (o.out.empty() && !o.write_scenario) throw CLI::RequiredError("--out");
    o.seed_given = simulate_seed->count() > 0;
  });

  auto* mine = app.add_subcommand("mine", "Mine knowledge documents from a log");
  mine->add_option("--log", o.log, "Input log")->required();
  mine->add_option("--out", o.out, "Knowledge directory")->required();
  mine->add_option("--catalog", o.catalog, "API catalog JSON");
  mine->add_option("--scenario", o.scenario, "Take the catalog from a scenario file");
  mine->add_option("--threshold", o.threshold, "Enumeration threshold");
  mine->add_option("--top-k", o.top_k, "Producers kept per input parameter");
  mine->add_option("--alpha", o.alpha, "Ranking weight alpha");
  mine->add_option("--beta", o.beta, "Ranking weight beta");
  mine->add_option("--sigma", o.sigma, "Ranking weight sigma");

  auto* train = app.add_subcommand("train", "Train the outcome predictor");
  train->add_option("--log", o.log, "Training log")->required();
  train->add_option("--out", o.out, "Checkpoint path")->required();
  train->add_option("--variant", o.variant, "large | small | tiny")
      ->check(CLI::IsMember({"large", "small", "tiny"}));
  train->add_option("--seed", o.seed, "Initialization and shuffling seed");
  train->add_option("--epochs", o.epochs, "Epoch count (default: full schedule)");
  train->add_option("--init-std", o.init_std, "Gaussian init std");
  train->add_option("--input-length", o.input_length, "Quantization length l0");
  train->add_option("--minibatch", o.minibatch, "Minibatch size");
  train->add_option("--holdout", o.holdout, "Trailing fraction kept for evaluation")
      ->check(CLI::Range(0.0, 0.9));

  auto* predict = app.add_subcommand("predict", "Predict the outcome of one request");
  predict->add_option("--model", o.model, "Checkpoint")->required();
  predict->add_option("--request", o.request, "Request JSON {api, params}")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--knowledge", o.knowledge, "Knowledge directory (APIFK_KNOWLEDGE_DIR wins)");
  serve->add_option("--model", o.model, "Checkpoint");
  serve->add_option("--log", o.log, "Base log; ingested records are appended to it");
  serve->add_option("--scenario", o.scenario, "Scenario backing POST /v1/call");
  serve->add_option("--catalog", o.catalog, "API catalog JSON");
  serve->add_option("--threshold", o.threshold, "Enumeration threshold for rebuilds");
  serve->add_option("--top-k", o.top_k, "Producers kept per input parameter");
  serve->add_option("--alpha", o.alpha, "Ranking weight alpha");
  serve->add_option("--beta", o.beta, "Ranking weight beta");
  serve->add_option("--sigma", o.sigma, "Ranking weight sigma");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port (0 picks a free one)");

  auto* sr = app.add_subcommand("sr", "Success rate of a log");
  sr->add_option("--log", o.log, "Input log")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*mine) return cmd_mine(o);
    if (*train) return cmd_train(o);
    if (*predict) return cmd_predict(o);
    if (*serve) return cmd_serve(o);
    if (*sr) return cmd_sr(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
