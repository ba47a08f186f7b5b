#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "apifk/dependency_graph.hpp"
#include "apifk/log_model.hpp"
#include "apifk/mining.hpp"
#include "apifk/simulator.hpp"

namespace apifk {

struct SuccessRateReport {
  std::uint64_t call_number = 0;
  std::uint64_t call_success = 0;
  double sr = 0.0;  // 0 when there are no calls

  bool operator==(const SuccessRateReport&) const = default;
};

SuccessRateReport compute_sr(std::span<const ApiCallRecord> records);
nlohmann::ordered_json to_json(const SuccessRateReport& report);

struct ServiceConfig {
  std::string knowledge_dir = "knowledge";
  std::optional<std::string> model_path;
  // Records mined on rebuild together with everything ingested since start.
  // Ingested lines are also appended to this file when it is set.
  std::optional<std::string> log_path;
  sim::SimScenario scenario = sim::default_scenario();  // backs POST /call
  ApiCatalog catalog;  // empty: taken from the scenario
  MiningOptions mining;
  // Called in the middle of a rebuild, while ingest is locked out.
  std::function<void()> rebuild_hook;
};

// knowledge_dir unless APIFK_KNOWLEDGE_DIR is set.
std::string resolve_knowledge_dir(const std::string& configured);

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// HTTP facade over the knowledge store, predictor and simulator. All routes
// live under /v1:
//
//   GET  /v1/apis
//   GET  /v1/apis/{name}/knowledge
//   GET  /v1/apis/{name}/params/{param}/producers?k=
//   POST /v1/predict     {"api", "params"}
//   POST /v1/call        {"api", "params", "session"?}
//   POST /v1/ingest      log-line object, array of them, or {"records": [...]}
//   POST /v1/rebuild
//   GET  /v1/metrics/sr
//
// Errors are {"error": message} with 400, 404, 405 or 409.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Routing without sockets. Safe to call concurrently.
  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query,
                      const std::string& body);

  // Mines base + ingested records, writes the documents and swaps the
  // served snapshot. Returns false if a rebuild is already running.
  bool rebuild();

  // Binds (port 0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool run();
  void stop();

  SuccessRateReport call_metrics() const;
  std::size_t ingested_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace apifk
