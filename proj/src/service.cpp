#include "apifk/service.hpp"

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <regex>

#include "apifk/errors.hpp"
#include "apifk/knowledge_store.hpp"
#include "apifk/predictor/checkpoint.hpp"
#include "apifk/predictor/trainer.hpp"

namespace apifk {

using ojson = nlohmann::ordered_json;

SuccessRateReport compute_sr(std::span<const ApiCallRecord> records) {
  SuccessRateReport r;
  r.call_number = records.size();
  for (const auto& rec : records) {
    if (rec.outcome.is_right()) ++r.call_success;
  }
  r.sr = r.call_number == 0
             ? 0.0
             : static_cast<double>(r.call_success) / static_cast<double>(r.call_number);
  return r;
}

nlohmann::ordered_json to_json(const SuccessRateReport& report) {
  return {{"call_number", report.call_number},
          {"call_success", report.call_success},
          {"sr", report.sr}};
}

std::string resolve_knowledge_dir(const std::string& configured) {
  if (const char* env = std::getenv("APIFK_KNOWLEDGE_DIR"); env && *env) return env;
  return configured;
}

namespace {

using Snapshot = std::map<std::string, ApiKnowledge>;

HttpResponse json_response(int status, const ojson& body) { return {status, body.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, ojson{{"error", message}});
}

struct BadRequest : Error {
  using Error::Error;
};

ParamList params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw BadRequest("\"params\" must be an object of strings");
  ParamList out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw BadRequest("parameter " + k + " must be a string");
    out.emplace_back(k, v.get<std::string>());
  }
  return out;
}

// {"api": string, "params": {..}}; params may be omitted.
std::pair<std::string, ParamList> parse_call_body(const std::string& body,
                                                  nlohmann::json* parsed = nullptr) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BadRequest(std::string("body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw BadRequest("body must be a JSON object");
  if (!j.contains("api") || !j["api"].is_string() || j["api"].get<std::string>().empty()) {
    throw BadRequest("\"api\" must be a non-empty string");
  }
  ParamList params;
  if (j.contains("params")) params = params_from_json(j["params"]);
  if (parsed) *parsed = j;
  return {j["api"].get<std::string>(), std::move(params)};
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  std::string knowledge_dir;
  std::optional<predictor::ConvNetModel> model;

  mutable std::mutex snapshot_mu;
  std::shared_ptr<const Snapshot> snapshot = std::make_shared<Snapshot>();

  mutable std::mutex data_mu;  // guards records, history and the log file
  std::vector<ApiCallRecord> base_records;
  std::vector<ApiCallRecord> ingested;
  std::vector<ApiCallRecord> history;
  std::atomic<bool> rebuilding{false};

  httplib::Server server;

  std::shared_ptr<const Snapshot> current() const {
    std::lock_guard lock(snapshot_mu);
    return snapshot;
  }

  void swap(std::shared_ptr<const Snapshot> next) {
    std::lock_guard lock(snapshot_mu);
    snapshot = std::move(next);
  }

  bool known_api(const Snapshot& snap, const std::string& api) const {
    return snap.contains(api) || config.catalog.find(api) != nullptr;
  }

  HttpResponse list_apis() const {
    const auto snap = current();
    ojson apis = ojson::array();
    for (const auto& [name, doc] : *snap) {
      std::vector<std::string> params;
      for (const auto& [p, _] : doc.params) params.push_back(p);
      apis.push_back({{"name", name},
                      {"record_count", doc.record_count},
                      {"generated_at", doc.generated_at},
                      {"params", params}});
    }
    return json_response(200, ojson{{"apis", std::move(apis)}});
  }

  HttpResponse knowledge(const std::string& api) const {
    const auto snap = current();
    auto it = snap->find(api);
    if (it == snap->end()) return error_response(404, "unknown api " + api);
    return json_response(200, to_json(it->second));
  }

  HttpResponse producers(const std::string& api, const std::string& param,
                         const std::map<std::string, std::string>& query) const {
    std::size_t k = 5;
    if (auto q = query.find("k"); q != query.end()) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(q->second, &used);
        if (used != q->second.size() || v <= 0) throw std::invalid_argument("k");
        k = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        return error_response(400, "k must be a positive integer");
      }
    }
    const auto snap = current();
    auto it = snap->find(api);
    if (it == snap->end()) return error_response(404, "unknown api " + api);
    if (!it->second.param(param)) {
      return error_response(404, "unknown parameter " + param + " of " + api);
    }
    ojson out = ojson::array();
    for (const auto& e : it->second.dependencies) {
      if (e.input_param != param) continue;
      if (out.size() >= k) break;
      out.push_back({{"producer_api", e.producer_api}, {"score", e.score}});
    }
    return json_response(200,
                         ojson{{"api", api}, {"param", param}, {"producers", std::move(out)}});
  }

  HttpResponse predict(const std::string& body) const {
    const auto [api, params] = parse_call_body(body);
    const auto snap = current();
    if (!known_api(*snap, api)) return error_response(404, "unknown api " + api);

    ojson prediction = nullptr;
    if (model) {
      const auto p = predictor::predict(*model, api, params);
      ojson probs = ojson::object();
      for (std::size_t i = 0; i < model->labels().size(); ++i) {
        probs[model->labels()[i]] = p.probabilities[i];
      }
      prediction = {{"label", p.label.str()},
                    {"probability", p.probability},
                    {"probabilities", std::move(probs)}};
    }
    ojson checks = ojson::array();
    ojson violations = ojson::array();
    if (auto it = snap->find(api); it != snap->end()) {
      for (const auto& c : check_constraints(it->second, params)) {
        ojson cj = {{"param", c.param}, {"kind", c.kind}, {"ok", c.ok}, {"detail", c.detail}};
        if (!c.ok) violations.push_back(cj);
        checks.push_back(std::move(cj));
      }
    }
    return json_response(200, ojson{{"api", api},
                                    {"prediction", std::move(prediction)},
                                    {"checks", std::move(checks)},
                                    {"violations", std::move(violations)}});
  }

  HttpResponse call(const std::string& body) {
    nlohmann::json j;
    auto [api, params] = parse_call_body(body, &j);
    if (!config.scenario.find(api)) return error_response(404, "unknown api " + api);
    std::string session = "console";
    if (j.contains("session")) {
      if (!j["session"].is_string() || j["session"].get<std::string>().empty()) {
        throw BadRequest("\"session\" must be a non-empty string");
      }
      session = j["session"].get<std::string>();
    }
    ApiCallRecord r;
    r.api = api;
    r.params = std::move(params);
    r.outcome = sim::evaluate(config.scenario, api, r.params);
    r.session_id = session;
    std::lock_guard lock(data_mu);
    r.timestamp = static_cast<std::int64_t>(history.size());
    history.push_back(r);
    const auto report = compute_sr(history);
    return json_response(200, ojson{{"api", api},
                                    {"outcome", r.outcome.str()},
                                    {"call_index", history.size() - 1},
                                    {"sr", to_json(report)}});
  }

  HttpResponse ingest(const std::string& body) {
    if (rebuilding.load()) return error_response(409, "knowledge rebuild in progress");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw BadRequest(std::string("body is not JSON: ") + e.what());
    }
    const nlohmann::json* list = &j;
    nlohmann::json single;
    if (j.is_object() && j.contains("records")) {
      list = &j["records"];
    } else if (j.is_object()) {
      single = nlohmann::json::array({j});
      list = &single;
    }
    if (!list->is_array()) throw BadRequest("expected a record, an array or {\"records\": [...]}");
    std::vector<ApiCallRecord> batch;
    for (std::size_t i = 0; i < list->size(); ++i) {
      try {
        auto rec = parse_record((*list)[i].dump(), i + 1);
        if (!rec) throw BadRequest("record " + std::to_string(i + 1) + " is empty");
        batch.push_back(std::move(*rec));
      } catch (const MalformedRecord& e) {
        throw BadRequest(e.what());
      }
    }
    std::lock_guard lock(data_mu);
    // Re-check under the lock: a rebuild snapshots the records while holding it.
    if (rebuilding.load()) return error_response(409, "knowledge rebuild in progress");
    if (config.log_path) {
      std::ofstream out(*config.log_path, std::ios::app | std::ios::binary);
      if (!out) throw IoError("cannot append to " + *config.log_path);
      for (const auto& r : batch) out << serialize_record(r) << '\n';
    }
    ingested.insert(ingested.end(), batch.begin(), batch.end());
    return json_response(200, ojson{{"accepted", batch.size()}, {"total_ingested", ingested.size()}});
  }

  bool rebuild() {
    bool expected = false;
    if (!rebuilding.compare_exchange_strong(expected, true)) return false;
    struct Reset {
      std::atomic<bool>& flag;
      ~Reset() { flag.store(false); }
    } reset{rebuilding};

    std::vector<ApiCallRecord> records;
    {
      std::lock_guard lock(data_mu);
      records = base_records;
      records.insert(records.end(), ingested.begin(), ingested.end());
    }
    if (config.rebuild_hook) config.rebuild_hook();
    auto docs = std::make_shared<Snapshot>(mine_knowledge(records, config.catalog, config.mining));
    save_all(*docs, knowledge_dir);
    swap(std::move(docs));
    return true;
  }

  HttpResponse dispatch(const std::string& method, const std::string& path,
                        const std::map<std::string, std::string>& query,
                        const std::string& body) {
    static const std::regex knowledge_re(R"(^/v1/apis/([^/]+)/knowledge$)");
    static const std::regex producers_re(R"(^/v1/apis/([^/]+)/params/([^/]+)/producers$)");
    std::smatch m;
    const auto only = [&](const char* allowed) -> std::optional<HttpResponse> {
      if (method == allowed) return std::nullopt;
      return error_response(405, "use " + std::string(allowed) + " for " + path);
    };
    if (path == "/v1/apis") {
      if (auto r = only("GET")) return *r;
      return list_apis();
    }
    if (std::regex_match(path, m, knowledge_re)) {
      if (auto r = only("GET")) return *r;
      return knowledge(m[1].str());
    }
    if (std::regex_match(path, m, producers_re)) {
      if (auto r = only("GET")) return *r;
      return producers(m[1].str(), m[2].str(), query);
    }
    if (path == "/v1/predict") {
      if (auto r = only("POST")) return *r;
      return predict(body);
    }
    if (path == "/v1/call") {
      if (auto r = only("POST")) return *r;
      return call(body);
    }
    if (path == "/v1/ingest") {
      if (auto r = only("POST")) return *r;
      return ingest(body);
    }
    if (path == "/v1/rebuild") {
      if (auto r = only("POST")) return *r;
      if (!rebuild()) return error_response(409, "knowledge rebuild in progress");
      const auto snap = current();
      return json_response(200, ojson{{"apis", snap->size()}, {"knowledge_dir", knowledge_dir}});
    }
    if (path == "/v1/metrics/sr") {
      if (auto r = only("GET")) return *r;
      std::lock_guard lock(data_mu);
      return json_response(200, to_json(compute_sr(history)));
    }
    return error_response(404, "no route for " + path);
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  auto& cfg = impl_->config;
  sim::validate(cfg.scenario);
  if (cfg.catalog.empty()) cfg.catalog = cfg.scenario.catalog();
  validate(cfg.mining);
  impl_->knowledge_dir = resolve_knowledge_dir(cfg.knowledge_dir);
  if (cfg.model_path) impl_->model = predictor::load_checkpoint(*cfg.model_path);
  if (cfg.log_path && std::filesystem::exists(*cfg.log_path)) {
    impl_->base_records = load_log(*cfg.log_path).records;
  }
  if (std::filesystem::is_directory(impl_->knowledge_dir)) {
    impl_->swap(std::make_shared<Snapshot>(load_all(impl_->knowledge_dir)));
  }

  impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                     {"Access-Control-Allow-Headers", "Content-Type"}});
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const auto out = handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  impl_->server.Get(".*", forward);
  impl_->server.Post(".*", forward);
  impl_->server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  });
}

Service::~Service() { stop(); }

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query,
                             const std::string& body) {
  try {
    return impl_->dispatch(method, path, query, body);
  } catch (const BadRequest& e) {
    return error_response(400, e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, e.what());
  } catch (const Error& e) {
    return error_response(500, e.what());
  }
}

bool Service::rebuild() { return impl_->rebuild(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::run() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

SuccessRateReport Service::call_metrics() const {
  std::lock_guard lock(impl_->data_mu);
  return compute_sr(impl_->history);
}

std::size_t Service::ingested_count() const {
  std::lock_guard lock(impl_->data_mu);
  return impl_->ingested.size();
}

}  // namespace apifk
