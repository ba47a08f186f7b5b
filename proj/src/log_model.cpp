#include "apifk/log_model.hpp"

#include <fstream>
#include <set>

#include "apifk/errors.hpp"

namespace apifk {

namespace {

constexpr std::size_t kMaxDiagnostics = 16;

bool is_blank(std::string_view line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') {
      return false;
    }
  }
  return true;
}

void check_unique(const std::vector<ParamSpec>& params, const std::string& api,
                  const char* which) {
  std::set<std::string_view> seen;
  for (const auto& p : params) {
    if (p.name.empty()) {
      throw InvalidConfig("api " + api + ": empty " + which + " parameter name");
    }
    if (!seen.insert(p.name).second) {
      throw InvalidConfig("api " + api + ": duplicate " + which + " parameter " + p.name);
    }
  }
}

nlohmann::json params_to_json(const std::vector<ParamSpec>& params) {
  auto arr = nlohmann::json::array();
  for (const auto& p : params) {
    nlohmann::json j = {{"name", p.name}, {"type", to_string(p.declared_type)}};
    if (p.declared_required) {
      j["required"] = *p.declared_required;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<ParamSpec> params_from_json(const nlohmann::json& arr) {
  std::vector<ParamSpec> out;
  if (arr.is_null()) {
    return out;
  }
  if (!arr.is_array()) {
    throw InvalidConfig("parameter list must be an array");
  }
  for (const auto& j : arr) {
    ParamSpec p;
    if (j.is_string()) {
      p.name = j.get<std::string>();
    } else {
      p.name = j.at("name").get<std::string>();
      if (j.contains("type")) {
        p.declared_type = param_type_from_string(j["type"].get<std::string>());
      }
      if (j.contains("required") && !j["required"].is_null()) {
        p.declared_required = j["required"].get<bool>();
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

bool ApiSpec::has_input(std::string_view param) const {
  for (const auto& p : input_params) {
    if (p.name == param) return true;
  }
  return false;
}

bool ApiSpec::has_output(std::string_view param) const {
  for (const auto& p : output_params) {
    if (p.name == param) return true;
  }
  return false;
}

void validate(const ApiSpec& spec) {
  if (spec.name.empty()) {
    throw InvalidConfig("api spec with empty name");
  }
  check_unique(spec.input_params, spec.name, "input");
  check_unique(spec.output_params, spec.name, "output");
}

std::string to_string(ParamType type) {
  switch (type) {
    case ParamType::String: return "string";
    case ParamType::Integer: return "integer";
    case ParamType::Decimal: return "decimal";
    case ParamType::Unknown: break;
  }
  return "unknown";
}

ParamType param_type_from_string(std::string_view text) {
  if (text == "string") return ParamType::String;
  if (text == "integer") return ParamType::Integer;
  if (text == "decimal") return ParamType::Decimal;
  return ParamType::Unknown;
}

nlohmann::json to_json(const ApiSpec& spec) {
  return {{"name", spec.name},
          {"inputs", params_to_json(spec.input_params)},
          {"outputs", params_to_json(spec.output_params)}};
}

ApiSpec api_spec_from_json(const nlohmann::json& j) {
  ApiSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    spec.input_params = params_from_json(j.value("inputs", nlohmann::json()));
    spec.output_params = params_from_json(j.value("outputs", nlohmann::json()));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("api spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

OutcomeLabel OutcomeLabel::error(std::string code) {
  if (code.empty()) {
    throw Error("error outcome with empty code");
  }
  if (code == kRight) {
    return right();
  }
  OutcomeLabel label;
  label.code_ = std::move(code);
  return label;
}

OutcomeLabel OutcomeLabel::parse(std::string_view text) {
  if (text == kRight) {
    return right();
  }
  return error(std::string(text));
}

const std::string* ApiCallRecord::find(std::string_view name) const {
  for (const auto& [k, v] : params) {
    if (k == name) return &v;
  }
  return nullptr;
}

void validate(const ApiCallRecord& record, std::size_t line) {
  if (record.api.empty()) {
    throw MalformedRecord(line, "empty api");
  }
  if (record.timestamp < 0) {
    throw MalformedRecord(line, "negative timestamp");
  }
  std::set<std::string_view> seen;
  for (const auto& [k, v] : record.params) {
    if (!seen.insert(k).second) {
      throw MalformedRecord(line, "duplicate parameter " + k);
    }
  }
}

std::optional<ApiCallRecord> parse_record(std::string_view line, std::size_t line_number) {
  if (is_blank(line)) {
    return std::nullopt;
  }
  // ordered_json keeps parameters in log order.
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedRecord(line_number, std::string("invalid json: ") + e.what());
  }
  if (!j.is_object()) {
    throw MalformedRecord(line_number, "record is not an object");
  }

  auto require = [&](const char* key) -> const nlohmann::ordered_json& {
    auto it = j.find(key);
    if (it == j.end()) {
      throw MalformedRecord(line_number, std::string("missing field ") + key);
    }
    return *it;
  };

  ApiCallRecord r;
  const auto& api = require("api");
  if (!api.is_string()) throw MalformedRecord(line_number, "api must be a string");
  r.api = api.get<std::string>();

  const auto& params = require("params");
  if (!params.is_object()) throw MalformedRecord(line_number, "params must be an object");
  for (const auto& [k, v] : params.items()) {
    if (!v.is_string()) {
      throw MalformedRecord(line_number, "parameter " + k + " must be a string");
    }
    r.params.emplace_back(k, v.get<std::string>());
  }

  const auto& outcome = require("outcome");
  if (!outcome.is_string() || outcome.get_ref<const std::string&>().empty()) {
    throw MalformedRecord(line_number, "outcome must be a non-empty string");
  }
  r.outcome = OutcomeLabel::parse(outcome.get<std::string>());

  const auto& session = require("session");
  if (!session.is_string()) throw MalformedRecord(line_number, "session must be a string");
  r.session_id = session.get<std::string>();

  const auto& ts = require("ts");
  if (!ts.is_number_integer()) throw MalformedRecord(line_number, "ts must be an integer");
  r.timestamp = ts.get<std::int64_t>();

  validate(r, line_number);
  return r;
}

std::string serialize_record(const ApiCallRecord& record) {
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : record.params) {
    params[k] = v;
  }
  nlohmann::ordered_json j;
  j["api"] = record.api;
  j["params"] = std::move(params);
  j["outcome"] = record.outcome.str();
  j["session"] = record.session_id;
  j["ts"] = record.timestamp;
  return j.dump();
}

std::size_t for_each_record(const std::string& path,
                            const std::function<void(ApiCallRecord&&)>& sink,
                            std::vector<std::string>* diagnostics) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open log " + path);
  }
  std::size_t skipped = 0;
  std::size_t line_number = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    try {
      auto record = parse_record(line, line_number);
      if (record) {
        sink(std::move(*record));
      }
    } catch (const MalformedRecord& e) {
      ++skipped;
      if (diagnostics && diagnostics->size() < kMaxDiagnostics) {
        diagnostics->push_back(e.what());
      }
    }
  }
  if (in.bad()) {
    throw IoError("read error on " + path);
  }
  return skipped;
}

LoadedLog load_log(const std::string& path) {
  LoadedLog log;
  log.skipped = for_each_record(
      path, [&](ApiCallRecord&& r) { log.records.push_back(std::move(r)); }, &log.diagnostics);
  return log;
}

void write_log(const std::string& path, const std::vector<ApiCallRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write log " + path);
  }
  for (const auto& r : records) {
    out << serialize_record(r) << '\n';
  }
  if (!out) {
    throw IoError("write error on " + path);
  }
}

}  // namespace apifk
