#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace apifk {

enum class ParamType { String, Integer, Decimal, Unknown };

struct ParamSpec {
  std::string name;
  std::optional<bool> declared_required;
  ParamType declared_type = ParamType::Unknown;

  bool operator==(const ParamSpec&) const = default;
};

struct ApiSpec {
  std::string name;
  std::vector<ParamSpec> input_params;
  std::vector<ParamSpec> output_params;

  bool has_input(std::string_view param) const;
  bool has_output(std::string_view param) const;

  bool operator==(const ApiSpec&) const = default;
};

// Throws InvalidConfig when the name is empty or a parameter list repeats a
// name.
void validate(const ApiSpec& spec);

std::string to_string(ParamType type);
ParamType param_type_from_string(std::string_view text);

nlohmann::json to_json(const ApiSpec& spec);
ApiSpec api_spec_from_json(const nlohmann::json& j);

// Either the reserved success class "Right" or an error code.
class OutcomeLabel {
 public:
  static constexpr std::string_view kRight = "Right";

  OutcomeLabel() = default;  // Right
  static OutcomeLabel right() { return OutcomeLabel(); }
  static OutcomeLabel error(std::string code);
  // "Right" maps to the success class; every other non-empty string is an
  // error code.
  static OutcomeLabel parse(std::string_view text);

  bool is_right() const noexcept { return code_.empty(); }
  // Empty for Right.
  const std::string& code() const noexcept { return code_; }
  std::string str() const { return is_right() ? std::string(kRight) : code_; }

  bool operator==(const OutcomeLabel&) const = default;
  auto operator<=>(const OutcomeLabel&) const = default;

 private:
  std::string code_;
};

using ParamList = std::vector<std::pair<std::string, std::string>>;

struct ApiCallRecord {
  std::string api;
  ParamList params;  // log order
  OutcomeLabel outcome;
  std::string session_id;
  std::int64_t timestamp = 0;  // epoch ms

  const std::string* find(std::string_view name) const;
  bool has(std::string_view name) const { return find(name) != nullptr; }

  bool operator==(const ApiCallRecord&) const = default;
};

// Checks the record invariants; throws MalformedRecord(line, reason).
void validate(const ApiCallRecord& record, std::size_t line = 0);

// Parses one log line. Returns nullopt for blank lines (skip signal).
// Throws MalformedRecord on schema violations; unknown fields are ignored.
std::optional<ApiCallRecord> parse_record(std::string_view line, std::size_t line_number = 0);

// Canonical one-line JSON form; parse_record(serialize_record(r)) == r.
std::string serialize_record(const ApiCallRecord& record);

struct LoadedLog {
  std::vector<ApiCallRecord> records;
  std::size_t skipped = 0;
  std::vector<std::string> diagnostics;  // first few malformed-line messages
};

// Streams records in file order. Malformed lines are skipped and counted.
// Returns the number of skipped lines. Throws IoError if unreadable.
std::size_t for_each_record(const std::string& path,
                            const std::function<void(ApiCallRecord&&)>& sink,
                            std::vector<std::string>* diagnostics = nullptr);

LoadedLog load_log(const std::string& path);

void write_log(const std::string& path, const std::vector<ApiCallRecord>& records);

}  // namespace apifk
