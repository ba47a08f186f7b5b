#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "apifk/errors.hpp"
#include "apifk/knowledge_store.hpp"
#include "apifk/mining.hpp"
#include "apifk/simulator.hpp"
#include "temp_dir.hpp"

namespace apifk {
namespace {

std::map<std::string, ApiKnowledge> mined(std::size_t n, std::uint64_t seed = 11) {
  const auto scenario = sim::default_scenario(seed);
  return mine_knowledge(sim::generate(scenario, n), scenario.catalog());
}

TEST(Knowledge, JsonRoundTrip) {
  for (const auto& [api, doc] : mined(600)) {
    const auto back = knowledge_from_json(nlohmann::json::parse(dump_knowledge(doc)));
    EXPECT_EQ(back, doc) << api;
    EXPECT_EQ(dump_knowledge(back), dump_knowledge(doc));
  }
}

// Required keys listed in schema/api_knowledge.schema.json must all be emitted.
TEST(Knowledge, MatchesPublishedSchema) {
  std::ifstream in(APIFK_SCHEMA_PATH);
  ASSERT_TRUE(in);
  const auto schema = nlohmann::json::parse(in);
  const auto j = nlohmann::json::parse(dump_knowledge(mined(600).at("AddSmsSign")));
  for (const auto& key : schema["required"]) EXPECT_TRUE(j.contains(key.get<std::string>())) << key;
  for (const auto& key : j.items()) EXPECT_TRUE(schema["properties"].contains(key.key())) << key.key();
  const auto& param_schema = schema["$defs"]["param"];
  for (const auto& p : j["params"]) {
    for (const auto& key : param_schema["required"]) EXPECT_TRUE(p.contains(key.get<std::string>())) << key;
    for (const auto& key : p.items()) EXPECT_TRUE(param_schema["properties"].contains(key.key())) << key.key();
    EXPECT_LE(p["examples"].size(), 3u);
  }
}

TEST(Knowledge, DocumentShape) {
  const auto docs = mined(600);
  const auto j = nlohmann::json::parse(dump_knowledge(docs.at("SendSms")));
  EXPECT_EQ(j["schema_version"], kKnowledgeSchemaVersion);
  EXPECT_EQ(j["api"], "SendSms");
  ASSERT_TRUE(j["params"].is_array());
  const auto& first = j["params"][0];
  for (const char* key : {"name", "patterns", "lengths", "enum", "enum_values", "numeric_range",
                          "required", "examples", "common_subsequence"}) {
    EXPECT_TRUE(first.contains(key)) << key;
  }
  EXPECT_TRUE(j["sequences"].is_array());
  EXPECT_TRUE(j["dependencies"].is_array());
}

TEST(Knowledge, VersionMismatchAndMalformed) {
  auto j = nlohmann::json::parse(dump_knowledge(mined(100).at("SendSms")));
  j["schema_version"] = kKnowledgeSchemaVersion + 1;
  EXPECT_THROW(knowledge_from_json(j), SchemaVersionMismatch);
  j["schema_version"] = kKnowledgeSchemaVersion;
  j["params"] = "nope";
  EXPECT_THROW(knowledge_from_json(j), MalformedDocument);
  EXPECT_THROW(knowledge_from_json(nlohmann::json::array()), MalformedDocument);
}

TEST(Knowledge, FileIo) {
  TempDir dir;
  const auto docs = mined(300);
  const auto paths = save_all(docs, dir.file("k"));
  EXPECT_EQ(paths.size(), docs.size());
  EXPECT_EQ(load_all(dir.file("k")), docs);
  EXPECT_THROW(load(dir.file("k/missing.json")), IoError);

  const auto text = dump_knowledge(docs.at("SendSms"));
  {
    std::ofstream out(dir.file("trunc.json"));
    out << text.substr(0, text.size() / 2);
  }
  EXPECT_THROW(load(dir.file("trunc.json")), MalformedDocument);
}

TEST(Knowledge, FilenameSanitized) {
  EXPECT_EQ(knowledge_filename("SendSms"), "SendSms.json");
  EXPECT_EQ(knowledge_filename("a/b c"), "a_b_c.json");
  EXPECT_EQ(knowledge_filename("v1.Api-x_y"), "v1.Api-x_y.json");
}

TEST(Knowledge, OneDocumentPerApi) {
  ApiCatalog catalog;
  std::vector<ApiCallRecord> records;
  for (int a = 0; a < 5; ++a) {
    const std::string name = "Api" + std::to_string(a);
    catalog.add(ApiSpec{name, {{"p", {}, ParamType::Unknown}}, {{"q", {}, ParamType::Unknown}}});
    for (int i = 0; i < 10; ++i) {
      ApiCallRecord r;
      r.api = name;
      r.params = {{"p", std::to_string(i)}};
      r.outcome = OutcomeLabel::right();
      r.session_id = "s" + std::to_string(i);
      r.timestamp = i;
      records.push_back(r);
    }
  }
  const auto docs = mine_knowledge(records, catalog);
  EXPECT_EQ(docs.size(), 5u);
  TempDir dir;
  EXPECT_EQ(save_all(docs, dir.path()).size(), 5u);
  EXPECT_EQ(load_all(dir.path()).size(), 5u);
}

TEST(MergeDaily, EmptyBatchLeavesKnowledgeUnchanged) {
  const auto docs = mined(600);
  for (const auto& [api, doc] : docs) {
    ApiKnowledge empty;
    empty.api = api;
    const auto merged = merge_daily(doc, empty);
    EXPECT_EQ(merged.params.size(), doc.params.size());
    for (const auto& [name, p] : doc.params) {
      const auto& m = merged.params.at(name);
      EXPECT_EQ(m.profile, p.profile) << name;
      EXPECT_EQ(m.enum_state, p.enum_state) << name;
      EXPECT_EQ(m.numeric_range, p.numeric_range) << name;
      EXPECT_EQ(m.required, p.required) << name;
      EXPECT_EQ(m.examples, p.examples) << name;
    }
    EXPECT_EQ(merged.sequences, doc.sequences);
    EXPECT_EQ(merged.dependencies, doc.dependencies);
    EXPECT_EQ(merged.record_count, doc.record_count);
    EXPECT_EQ(merged.generated_at, doc.generated_at);
  }
}

TEST(MergeDaily, MatchesFullRecompute) {
  const auto scenario = sim::default_scenario(13);
  const auto catalog = scenario.catalog();
  const auto records = sim::generate(scenario, 1200);
  for (std::size_t cut : {std::size_t{1}, std::size_t{400}, std::size_t{777}}) {
    const std::span<const ApiCallRecord> all(records);
    const auto day1 = mine_knowledge(all.first(cut), catalog);
    const auto day2 = mine_knowledge(all.subspan(cut), catalog);
    const auto full = mine_knowledge(all, catalog);
    for (const auto& [api, whole] : full) {
      const auto merged = merge_daily(day1.at(api), day2.at(api));
      EXPECT_EQ(merged.record_count, whole.record_count);
      EXPECT_EQ(merged.success_count, whole.success_count);
      EXPECT_EQ(merged.generated_at, whole.generated_at);
      EXPECT_EQ(merged.sequences, whole.sequences) << api;
      for (const auto& [name, p] : whole.params) {
        const auto& m = merged.params.at(name);
        EXPECT_EQ(m.profile.patterns, p.profile.patterns) << api << "." << name;
        EXPECT_EQ(m.profile.lengths, p.profile.lengths) << api << "." << name;
        EXPECT_EQ(m.profile.values_seen, p.profile.values_seen);
        EXPECT_EQ(m.enum_state, p.enum_state) << api << "." << name;
        EXPECT_EQ(m.numeric_range, p.numeric_range) << api << "." << name;
        EXPECT_EQ(m.required, p.required) << api << "." << name;
        // LCS has no exact combiner; the merged one must still fit every value.
        for (const auto& r : records) {
          if (r.api != api || !r.outcome.is_right()) continue;
          for (const auto& [k, v] : r.params) {
            if (k == name) EXPECT_TRUE(is_subsequence(m.profile.common_subsequence, v));
          }
        }
      }
    }
  }
}

TEST(MergeDaily, NotEnumerableStaysAndApiMismatchThrows) {
  auto docs = mined(600);
  auto& send = docs.at("SendSms");
  ASSERT_FALSE(send.params.at("PhoneNumbers").enum_state.enumerable());
  const auto again = merge_daily(send, send);
  EXPECT_FALSE(again.params.at("PhoneNumbers").enum_state.enumerable());
  EXPECT_TRUE(again.params.at("PhoneNumbers").enum_state.values.empty());
  EXPECT_THROW(merge_daily(send, docs.at("AddSmsSign")), ApiMismatch);
}

TEST(MergeDaily, NewParameterAppears) {
  ApiKnowledge a, b;
  a.api = b.api = "X";
  a.success_count = 40;
  a.record_count = 40;
  b.success_count = 10;
  b.record_count = 10;
  ParamKnowledge p;
  p.name = "fresh";
  p.enum_state.key = {"X", "fresh"};
  p.required = {10, 10, false};
  b.params["fresh"] = p;
  const auto m = merge_daily(a, b);
  ASSERT_TRUE(m.param("fresh"));
  EXPECT_EQ(m.param("fresh")->required.present_count, 10u);
  EXPECT_EQ(m.param("fresh")->required.total_success_count, 50u);
  EXPECT_FALSE(m.param("fresh")->required.inferred_required);
}

TEST(SortEdges, Order) {
  std::vector<DependencyEdge> e = {{"C", "b", "Z", 0.5}, {"C", "a", "Y", 0.1},
                                   {"C", "a", "X", 0.1}, {"C", "a", "W", 0.9}};
  sort_edges(e);
  EXPECT_EQ(e[0].producer_api, "W");
  EXPECT_EQ(e[1].producer_api, "X");
  EXPECT_EQ(e[2].producer_api, "Y");
  EXPECT_EQ(e[3].input_param, "b");
}

}  // namespace
}  // namespace apifk
