#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <random>

#include "apifk/errors.hpp"
#include "apifk/param_abstraction.hpp"
#include "apifk/simulator.hpp"
#include "temp_dir.hpp"

namespace apifk::sim {
namespace {

TEST(GenerateValue, Shapes) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto phone = generate_value(DigitsGen{11, "1"}, rng);
    EXPECT_EQ(phone.size(), 11u);
    EXPECT_EQ(phone[0], '1');
    EXPECT_EQ(transform(phone), "ddddddddddd");
    EXPECT_EQ(transform(generate_value(PrefixedIdGen{"SMS_", 9, ""}, rng)), "XXX_ddddddddd");
    const auto text = generate_value(FreeTextGen{4, 8, Charset::Lower}, rng);
    EXPECT_GE(text.size(), 4u);
    EXPECT_LE(text.size(), 8u);
    const auto n = std::stoll(generate_value(IntegerGen{-3, 5}, rng));
    EXPECT_GE(n, -3);
    EXPECT_LE(n, 5);
    EXPECT_EQ(transform(generate_value(ShapeGen{"ddd-xX_z"}, rng)), "ddd-xX_z");
    const auto e = generate_value(EnumGen{{"a", "b"}}, rng);
    EXPECT_TRUE(e == "a" || e == "b");
  }
}

TEST(Predicates, Match) {
  const ParamList p = {{"SignName", "hanxing"}, {"Phone", "123"}, {"N", "7"}};
  EXPECT_TRUE(matches(MissingPred{"X"}, p));
  EXPECT_FALSE(matches(MissingPred{"Phone"}, p));
  EXPECT_FALSE(matches(NotInPred{"SignName", {"hanxing"}, false}, p));
  EXPECT_TRUE(matches(NotInPred{"SignName", {"aliyun"}, false}, p));
  EXPECT_FALSE(matches(NotInPred{"Missing", {"a"}, false}, p));
  EXPECT_TRUE(matches(NotInPred{"Missing", {"a"}, true}, p));
  EXPECT_FALSE(matches(NotShapePred{"Phone", "ddd", false}, p));
  EXPECT_TRUE(matches(NotShapePred{"Phone", "dddd", false}, p));
  EXPECT_TRUE(matches(OutOfRangePred{"N", 0, 5, false}, p));
  EXPECT_FALSE(matches(OutOfRangePred{"N", 0, 9, false}, p));
  EXPECT_TRUE(matches(OutOfRangePred{"SignName", 0, 9, false}, p));
}

TEST(ExactQuotas, LargestRemainder) {
  EXPECT_EQ(exact_quotas(1000, {0.7, 0.3}), (std::vector<std::size_t>{700, 300}));
  EXPECT_EQ(exact_quotas(10, {1.0 / 3, 1.0 / 3, 1.0 / 3}), (std::vector<std::size_t>{4, 3, 3}));
  EXPECT_EQ(exact_quotas(0, {0.5, 0.5}), (std::vector<std::size_t>{0, 0}));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> w(1 + rng() % 6);
    double total = 0.0;
    for (auto& x : w) total += (x = 1.0 + static_cast<double>(rng() % 100));
    for (auto& x : w) x /= total;
    const std::size_t n = rng() % 5000;
    const auto q = exact_quotas(n, w);
    std::size_t sum = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      sum += q[k];
      EXPECT_LE(std::abs(static_cast<double>(q[k]) - w[k] * static_cast<double>(n)), 1.0);
    }
    EXPECT_EQ(sum, n);
  }
}

TEST(Generate, EmptyAndDeterministic) {
  const auto s = default_scenario(5);
  EXPECT_TRUE(generate(s, 0).empty());
  const auto a = generate(s, 500);
  EXPECT_EQ(a, generate(s, 500));
  EXPECT_NE(a, generate(default_scenario(6), 500));
}

TEST(Generate, ApiSharesAndMixAreExact) {
  const auto records = generate(default_scenario(5), 1000);
  std::map<std::string, int> per_api;
  int with_out_id = 0;
  for (const auto& r : records) {
    ++per_api[r.api];
    if (r.api == "SendSms") {
      for (const auto& [k, v] : r.params) with_out_id += k == "OutId";
    }
  }
  EXPECT_EQ(per_api["SendSms"], 600);
  EXPECT_EQ(per_api["AddSmsSign"], 400);
  // Corruption only drops SignName, never OutId.
  EXPECT_EQ(with_out_id, 180);

  const auto mix = generate(sequence_mix_scenario(3), 1000);
  int seven = 0, three = 0;
  for (const auto& r : mix) (r.params.size() == 4 ? seven : three)++;
  EXPECT_EQ(seven, 700);
  EXPECT_EQ(three, 300);
}

TEST(Generate, OutcomesFollowRules) {
  const auto s = default_scenario(9);
  const auto records = generate(s, 2000);
  std::map<std::string, int> outcomes;
  std::int64_t last_ts = -1;
  for (const auto& r : records) {
    EXPECT_EQ(r.outcome, evaluate(s, r.api, r.params));
    EXPECT_GT(r.timestamp, last_ts);
    last_ts = r.timestamp;
    ++outcomes[r.outcome.str()];
  }
  EXPECT_EQ(outcomes.size(), 6u);
  for (const auto& [code, n] : outcomes) EXPECT_GT(n, 20) << code;
}

TEST(Evaluate, FirstMatchingRuleWins) {
  const auto s = default_scenario();
  EXPECT_EQ(evaluate(s, "SendSms", {{"PhoneNumbers", "12345678901"}, {"SignName", "hanxing"},
                                    {"TemplateCode", "SMS_123456789"}, {"TemplateParam", "{}"}}),
            OutcomeLabel::right());
  EXPECT_EQ(evaluate(s, "SendSms", {{"PhoneNumbers", "1"}, {"TemplateCode", "SMS_123456789"}}).str(),
            "isv.SMS_SIGNATURE_ILLEGAL");
  EXPECT_EQ(evaluate(s, "SendSms", {{"PhoneNumbers", "1"}, {"SignName", "aliyun"},
                                    {"TemplateCode", "SMS_123456789"}})
                .str(),
            "isv.MOBILE_NUMBER_ILLEGAL");
  EXPECT_EQ(evaluate(s, "AddSmsSign", {{"SignName", "x"}, {"SignSource", "7"}, {"Remark", "r"}})
                .str(),
            "isv.SIGN_SOURCE_ILLEGAL");
  EXPECT_EQ(evaluate(s, "AddSmsSign", {{"SignName", "x"}, {"SignSource", "1"}}).str(),
            "MissingRemark");
  EXPECT_EQ(evaluate(s, "Unknown", {}), OutcomeLabel::right());
}

TEST(Scenario, JsonRoundTripAndValidation) {
  const auto s = default_scenario(4);
  const auto back = scenario_from_json(to_json(s));
  EXPECT_EQ(to_json(back), to_json(s));
  EXPECT_EQ(generate(back, 300), generate(s, 300));

  auto j = to_json(s);
  j["apis"][0]["sequence_mix"][0]["probability"] = 0.1;
  EXPECT_THROW(scenario_from_json(j), InvalidConfig);
  j = to_json(s);
  j["apis"][0]["generators"]["PhoneNumbers"]["kind"] = "nonsense";
  EXPECT_THROW(scenario_from_json(j), InvalidConfig);
  EXPECT_THROW(scenario_from_json(nlohmann::json::array()), InvalidConfig);

  TempDir dir;
  {
    std::ofstream out(dir.file("s.json"));
    out << to_json(s).dump();
  }
  EXPECT_EQ(to_json(load_scenario(dir.file("s.json"))), to_json(s));
  EXPECT_THROW(load_scenario(dir.file("nope.json")), IoError);
}

TEST(Scenario, CatalogFromSpecs) {
  const auto c = default_scenario().catalog();
  EXPECT_EQ(c.size(), 2u);
  EXPECT_TRUE(c.find("AddSmsSign")->has_output("SignName"));
  EXPECT_TRUE(c.find("SendSms")->has_input("SignName"));
}

}  // namespace
}  // namespace apifk::sim
