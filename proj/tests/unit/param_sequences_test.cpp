#include <gtest/gtest.h>

#include <random>

#include "apifk/param_sequences.hpp"
#include "apifk/simulator.hpp"

namespace apifk {
namespace {

ApiCallRecord call(std::string api, std::vector<std::string> names, bool ok = true) {
  ApiCallRecord r;
  r.api = std::move(api);
  for (auto& n : names) r.params.emplace_back(std::move(n), "v");
  r.outcome = ok ? OutcomeLabel::right() : OutcomeLabel::error("E");
  r.session_id = "s";
  return r;
}

TEST(MakeKey, SortsAndDeduplicates) {
  const auto key = make_key("A", {"c", "a", "b", "a"});
  EXPECT_EQ(key.params, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Filter, DropsSystemParameters) {
  const auto kept = filter_parameters({"Signature", "PhoneNumbers", "Action", "Version"},
                                      FilterConfig::defaults());
  EXPECT_EQ(kept, (std::vector<std::string>{"PhoneNumbers"}));
  FilterConfig prefixes;
  prefixes.prefixes = {"X-"};
  EXPECT_EQ(filter_parameters({"X-Trace", "Y"}, prefixes), (std::vector<std::string>{"Y"}));
}

TEST(MineSequences, RatesPerApi) {
  std::vector<ApiCallRecord> records = {
      call("A", {"p", "q"}), call("A", {"q", "p"}), call("A", {"p"}), call("A", {"p", "Signature"}),
      call("B", {"x"}),
  };
  const auto stats = mine_sequences(records);
  const auto a = rows_for_api(stats, "A");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].params, (std::vector<std::string>{"p"}));
  EXPECT_EQ(a[0].count, 2u);
  EXPECT_DOUBLE_EQ(a[0].rate, 0.5);
  EXPECT_EQ(a[1].count, 2u);
  const auto b = rows_for_api(stats, "B");
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].rate, 1.0);
}

TEST(MineSequences, SuccessfulOnly) {
  FilterConfig cfg = FilterConfig::defaults();
  cfg.successful_only = true;
  std::vector<ApiCallRecord> records = {call("A", {"p"}), call("A", {"q"}, false)};
  const auto rows = rows_for_api(mine_sequences(records, cfg), "A");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].rate, 1.0);
}

TEST(MineSequences, ReproducesSeventyThirtyMix) {
  const auto records = sim::generate(sim::sequence_mix_scenario(7), 1000);
  const auto rows = rows_for_api(mine_sequences(records), "SendSms");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].count, 700u);
  EXPECT_EQ(rows[1].count, 300u);
  EXPECT_EQ(format_rate(rows[0].rate), "0.7000");
  EXPECT_EQ(format_rate(rows[1].rate), "0.3000");
  EXPECT_EQ(rows[1].params.front(), "OutId");
}

TEST(SequenceCounter, MergeEqualsSinglePass) {
  const auto records = sim::generate(sim::default_scenario(5), 600);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto parts = 1 + rng() % 6;
    std::vector<SequenceCounter> counters(parts);
    for (const auto& r : records) counters[rng() % parts].add(r);
    SequenceCounter merged;
    for (const auto& c : counters) merged.merge(c);
    EXPECT_EQ(merged.finish(), mine_sequences(records));
  }
}

TEST(MineSequences, RatesSumToOne) {
  const auto records = sim::generate(sim::default_scenario(8), 500);
  const auto stats = mine_sequences(records);
  for (const auto* api : {"SendSms", "AddSmsSign"}) {
    double total = 0.0;
    for (const auto& row : rows_for_api(stats, api)) total += row.rate;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace apifk
