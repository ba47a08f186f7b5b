#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "apifk/knowledge_store.hpp"
#include "apifk/log_model.hpp"
#include "temp_dir.hpp"

namespace apifk {
namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(APIFK_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

TEST(Cli, SimulateMineAndSuccessRate) {
  TempDir dir;
  const auto log = dir.file("log.jsonl");
  ASSERT_EQ(run("simulate --out " + log + " --n 400 --seed 3").code, 0);
  EXPECT_EQ(load_log(log).records.size(), 400u);

  const auto mined = run("mine --log " + log + " --out " + dir.file("k") + " --threshold 10");
  ASSERT_EQ(mined.code, 0) << mined.out;
  EXPECT_TRUE(std::filesystem::exists(dir.file("k/SendSms.json")));
  EXPECT_TRUE(load(dir.file("k/AddSmsSign.json")).params.contains("SignSource"));

  const auto sr = run("sr --log " + log);
  ASSERT_EQ(sr.code, 0);
  const auto j = nlohmann::json::parse(sr.out);
  EXPECT_EQ(j["call_number"], 400);
}

TEST(Cli, ScenarioRoundTrip) {
  TempDir dir;
  const auto written = run("simulate --write-scenario --seed 5");
  ASSERT_EQ(written.code, 0);
  {
    std::ofstream out(dir.file("s.json"));
    out << written.out;
  }
  ASSERT_EQ(run("simulate --scenario " + dir.file("s.json") + " --out " + dir.file("a.jsonl") +
                " --n 50")
                .code,
            0);
  ASSERT_EQ(run("simulate --seed 5 --out " + dir.file("b.jsonl") + " --n 50").code, 0);
  EXPECT_EQ(load_log(dir.file("a.jsonl")).records, load_log(dir.file("b.jsonl")).records);
}

TEST(Cli, TrainAndPredict) {
  TempDir dir;
  const auto log = dir.file("log.jsonl");
  ASSERT_EQ(run("simulate --out " + log + " --n 60").code, 0);
  const auto trained = run("train --log " + log + " --out " + dir.file("m.bin") +
                           " --epochs 1 --input-length 123 --minibatch 16");
  ASSERT_EQ(trained.code, 0) << trained.out;
  EXPECT_NE(trained.out.find("epoch 0"), std::string::npos);
  {
    std::ofstream out(dir.file("req.json"));
    out << R"({"api":"SendSms","params":{"PhoneNumbers":"13800001111"}})";
  }
  const auto p = run("predict --model " + dir.file("m.bin") + " --request " + dir.file("req.json"));
  ASSERT_EQ(p.code, 0);
  const auto j = nlohmann::json::parse(p.out);
  EXPECT_TRUE(j.contains("label"));
  double total = 0.0;
  for (const auto& [k, v] : j["probabilities"].items()) total += v.get<double>();
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("bogus").code, 1);
  EXPECT_EQ(run("mine --log x.jsonl").code, 1);  // missing --out
  EXPECT_EQ(run("train --log x --out y --variant huge").code, 1);
  EXPECT_EQ(run("sr --log " + dir.file("missing.jsonl")).code, 2);
  EXPECT_EQ(run("predict --model " + dir.file("missing.bin") + " --request r.json").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

}  // namespace
}  // namespace apifk
