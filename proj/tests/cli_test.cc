// Copyright 2026 The Nebula Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nebula/cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "nebula/query.h"
#include "nebula/storage.h"
#include "test_support.h"

namespace nebula {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

Json ReadJson(const fs::path& p) { return Json::parse(testing::ReadFile(p)); }

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) { setenv(name, value, 1); }
  ~ScopedEnv() { unsetenv(name_); }

 private:
  const char* name_;
};

TEST(CliTest, HelpForEverySubcommand) {
  EXPECT_EQ(Cli({"--help"}).code, kExitOk);
  for (const char* sub : {"gen", "run-capability", "run-stress", "ablate-isolation", "query",
                          "split", "verify", "report"}) {
    const CliRun r = Cli({sub, "--help"});
    EXPECT_EQ(r.code, kExitOk) << sub;
    EXPECT_NE(r.out.find("Usage"), std::string::npos) << sub;
  }
}

TEST(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Cli({}).code, kExitUsage);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Cli({"gen"}).code, kExitUsage);  // --out is required
  EXPECT_EQ(Cli({"gen", "--out", "/tmp/x", "--family", "Cooking"}).code, kExitUsage);
  EXPECT_EQ(Cli({"run-stress", "--kind", "speed"}).code, kExitUsage);
  EXPECT_EQ(Cli({"run-capability", "--out", "/tmp/x", "--policy", "nobody"}).code, kExitUsage);
  EXPECT_EQ(Cli({"run-capability", "--out", "/tmp/x", "--template", "4"}).code, kExitUsage);
}

TEST(CliTest, BinaryExitCodes) {
  const std::string cli = testing::CliPath();
  EXPECT_EQ(testing::RunCommand(cli + " --help >/dev/null").exit_code, 0);
  EXPECT_EQ(testing::RunCommand(cli + " gen 2>/dev/null").exit_code, 2);
  EXPECT_EQ(testing::RunCommand(cli + " verify /nonexistent/file.shard 2>/dev/null").exit_code, 1);
}

TEST(CliTest, GenWritesThirtyEpisodesThatVerifyAndQuery) {
  TempDir dir;
  const std::string out = (dir / "ds").string();
  const CliRun g = Cli({"gen", "--family", "Control", "--tier", "Easy", "--n", "10", "--seed", "0",
                        "--out", out, "--shard-size", "12"});
  ASSERT_EQ(g.code, kExitOk) << g.err;
  const Manifest m = LoadDataset(out);
  EXPECT_EQ(m.TotalEpisodes(), 30u);
  EXPECT_EQ(m.shards.size(), 3u);
  EXPECT_TRUE(CheckManifest(m).empty());
  EXPECT_EQ(m.family_counts.at("Control"), 30u);

  const CliRun v = Cli({"verify", out});
  EXPECT_EQ(v.code, kExitOk) << v.out << v.err;

  // Every generated expert episode succeeds.
  const CliRun q = Cli({"query", out, "--query", R"({"final_success": true, "template_id": [2]})"});
  ASSERT_EQ(q.code, kExitOk) << q.err;
  std::vector<std::string> ids;
  std::istringstream lines(q.out);
  for (std::string line; std::getline(lines, line);) ids.push_back(Json::parse(line)["episode_id"]);
  std::vector<std::string> want;
  for (const auto& s : m.shards) {
    for (const auto& e : s.episodes) {
      if (e.final_success == 1 && e.task_meta.template_id == 2) want.push_back(e.episode_id);
    }
  }
  EXPECT_EQ(ids, want);
  EXPECT_EQ(ids.size(), 10u);

  // Reading a shard back gives valid episodes.
  const Shard shard = OpenShard(m.root / m.shards[0].path);
  const Episode ep = ReadEpisode(shard, 0);
  EXPECT_TRUE(ValidateEpisode(ep).ok());
  EXPECT_EQ(ep.steps[0].observation.views.begin()->second.width, kDefaultRecordImageSize);
}

TEST(CliTest, VerifyReportsCorruption) {
  TempDir dir;
  const std::string out = (dir / "ds").string();
  ASSERT_EQ(Cli({"gen", "--family", "Language", "--tier", "Easy", "--template", "1", "--n", "2",
                 "--out", out})
                .code,
            kExitOk);
  const Manifest m = LoadDataset(out);
  const fs::path shard = m.root / m.shards[0].path;
  auto bytes = testing::ReadBytes(shard);
  bytes[bytes.size() / 2] ^= 0xFF;
  testing::WriteBytes(shard, bytes);
  EXPECT_EQ(Cli({"verify", out}).code, kExitFailure);
}

TEST(CliTest, SplitHoldsOutRobustness) {
  TempDir dir;
  const std::string out = (dir / "ds").string();
  ASSERT_EQ(Cli({"gen", "--family", "Control", "Robustness", "--tier", "Easy", "--n", "2",
                 "--out", out})
                .code,
            kExitOk);
  const CliRun s = Cli({"split", out, "--holdout-robustness", "--train-ratio", "0.5"});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  const Json j = Json::parse(s.out);
  const Manifest m = LoadDataset(out);
  std::map<std::string, Family> family_of;
  for (const auto& shard : m.shards) {
    for (const auto& e : shard.episodes) family_of[e.episode_id] = e.task_meta.family;
  }
  for (const auto& ref : j["train"]) {
    EXPECT_NE(family_of.at(ref["episode_id"].get<std::string>()), Family::kRobustness);
  }
  EXPECT_EQ(j["train"].size() + j["test"].size(), 12u);
}

TEST(CliTest, StabilityOfZeroJitterIsOne) {
  const CliRun r = Cli({"run-stress", "--kind", "stability", "--level", "v1", "--policy",
                        "jitter:0.0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["stability"], 1.0);
  EXPECT_EQ(j["sample_count"], 200);
}

Json CapabilityReportFor(const TempDir& dir, const std::vector<std::string>& extra,
                         const std::string& name) {
  std::vector<std::string> args = {"run-capability", "--policy", "expert", "--family", "Control",
                                   "--tier", "Easy", "--template", "1", "--n", "1",
                                   "--out", (dir / name).string()};
  args.insert(args.end(), extra.begin(), extra.end());
  const CliRun r = Cli(args);
  EXPECT_EQ(r.code, kExitOk) << r.err;
  return ReadJson(dir / name / "capability_report.json");
}

TEST(CliTest, SeedPrecedence) {
  TempDir dir;
  const fs::path config = dir / "config.json";
  {
    const std::string text = R"({"seed": 11, "run-capability": {"n": 2}})";
    testing::WriteBytes(config, std::vector<std::uint8_t>(text.begin(), text.end()));
  }
  EXPECT_EQ(CapabilityReportFor(dir, {}, "default")["seed"], 0);
  {
    ScopedEnv env("NEBULA_SEED", "5");
    EXPECT_EQ(CapabilityReportFor(dir, {}, "env")["seed"], 5);
    const Json from_config = CapabilityReportFor(dir, {"--config", config.string()}, "cfg");
    EXPECT_EQ(from_config["seed"], 11);
    EXPECT_EQ(from_config["templates"][0]["episodes"], 1);  // command line --n wins
    EXPECT_EQ(CapabilityReportFor(dir, {"--config", config.string(), "--seed", "3"}, "cli")["seed"],
              3);
  }
}

TEST(CliTest, ConfigSectionAppliesOnlyToItsSubcommand) {
  TempDir dir;
  const fs::path config = dir / "config.json";
  const std::string text = R"({"gen": {"n": 2, "family": ["Language"], "tier": ["Easy"]}})";
  testing::WriteBytes(config, std::vector<std::uint8_t>(text.begin(), text.end()));
  const std::string out = (dir / "ds").string();
  ASSERT_EQ(Cli({"--config", config.string(), "gen", "--out", out}).code, kExitOk);
  EXPECT_EQ(LoadDataset(out).TotalEpisodes(), 6u);
  const std::string bad = R"({"gen": {"no_such_flag": 1}})";
  testing::WriteBytes(config, std::vector<std::uint8_t>(bad.begin(), bad.end()));
  EXPECT_EQ(Cli({"--config", config.string(), "gen", "--out", out}).code, kExitUsage);
}

TEST(CliTest, ReportExportsAllFormats) {
  TempDir dir;
  CapabilityReportFor(dir, {}, "a");
  CapabilityReportFor(dir, {"--seed", "4"}, "b");
  // Same policy twice is a catalog conflict.
  EXPECT_EQ(Cli({"report", "--capability", (dir / "a" / "capability_report.json").string(),
                 (dir / "b" / "capability_report.json").string()})
                .code,
            kExitFailure);
  const std::string cap = (dir / "a" / "capability_report.json").string();
  const CliRun csv = Cli({"report", "--capability", cap, "--format", "csv"});
  ASSERT_EQ(csv.code, kExitOk) << csv.err;
  EXPECT_EQ(csv.out, "policy_id,family,tier,template_id,episodes,successes,rate\n"
                     "expert,Control,Easy,1,1,1,1\n");
  const CliRun radar =
      Cli({"report", "--capability", cap, "--format", "radar_json", "--tier-mask", "Easy"});
  ASSERT_EQ(radar.code, kExitOk) << radar.err;
  EXPECT_EQ(Json::parse(radar.out)["axes"].size(), 6u);
  EXPECT_EQ(Cli({"report", "--capability", cap, "--format", "yaml"}).code, kExitUsage);
}

TEST(CliTest, RunCapabilityIsReproducible) {
  TempDir dir;
  const Json a = CapabilityReportFor(dir, {"--record"}, "one");
  const Json b = CapabilityReportFor(dir, {"--record", "--workers", "2"}, "two");
  EXPECT_EQ(a, b);
  EXPECT_TRUE(fs::exists(dir / "one" / "run_meta.json"));
  const Manifest m1 = LoadDataset(dir / "one" / "episodes");
  EXPECT_EQ(m1.TotalEpisodes(), 1u);
  EXPECT_EQ(testing::ReadFile(m1.root / m1.shards[0].path),
            testing::ReadFile(dir / "two" / "episodes" / m1.shards[0].path));
}

}  // namespace
}  // namespace nebula
