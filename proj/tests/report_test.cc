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

#include "nebula/report.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nebula/error.h"

namespace nebula {
namespace {

CapabilityReport Uniform(const std::string& id, int successes, int episodes = 10,
                         const std::vector<TaskKey>& catalog = ListTasks()) {
  CapabilityReport r;
  r.policy_id = id;
  r.episodes_per_task = episodes;
  for (const TaskKey& k : catalog) r.templates.push_back({k, episodes, successes, {}});
  return r;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(AggregateTest, MeanAndPopulationStd) {
  const EvalReport r = Aggregate({Uniform("b", 7), Uniform("a", 5), Uniform("c", 9)});
  ASSERT_EQ(r.cells.size(), 18u);
  EXPECT_EQ(r.policies[0].policy_id, "a");
  EXPECT_EQ(r.policies[2].policy_id, "c");
  // Population std of {0.5, 0.7, 0.9} is sqrt(0.08 / 3).
  for (const AggregateCell& c : r.cells) {
    EXPECT_EQ(c.count, 3);
    EXPECT_NEAR(*c.mean, 0.7, 1e-12);
    EXPECT_NEAR(*c.std, std::sqrt(0.08 / 3.0), 1e-12);
  }
  EXPECT_EQ(r.cells[0].family, Family::kControl);
  EXPECT_EQ(r.cells[1].tier, Tier::kMedium);
}

TEST(AggregateTest, SinglePolicyHasZeroStd) {
  const EvalReport r = Aggregate({Uniform("solo", 3)});
  EXPECT_NEAR(*CellOf(r, Family::kLanguage, Tier::kHard).mean, 0.3, 1e-12);
  EXPECT_EQ(*CellOf(r, Family::kLanguage, Tier::kHard).std, 0.0);
}

TEST(AggregateTest, MissingCellsAreFlaggedNotImputed) {
  CapabilityReport a = Uniform("a", 5);
  CapabilityReport b = Uniform("b", 9);
  for (auto& t : b.templates) {
    if (t.key.family == Family::kRobustness && t.key.tier == Tier::kHard) {
      t.episodes = 0;
      t.successes = 0;
    }
  }
  const EvalReport r = Aggregate({a, b});
  const AggregateCell& c = CellOf(r, Family::kRobustness, Tier::kHard);
  EXPECT_EQ(c.count, 1);
  EXPECT_NEAR(*c.mean, 0.5, 1e-12);
  EXPECT_EQ(c.missing_policies, std::vector<std::string>{"b"});
  EXPECT_FALSE(PolicyCellMean(b, Family::kRobustness, Tier::kHard).has_value());
}

TEST(AggregateTest, EmptyCellWhenNoPolicyCoversIt) {
  const auto easy = ListTasks(std::nullopt, std::set<Tier>{Tier::kEasy});
  const EvalReport r = Aggregate({Uniform("a", 5, 10, easy)});
  EXPECT_TRUE(CellOf(r, Family::kControl, Tier::kHard).missing());
  EXPECT_FALSE(CellOf(r, Family::kControl, Tier::kHard).mean.has_value());
}

TEST(AggregateTest, CatalogMismatchAndDuplicates) {
  const auto easy = ListTasks(std::nullopt, std::set<Tier>{Tier::kEasy});
  try {
    Aggregate({Uniform("a", 5), Uniform("b", 5, 10, easy)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCatalogMismatch);
  }
  EXPECT_THROW(Aggregate({Uniform("a", 5), Uniform("a", 6)}), Error);
}

TEST(ExportTest, FormatParsing) {
  EXPECT_EQ(ParseExportFormat("json"), ExportFormat::kJson);
  EXPECT_EQ(ParseExportFormat("csv"), ExportFormat::kCsv);
  EXPECT_EQ(ParseExportFormat("radar_json"), ExportFormat::kRadarJson);
  try {
    ParseExportFormat("xlsx");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownFormat);
  }
}

TEST(ExportTest, CsvRowsAndQuoting) {
  CapabilityReport r = Uniform("bridge:./p --x=1,2", 1, 4, {{Family::kControl, Tier::kEasy, 1}});
  const auto lines = Lines(Export(Aggregate({r}), ExportFormat::kCsv));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "policy_id,family,tier,template_id,episodes,successes,rate");
  EXPECT_EQ(lines[1], "\"bridge:./p --x=1,2\",Control,Easy,1,4,1,0.25");
}

TEST(ExportTest, RadarShapeAndValues) {
  CapabilityReport a = Uniform("a", 2);
  for (auto& t : a.templates) {
    if (t.key.family == Family::kControl) t.successes = t.key.tier == Tier::kHard ? 0 : 10;
  }
  const Json radar = Json::parse(Export(Aggregate({a, Uniform("b", 6)}), "radar_json"));
  ASSERT_EQ(radar["axes"].size(), 6u);
  EXPECT_EQ(radar["axes"][0], "Perception");
  EXPECT_EQ(radar["axes"][3], "Spatial");
  EXPECT_EQ(radar["axes"][4], "Dynamic");
  EXPECT_EQ(radar["tiers"].size(), 3u);
  const Json& sa = radar["series"][0];
  EXPECT_EQ(sa["policy_id"], "a");
  EXPECT_NEAR(sa["values"][1].get<double>(), 2.0 / 3.0, 1e-12);  // Control: (1 + 1 + 0) / 3
  EXPECT_NEAR(sa["values"][0].get<double>(), 0.2, 1e-12);
  EXPECT_NEAR(sa["by_tier"]["Hard"][1].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(radar["aggregate"]["mean"][0].get<double>(), 0.4, 1e-12);
  EXPECT_NEAR(radar["aggregate"]["std"][0].get<double>(), 0.2, 1e-12);
  EXPECT_EQ(radar["aggregate"]["count"][0], 2);

  const Json masked = RadarJson(Aggregate({a}), {Tier::kEasy, Tier::kMedium});
  EXPECT_NEAR(masked["series"][0]["values"][1].get<double>(), 1.0, 1e-12);
  EXPECT_FALSE(masked["series"][0]["by_tier"].contains("Hard"));
}

TEST(ExportTest, JsonRoundTrip) {
  MetricRecord m;
  m.kind = StressKind::kFrequency;
  m.policy_id = "a";
  m.frequency_hz = 99.5;
  const EvalReport r = Aggregate({Uniform("a", 4), Uniform("b", 8)}, {m});
  const EvalReport back = EvalReportFromJson(Json::parse(Export(r, ExportFormat::kJson)));
  EXPECT_TRUE(SameEvalReport(r, back));
  EXPECT_EQ(back.cells, r.cells);
  EXPECT_EQ(back.metrics.size(), 1u);
  EXPECT_EQ(back.metrics[0].frequency_hz, 99.5);
}

}  // namespace
}  // namespace nebula
