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

#include "nebula/stress.h"

#include <gtest/gtest.h>

#include <cmath>

#include "nebula/error.h"
#include "nebula/render.h"

namespace nebula {
namespace {

double OracleStability(const std::vector<Action>& a) {
  double total = 0.0;
  for (std::size_t t = 1; t < a.size(); ++t) {
    double sq = 0.0;
    for (std::size_t k = 0; k < a[t].values.size(); ++k) {
      sq += std::pow(a[t].values[k] - a[t - 1].values[k], 2);
    }
    total += std::sqrt(sq);
  }
  return std::exp(-total / static_cast<double>(a.size() - 1));
}

PolicyFactory MakeJitter(double amplitude) {
  return [amplitude] { return std::make_unique<JitterPolicy>(amplitude); };
}

TEST(StabilityTest, KnownValues) {
  EXPECT_DOUBLE_EQ(StabilityScore(std::vector<Action>(5, Action{{0.2, 0.4}})), 1.0);
  // Steps of length 3-4-5 triangles: each difference has norm 0.5.
  const std::vector<Action> a = {Action{{0.0, 0.0}}, Action{{0.3, 0.4}}, Action{{0.0, 0.0}}};
  EXPECT_NEAR(StabilityScore(a), std::exp(-0.5), 1e-15);
  const std::vector<Action> unit = {Action{{0.0}}, Action{{1.0}}};
  EXPECT_NEAR(StabilityScore(unit), std::exp(-1.0), 1e-15);
}

TEST(StabilityTest, Errors) {
  try {
    StabilityScore(std::vector<Action>{Action{{0.0}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooShort);
  }
  try {
    StabilityScore(std::vector<Action>{Action{{0.0}}, Action{{0.0, 1.0}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(PercentileTest, NearestRank) {
  std::vector<double> v;
  for (int i = 1; i <= 20; ++i) v.push_back(21 - i);
  EXPECT_EQ(Percentile(v, 95.0), 19.0);
  EXPECT_EQ(Percentile(v, 100.0), 20.0);
  EXPECT_EQ(Percentile(v, 50.0), 10.0);
  EXPECT_EQ(Percentile(v, 1.0), 1.0);
  EXPECT_EQ(Percentile({7.0}, 95.0), 7.0);
  EXPECT_THROW(Percentile({}, 50.0), Error);
  EXPECT_THROW(Percentile({1.0}, 0.0), Error);
}

TEST(StressTest, NamesRoundTrip) {
  for (StressKind k : {StressKind::kFrequency, StressKind::kLatency, StressKind::kStability,
                       StressKind::kAdaptability, StressKind::kResources}) {
    EXPECT_EQ(ParseStressKind(StressKindName(k)), k);
  }
  for (StressLevel l : {StressLevel::kV1, StressLevel::kV2, StressLevel::kV3}) {
    EXPECT_EQ(ParseStressLevel(StressLevelName(l)), l);
  }
  EXPECT_FALSE(ParseStressKind("throughput").has_value());
  EXPECT_EQ(StressProfile{}.EffectiveWarmup(), 20);
}

TEST(StressTest, JitterZeroIsPerfectlyStable) {
  StressProfile p;
  p.kind = StressKind::kStability;
  const MetricRecord r = MeasureStability(MakeJitter(0.0), p);
  ASSERT_FALSE(r.failed);
  EXPECT_DOUBLE_EQ(*r.stability, 1.0);
  EXPECT_EQ(r.sample_count, 200);
}

TEST(StressTest, StabilityMatchesIndependentReplay) {
  StressProfile p;
  p.kind = StressKind::kStability;
  p.steps = 50;
  const MetricRecord r = MeasureStability(MakeJitter(0.4), p);
  JitterPolicy replay(0.4);
  replay.Reset("", DefaultEmbodiment());
  ObservationOptions opt;
  opt.render = false;
  opt.image_size = 1;
  const Observation obs = MakeObservation(MakeEmptyScene(DefaultEmbodiment()), opt);
  std::vector<Action> actions;
  for (int k = 0; k < 50; ++k) actions.push_back(replay.Act(obs));
  EXPECT_NEAR(*r.stability, OracleStability(actions), 1e-12);
  EXPECT_LT(*r.stability, 1.0);
}

TEST(StressTest, ExpertStabilityIsDeterministicAndBounded) {
  StressProfile p;
  p.kind = StressKind::kStability;
  const PolicyFactory expert = ScriptedPolicyFactory("expert").value();
  for (StressLevel l : {StressLevel::kV1, StressLevel::kV3}) {
    p.level = l;
    const MetricRecord r = MeasureStability(expert, p);
    ASSERT_FALSE(r.failed) << r.failure_cause;
    EXPECT_GT(*r.stability, 0.0);
    EXPECT_LE(*r.stability, 1.0);
    EXPECT_EQ(r.stability, MeasureStability(expert, p).stability);
  }
}

TEST(StressTest, FrequencyAndLatencyOfDelayedPolicy) {
  const PolicyFactory f = ScriptedPolicyFactory("delayed:20").value();
  StressProfile p;
  p.steps = 30;
  p.warmup = 5;
  const MetricRecord freq = MeasureInferenceFrequency(f, p);
  ASSERT_FALSE(freq.failed);
  EXPECT_EQ(freq.sample_count, 25);
  EXPECT_NEAR(*freq.frequency_hz, 50.0, 5.0);
  p.kind = StressKind::kLatency;
  const MetricRecord lat = MeasureLatency(f, p);
  EXPECT_NEAR(lat.latency_ms->mean_ms, 20.0, 3.0);
  EXPECT_GE(lat.latency_ms->p95_ms, 20.0);
  EXPECT_FALSE(lat.timing_note.empty());
}

TEST(StressTest, ProfileValidation) {
  StressProfile p;
  p.steps = 10;
  p.warmup = 10;
  EXPECT_THROW(MeasureLatency(ScriptedPolicyFactory("zero").value(), p), Error);
  p.steps = 1;
  p.warmup = 0;
  EXPECT_THROW(MeasureInferenceFrequency(ScriptedPolicyFactory("zero").value(), p), Error);
}

TEST(StressTest, AdaptabilitySeparatesExpertFromFrozen) {
  StressProfile p;
  p.kind = StressKind::kAdaptability;
  p.episodes = 6;
  for (StressLevel l : {StressLevel::kV1, StressLevel::kV2, StressLevel::kV3}) {
    p.level = l;
    const MetricRecord e = RunAdaptability(ScriptedPolicyFactory("expert").value(), p);
    const MetricRecord f = RunAdaptability(ScriptedPolicyFactory("frozen").value(), p);
    EXPECT_EQ(*e.adaptability_rate, 1.0) << StressLevelName(l);
    EXPECT_EQ(*f.adaptability_rate, 0.0) << StressLevelName(l);
  }
}

TEST(StressTest, AdaptabilityTaskCarriesAnEvent) {
  for (StressLevel l : {StressLevel::kV1, StressLevel::kV2, StressLevel::kV3}) {
    const GeneratedTask t = AdaptabilityTask(l, 3);
    EXPECT_EQ(t.spec.family, Family::kControl);
    ASSERT_EQ(t.scene.event_queue.size(), 1u) << StressLevelName(l);
    EXPECT_GT(t.scene.event_queue[0].fire_step, 0);
  }
}

TEST(StressTest, ResourcesReportMemory) {
  StressProfile p;
  p.kind = StressKind::kResources;
  const MetricRecord r = RunStress(ScriptedPolicyFactory("zero").value(), p);
  ASSERT_TRUE(r.resources.has_value());
  EXPECT_GT(r.resources->peak_process_mem_bytes, 0u);
  EXPECT_EQ(r.resources->policy_artifact_bytes, 0u);
  EXPECT_FALSE(r.resources->accelerator_mem_bytes.has_value());
  EXPECT_GT(CurrentRssBytes(), 0u);
}

TEST(StressTest, MetricRecordJsonRoundTrip) {
  MetricRecord r;
  r.kind = StressKind::kLatency;
  r.level = StressLevel::kV2;
  r.policy_id = "p";
  r.latency_ms = LatencyStats{1.5, 2.5};
  r.resources = ResourceStats{100, 7, 42};
  r.sample_count = 9;
  r.timing_note = "Act only";
  const Json j = MetricRecordToJson(r);
  const MetricRecord back = MetricRecordFromJson(j);
  EXPECT_EQ(MetricRecordToJson(back), j);
  EXPECT_EQ(back.latency_ms->p95_ms, 2.5);
  EXPECT_EQ(back.resources->accelerator_mem_bytes, 42u);
  EXPECT_FALSE(back.frequency_hz.has_value());
}

}  // namespace
}  // namespace nebula
