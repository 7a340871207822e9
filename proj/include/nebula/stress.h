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

// Single-indicator stress probes at pressure levels v1..v3.
//
// Scenarios per level:
//   frequency, latency  v1 static Control-Easy scene, v2 Dynamic-Medium
//                       (slow movers), v3 Dynamic-Hard (fast, turning movers)
//   stability           v1 Control-Easy placement, v2 Control-Medium
//                       two-object placement, v3 Control-Hard peg insertion
//   adaptability        Control-Easy base with v1 a target displacement,
//                       v2 a swap to another cube, v3 a follow-up release
//   resources           100-step rollout of the v1 scenario

#ifndef NEBULA_STRESS_H_
#define NEBULA_STRESS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "nebula/capability.h"
#include "nebula/policy.h"

namespace nebula {

enum class StressKind : std::uint8_t { kFrequency, kLatency, kStability, kAdaptability, kResources };
enum class StressLevel : std::uint8_t { kV1, kV2, kV3 };

std::string_view StressKindName(StressKind k);
std::string_view StressLevelName(StressLevel l);
std::optional<StressKind> ParseStressKind(std::string_view s);
std::optional<StressLevel> ParseStressLevel(std::string_view s);

inline constexpr int kDefaultStressSteps = 200;
inline constexpr int kResourceRolloutSteps = 100;
inline constexpr int kDefaultAdaptabilityEpisodes = 40;

struct StressProfile {
  StressKind kind = StressKind::kFrequency;
  StressLevel level = StressLevel::kV1;
  int steps = kDefaultStressSteps;  // K
  int warmup = -1;                  // W; negative selects 10% of K
  std::uint64_t seed = 0;
  int episodes = kDefaultAdaptabilityEpisodes;  // adaptability only

  int EffectiveWarmup() const { return warmup >= 0 ? warmup : steps / 10; }
};

struct LatencyStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
};

struct ResourceStats {
  std::uint64_t peak_process_mem_bytes = 0;
  std::uint64_t policy_artifact_bytes = 0;
  std::optional<std::uint64_t> accelerator_mem_bytes;
};

struct MetricRecord {
  StressKind kind = StressKind::kFrequency;
  StressLevel level = StressLevel::kV1;
  std::string policy_id;
  std::optional<double> frequency_hz;
  std::optional<LatencyStats> latency_ms;
  std::optional<double> stability;
  std::optional<double> adaptability_rate;
  std::optional<ResourceStats> resources;
  int sample_count = 0;
  bool failed = false;  // the probe could not complete
  std::string failure_cause;
  std::string timing_note;  // what the timer covers
};

// exp(-(1/(T-1)) * sum of ||a_t - a_{t-1}||_2). Throws kTooShort for fewer
// than two actions, kDimensionMismatch for mixed sizes.
double StabilityScore(std::span<const Action> actions);

// Nearest-rank percentile, p in (0, 100].
double Percentile(std::vector<double> values, double p);

// Generated scene of the level's frequency/latency/stability scenario.
GeneratedTask StressScenario(StressKind kind, StressLevel level, std::uint64_t seed);
// Control-Easy episode with the level's adaptability event injected.
GeneratedTask AdaptabilityTask(StressLevel level, std::uint64_t seed);

MetricRecord MeasureInferenceFrequency(const PolicyFactory& factory, const StressProfile& p);
MetricRecord MeasureLatency(const PolicyFactory& factory, const StressProfile& p);
MetricRecord MeasureStability(const PolicyFactory& factory, const StressProfile& p);
MetricRecord RunAdaptability(const PolicyFactory& factory, const StressProfile& p);
MetricRecord ProfileResources(const PolicyFactory& factory, const StressProfile& p);
// Dispatches on p.kind.
MetricRecord RunStress(const PolicyFactory& factory, const StressProfile& p);

// Current resident set size of this process, 0 where unavailable.
std::uint64_t CurrentRssBytes();

Json MetricRecordToJson(const MetricRecord& r);
MetricRecord MetricRecordFromJson(const Json& j);

}  // namespace nebula

#endif  // NEBULA_STRESS_H_
