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

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "nebula/error.h"
#include "nebula/render.h"

namespace nebula {
namespace {

constexpr std::string_view kInProcessNote = "act time spans the in-process Act call";
constexpr std::string_view kBridgeNote =
    "act time spans OBS frame sent to ACT frame received, including policy-side decode";

struct Rollout {
  std::vector<ActTiming> timings;
  std::vector<Action> actions;
  std::uint64_t peak_rss = 0;
};

// Runs exactly `steps` closed-loop steps whatever the task outcome. Only the
// Act call is timed; observation building and stepping are outside it.
Rollout RunSteps(PolicyHandle& policy, const GeneratedTask& task, int steps, bool sample_rss) {
  ObservationOptions obs_options;
  Rollout r;
  SceneState scene = task.scene;
  std::string instruction = scene.active_instruction;
  policy.ClearTimings();
  policy.Reset(instruction, scene.embodiment);
  obs_options.render = policy.policy().needs_images();
  if (sample_rss) r.peak_rss = CurrentRssBytes();
  for (int k = 0; k < steps; ++k) {
    policy.OnPrivilegedState(scene);
    if (scene.active_instruction != instruction) {
      instruction = scene.active_instruction;
      policy.OnInstruction(instruction);
    }
    const Observation obs = MakeObservation(scene, obs_options);
    Action action = policy.Act(obs);
    scene = StepScene(scene, action);
    r.actions.push_back(std::move(action));
    if (sample_rss) r.peak_rss = std::max(r.peak_rss, CurrentRssBytes());
  }
  r.timings = policy.timings();
  return r;
}

std::string_view TimingNote(const PolicyHandle& h) {
  return h.mode() == PolicyMode::kExternalBridge ? kBridgeNote : kInProcessNote;
}

void CheckProfile(const StressProfile& p) {
  if (p.steps < 2) throw Error(ErrorCode::kInvalidArgument, "stress steps must be >= 2");
  if (p.EffectiveWarmup() >= p.steps) {
    throw Error(ErrorCode::kInvalidArgument, "warmup must be smaller than steps");
  }
}

MetricRecord BaseRecord(StressKind kind, const StressProfile& p, const PolicyHandle& h) {
  MetricRecord r;
  r.kind = kind;
  r.level = p.level;
  r.policy_id = h.id();
  r.timing_note = std::string(TimingNote(h));
  return r;
}

std::vector<double> LatenciesAfterWarmup(const Rollout& r, int warmup) {
  std::vector<double> ms;
  for (std::size_t i = static_cast<std::size_t>(warmup); i < r.timings.size(); ++i) {
    ms.push_back(r.timings[i].latency_ms());
  }
  return ms;
}

// A table spot clear of every object except `moving` and of every goal
// target, at least `min_travel` from `from`.
Eigen::Vector2d FreeSpot(const SceneState& scene, int moving, const Goal& goal,
                         const Eigen::Vector2d& from, double min_travel, Rng& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Eigen::Vector2d p(rng.Uniform(0.28, 0.62), rng.Uniform(-0.27, 0.27));
    if ((p - from).norm() < min_travel) continue;
    bool clear = true;
    for (const auto& o : scene.objects) {
      if (o.id == moving) continue;
      const Vec3 he = HalfExtents(o);
      const double r = std::hypot(he.x(), he.y()) + 0.05;
      if ((p - o.pose.position.head<2>()).norm() < r) clear = false;
    }
    for (const auto& g : goal.subgoals) {
      if (g.kind == GoalKind::kPlaceAt && (p - g.target.head<2>()).norm() < 0.1) clear = false;
    }
    if (clear) return p;
  }
  throw Error(ErrorCode::kInvalidArgument, "no free table spot for the adaptability event");
}

}  // namespace

std::string_view StressKindName(StressKind k) {
  switch (k) {
    case StressKind::kFrequency: return "frequency";
    case StressKind::kLatency: return "latency";
    case StressKind::kStability: return "stability";
    case StressKind::kAdaptability: return "adaptability";
    case StressKind::kResources: return "resources";
  }
  return "unknown";
}

std::string_view StressLevelName(StressLevel l) {
  switch (l) {
    case StressLevel::kV1: return "v1";
    case StressLevel::kV2: return "v2";
    case StressLevel::kV3: return "v3";
  }
  return "unknown";
}

std::optional<StressKind> ParseStressKind(std::string_view s) {
  for (StressKind k : {StressKind::kFrequency, StressKind::kLatency, StressKind::kStability,
                       StressKind::kAdaptability, StressKind::kResources}) {
    if (StressKindName(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<StressLevel> ParseStressLevel(std::string_view s) {
  for (StressLevel l : {StressLevel::kV1, StressLevel::kV2, StressLevel::kV3}) {
    if (StressLevelName(l) == s) return l;
  }
  return std::nullopt;
}

double StabilityScore(std::span<const Action> actions) {
  if (actions.size() < 2) {
    throw Error(ErrorCode::kTooShort, "stability needs at least two actions");
  }
  const std::size_t dim = actions[0].values.size();
  double sum = 0.0;
  for (std::size_t t = 1; t < actions.size(); ++t) {
    if (actions[t].values.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "action " + std::to_string(t) + " has " +
                      std::to_string(actions[t].values.size()) + " components, expected " +
                      std::to_string(dim));
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = actions[t].values[i] - actions[t - 1].values[i];
      sq += d * d;
    }
    sum += std::sqrt(sq);
  }
  return std::exp(-sum / static_cast<double>(actions.size() - 1));
}

double Percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::kTooShort, "percentile of no samples");
  if (!(p > 0.0 && p <= 100.0)) throw Error(ErrorCode::kInvalidArgument, "percentile out of range");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * values.size()));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

GeneratedTask StressScenario(StressKind kind, StressLevel level, std::uint64_t seed) {
  TaskKey key;
  if (kind == StressKind::kStability) {
    switch (level) {
      case StressLevel::kV1: key = {Family::kControl, Tier::kEasy, 1}; break;
      case StressLevel::kV2: key = {Family::kControl, Tier::kMedium, 1}; break;
      case StressLevel::kV3: key = {Family::kControl, Tier::kHard, 2}; break;
    }
  } else {
    switch (level) {
      case StressLevel::kV1: key = {Family::kControl, Tier::kEasy, 1}; break;
      case StressLevel::kV2: key = {Family::kDynamicAdaptation, Tier::kMedium, 1}; break;
      case StressLevel::kV3: key = {Family::kDynamicAdaptation, Tier::kHard, 1}; break;
    }
  }
  return GenerateTask(key, seed);
}

GeneratedTask AdaptabilityTask(StressLevel level, std::uint64_t seed) {
  Rng rng(Mix64(seed ^ Fnv1a64("adaptability/" + std::string(StressLevelName(level)))));
  if (level == StressLevel::kV1) {
    const int template_id = 1 + static_cast<int>(seed % 3);
    GeneratedTask task = GenerateTask({Family::kControl, Tier::kEasy, template_id}, seed);
    const int target = task.spec.goal.subgoals.front().object;
    const SceneObject* obj = task.scene.Find(target);
    Event e;
    e.kind = EventKind::kDisplaceObject;
    e.fire_step = 20 + static_cast<std::int64_t>(rng.Index(21));
    e.object = target;
    const Eigen::Vector2d p =
        FreeSpot(task.scene, target, task.spec.goal, obj->pose.position.head<2>(), 0.12, rng);
    e.position = Vec3(p.x(), p.y(), 0.0);
    task.scene = InjectEvent(task.scene, e);
    return task;
  }

  GeneratedTask task = GenerateTask({Family::kControl, Tier::kEasy, 2}, seed);
  const Subgoal lift = task.spec.goal.subgoals.front();
  const SceneObject* red = task.scene.Find(lift.object);
  Event e;
  e.fire_step = 10 + static_cast<std::int64_t>(rng.Index(21));
  if (level == StressLevel::kV2) {
    // A second cube to switch to.
    SceneObject green = *red;
    green.id = 1;
    for (const auto& o : task.scene.objects) green.id = std::max(green.id, o.id + 1);
    green.color = ColorOf("green");
    const Eigen::Vector2d p =
        FreeSpot(task.scene, -1, task.spec.goal, red->pose.position.head<2>(), 0.1, rng);
    green.pose.position = Vec3(p.x(), p.y(), 1.0);
    green.pose.orientation = YawQuat(rng.Uniform(0.0, std::numbers::pi / 2.0));
    task.scene.objects.push_back(green);
    SettleObjects(task.scene);
    Subgoal next = lift;
    next.object = green.id;
    e.kind = EventKind::kSwapInstruction;
    e.instruction = "Pick up the green cube.";
    e.goal.subgoals = {next};
  } else {
    Subgoal release = lift;
    release.kind = GoalKind::kRelease;
    e.kind = EventKind::kSequentialInstruction;
    e.instruction = "Release the cube.";
    e.goal.subgoals = {release};
  }
  task.scene = InjectEvent(task.scene, e);
  return task;
}

MetricRecord MeasureInferenceFrequency(const PolicyFactory& factory, const StressProfile& p) {
  CheckProfile(p);
  PolicyHandle h(factory());
  MetricRecord r = BaseRecord(StressKind::kFrequency, p, h);
  try {
    const Rollout ro = RunSteps(h, StressScenario(p.kind, p.level, p.seed), p.steps, false);
    const std::vector<double> ms = LatenciesAfterWarmup(ro, p.EffectiveWarmup());
    const double total_s = std::accumulate(ms.begin(), ms.end(), 0.0) / 1000.0;
    r.sample_count = static_cast<int>(ms.size());
    r.frequency_hz = total_s > 0.0 ? ms.size() / total_s : std::numeric_limits<double>::infinity();
  } catch (const Error& e) {
    r.failed = true;
    r.failure_cause = e.what();
  }
  return r;
}

MetricRecord MeasureLatency(const PolicyFactory& factory, const StressProfile& p) {
  CheckProfile(p);
  PolicyHandle h(factory());
  MetricRecord r = BaseRecord(StressKind::kLatency, p, h);
  try {
    const Rollout ro = RunSteps(h, StressScenario(p.kind, p.level, p.seed), p.steps, false);
    const std::vector<double> ms = LatenciesAfterWarmup(ro, p.EffectiveWarmup());
    r.sample_count = static_cast<int>(ms.size());
    r.latency_ms = LatencyStats{std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size(),
                                Percentile(ms, 95.0)};
  } catch (const Error& e) {
    r.failed = true;
    r.failure_cause = e.what();
  }
  return r;
}

MetricRecord MeasureStability(const PolicyFactory& factory, const StressProfile& p) {
  CheckProfile(p);
  PolicyHandle h(factory());
  MetricRecord r = BaseRecord(StressKind::kStability, p, h);
  try {
    const Rollout ro = RunSteps(h, StressScenario(p.kind, p.level, p.seed), p.steps, false);
    r.sample_count = static_cast<int>(ro.actions.size());
    r.stability = StabilityScore(ro.actions);
  } catch (const Error& e) {
    r.failed = true;
    r.failure_cause = e.what();
  }
  return r;
}

MetricRecord RunAdaptability(const PolicyFactory& factory, const StressProfile& p) {
  if (p.episodes < 1) throw Error(ErrorCode::kInvalidArgument, "episodes must be >= 1");
  PolicyHandle h(factory());
  MetricRecord r = BaseRecord(StressKind::kAdaptability, p, h);
  int successes = 0;
  for (int i = 0; i < p.episodes; ++i) {
    const GeneratedTask task = AdaptabilityTask(p.level, p.seed + static_cast<std::uint64_t>(i));
    // RunEpisode turns policy errors into a failed episode.
    const EpisodeResult er = RunEpisode(h, task);
    successes += er.success ? 1 : 0;
  }
  r.sample_count = p.episodes;
  r.adaptability_rate = static_cast<double>(successes) / p.episodes;
  return r;
}

MetricRecord ProfileResources(const PolicyFactory& factory, const StressProfile& p) {
  PolicyHandle h(factory());
  MetricRecord r = BaseRecord(StressKind::kResources, p, h);
  ResourceStats stats;
  stats.policy_artifact_bytes = h.policy().artifact_bytes();
  try {
    const Rollout ro = RunSteps(h, StressScenario(StressKind::kLatency, p.level, p.seed),
                                kResourceRolloutSteps, true);
    stats.peak_process_mem_bytes = ro.peak_rss;
    r.sample_count = kResourceRolloutSteps;
  } catch (const Error& e) {
    r.failed = true;
    r.failure_cause = e.what();
    stats.peak_process_mem_bytes = CurrentRssBytes();
  }
  // Bridge policies learn these from the child's HELLO.
  stats.policy_artifact_bytes = h.policy().artifact_bytes();
  stats.accelerator_mem_bytes = h.policy().accelerator_bytes();
  r.resources = stats;
  return r;
}

MetricRecord RunStress(const PolicyFactory& factory, const StressProfile& p) {
  switch (p.kind) {
    case StressKind::kFrequency: return MeasureInferenceFrequency(factory, p);
    case StressKind::kLatency: return MeasureLatency(factory, p);
    case StressKind::kStability: return MeasureStability(factory, p);
    case StressKind::kAdaptability: return RunAdaptability(factory, p);
    case StressKind::kResources: return ProfileResources(factory, p);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown stress kind");
}

std::uint64_t CurrentRssBytes() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmRSS:", 0) == 0) {
      std::istringstream fields(line.substr(6));
      std::uint64_t kib = 0;
      fields >> kib;
      return kib * 1024;
    }
  }
  return 0;
}

Json MetricRecordToJson(const MetricRecord& r) {
  Json j;
  j["kind"] = StressKindName(r.kind);
  j["level"] = StressLevelName(r.level);
  j["policy_id"] = r.policy_id;
  j["frequency_hz"] = r.frequency_hz ? Json(*r.frequency_hz) : Json(nullptr);
  j["latency_ms"] = r.latency_ms
                        ? Json{{"mean", r.latency_ms->mean_ms}, {"p95", r.latency_ms->p95_ms}}
                        : Json(nullptr);
  j["stability"] = r.stability ? Json(*r.stability) : Json(nullptr);
  j["adaptability_rate"] = r.adaptability_rate ? Json(*r.adaptability_rate) : Json(nullptr);
  if (r.resources) {
    const auto& s = *r.resources;
    j["resources"] = {
        {"peak_process_mem_bytes", s.peak_process_mem_bytes},
        {"policy_artifact_bytes", s.policy_artifact_bytes},
        {"accelerator_mem_bytes",
         s.accelerator_mem_bytes ? Json(*s.accelerator_mem_bytes) : Json(nullptr)}};
  } else {
    j["resources"] = nullptr;
  }
  j["sample_count"] = r.sample_count;
  j["failed"] = r.failed;
  j["failure_cause"] = r.failure_cause.empty() ? Json(nullptr) : Json(r.failure_cause);
  j["timing_note"] = r.timing_note;
  return j;
}

MetricRecord MetricRecordFromJson(const Json& j) {
  try {
    MetricRecord r;
    const auto kind = ParseStressKind(j.at("kind").get<std::string>());
    const auto level = ParseStressLevel(j.at("level").get<std::string>());
    if (!kind || !level) throw Error(ErrorCode::kInvalidArgument, "bad stress kind or level");
    r.kind = *kind;
    r.level = *level;
    r.policy_id = j.at("policy_id").get<std::string>();
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
      return j.at(key).get<double>();
    };
    r.frequency_hz = opt("frequency_hz");
    r.stability = opt("stability");
    r.adaptability_rate = opt("adaptability_rate");
    if (j.contains("latency_ms") && !j.at("latency_ms").is_null()) {
      r.latency_ms = LatencyStats{j["latency_ms"].at("mean").get<double>(),
                                  j["latency_ms"].at("p95").get<double>()};
    }
    if (j.contains("resources") && !j.at("resources").is_null()) {
      const Json& s = j.at("resources");
      ResourceStats stats;
      stats.peak_process_mem_bytes = s.at("peak_process_mem_bytes").get<std::uint64_t>();
      stats.policy_artifact_bytes = s.at("policy_artifact_bytes").get<std::uint64_t>();
      if (s.contains("accelerator_mem_bytes") && !s.at("accelerator_mem_bytes").is_null()) {
        stats.accelerator_mem_bytes = s.at("accelerator_mem_bytes").get<std::uint64_t>();
      }
      r.resources = stats;
    }
    r.sample_count = j.value("sample_count", 0);
    r.failed = j.value("failed", false);
    if (j.contains("failure_cause") && j.at("failure_cause").is_string()) {
      r.failure_cause = j.at("failure_cause").get<std::string>();
    }
    r.timing_note = j.value("timing_note", "");
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad metric record: ") + e.what());
  }
}

}  // namespace nebula
