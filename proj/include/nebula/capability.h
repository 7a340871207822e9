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

// Closed-loop episode runner and the capability suite built on it.

#ifndef NEBULA_CAPABILITY_H_
#define NEBULA_CAPABILITY_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nebula/policy.h"
#include "nebula/render.h"
#include "nebula/taskgen.h"

namespace nebula {

struct EpisodeOptions {
  int max_steps = 0;  // 0 uses the task's horizon
  // Keep a full Episode record; observations are then always rendered.
  bool record = false;
  // Keep every SceneState, starting with the initial one.
  bool keep_trajectory = false;
  int image_size = kDefaultImageSize;
  std::set<CameraId> camera_mask;
};

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  std::string failure_cause;  // set when the policy raised an error
  std::optional<Episode> episode;
  std::vector<SceneState> trajectory;
  std::vector<Action> actions;
};

std::string EpisodeId(const TaskSpec& spec);

// generate -> (observe -> act -> step)* until the horizon, or until the task
// is solved with no events pending. Policy errors end the episode as a
// failure with the cause recorded; they are never rethrown.
EpisodeResult RunEpisode(PolicyHandle& policy, const GeneratedTask& task,
                         const EpisodeOptions& options = {});

struct TemplateResult {
  TaskKey key;
  int episodes = 0;
  int successes = 0;
  std::vector<std::pair<std::uint64_t, std::string>> errors;  // seed, cause

  double rate() const { return episodes ? static_cast<double>(successes) / episodes : 0.0; }
  bool operator==(const TemplateResult&) const = default;
};

struct CapabilityReport {
  std::string policy_id;
  std::uint64_t seed = 0;
  int episodes_per_task = 0;
  bool entangled = false;
  std::vector<TemplateResult> templates;  // catalog order
  double wall_time_s = 0.0;  // not part of the JSON report

  std::vector<TaskKey> catalog() const;
  // Unweighted mean over the templates present for (family, tier).
  std::optional<double> FamilyTierMean(Family f, Tier t) const;
  const TemplateResult* Find(const TaskKey& k) const;
};

struct CapabilityOptions {
  std::vector<TaskKey> tasks = ListTasks();
  int episodes_per_task = 50;
  std::uint64_t seed = 0;
  int workers = 1;
  bool entangled = false;
  TaskOptions task_options;  // probe_variant / entangled are overridden
  EpisodeOptions episode;
  // Receives recorded episodes in (task, seed) order whatever the worker
  // count. Only called when episode.record is set.
  std::function<void(const Episode&)> on_record;
};

CapabilityReport RunCapabilitySuite(const PolicyFactory& factory,
                                    const CapabilityOptions& options);

struct AblationRow {
  TaskKey key;
  int episodes = 0;
  int isolated_successes = 0;
  int entangled_successes = 0;
  // Trajectories where the entangled predicate holds but the isolated one
  // does not. The design makes this impossible; the runner counts anyway.
  int implication_violations = 0;
};

struct AblationReport {
  std::string policy_id;
  std::uint64_t seed = 0;
  int episodes_per_task = 0;
  std::vector<AblationRow> rows;
  int implication_violations() const;
};

// Runs every selected Perception template twice per seed, isolated then
// entangled, and scores each recorded trajectory under both predicates.
AblationReport RunIsolationAblation(const PolicyFactory& factory, const std::set<Tier>& tiers,
                                    int episodes_per_task, std::uint64_t seed, int workers = 1);

Json CapabilityReportToJson(const CapabilityReport& r);
CapabilityReport CapabilityReportFromJson(const Json& j);
Json AblationReportToJson(const AblationReport& r);

}  // namespace nebula

#endif  // NEBULA_CAPABILITY_H_
