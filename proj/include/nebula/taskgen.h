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

// Procedural capability tasks. The catalog holds 6 families x 3 tiers x 3
// templates. Each template draws its frozen factors (layout, sizes, colors
// that are not under test) from a stream seeded by the seed alone, and the
// single factor under test from a named probe variant. Changing the variant
// therefore never moves anything in fixed_params.

#ifndef NEBULA_TASKGEN_H_
#define NEBULA_TASKGEN_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nebula/episode.h"
#include "nebula/scene.h"

namespace nebula {

struct TaskKey {
  Family family = Family::kControl;
  Tier tier = Tier::kEasy;
  int template_id = 1;  // 1..3

  auto operator<=>(const TaskKey&) const = default;
};

std::string TaskKeyName(const TaskKey& key);  // e.g. "Control/Easy/1"

enum class CriterionKind : std::uint8_t {
  kAtGoalPose,
  kStackedOn,
  kInsideContainer,
  kContactedTarget,
  kSequenceCompleted,
  kRelationSatisfied,
};

std::string_view CriterionKindName(CriterionKind k);

struct SuccessCriterion {
  std::string predicate_id;
  CriterionKind kind = CriterionKind::kAtGoalPose;
  double tolerance_m = 0.03;
  double tolerance_rad = 0.2;
  int hold_steps = 5;

  bool operator==(const SuccessCriterion&) const = default;
};

// Positional tolerance per tier: 3 cm, 1.5 cm, 8 mm.
double TierTolerance(Tier tier);
inline constexpr double kOrientationTolerance = 0.2;
inline constexpr int kPlacementHoldSteps = 5;
inline constexpr int kDefaultTriggerWindow = 100;

// Episode horizon: 400 steps for Easy and Medium, 800 for Hard.
int MaxSteps(Tier tier);

struct TaskSpec {
  Family family = Family::kControl;
  Tier tier = Tier::kEasy;
  int template_id = 1;
  std::uint64_t seed = 0;
  std::string probe_variant;
  Json probe_params;  // the single factor under test
  Json fixed_params;  // every frozen factor; a function of the seed alone
  std::string instruction;
  std::string predicate_id;
  bool entangled = false;
  SuccessCriterion criterion;
  Goal goal;  // initial goal; the scene carries the live one
  std::uint64_t scene_id = 0;
  std::string robot_id;
  int atomic_actions = 0;  // grasps, placements, touches and lifts
  int max_steps = 400;

  TaskKey key() const { return {family, tier, template_id}; }
  TaskMeta meta() const;
  bool operator==(const TaskSpec&) const = default;
};

struct GeneratedTask {
  TaskSpec spec;
  SceneState scene;
};

struct TaskOptions {
  // One of ProbeVariants(key); defaults to a seed-derived choice.
  std::optional<std::string> probe_variant;
  // Perception only: touch-then-place instead of touch-only.
  bool entangled = false;
  // Dynamic-Easy: steps allowed after the trigger.
  int trigger_window = kDefaultTriggerWindow;
  EmbodimentConfig embodiment = DefaultEmbodiment();
};

// The catalog in (family, tier, template) order, optionally filtered.
std::vector<TaskKey> ListTasks(const std::optional<std::set<Family>>& families = {},
                               const std::optional<std::set<Tier>>& tiers = {});

// Names of the probe values a template accepts. Throws kUnknownTemplate.
std::vector<std::string> ProbeVariants(const TaskKey& key);

// Deterministic in (key, seed, options). Throws kUnknownTemplate, or
// kInvalidArgument for a probe variant the template does not offer.
GeneratedTask GenerateTask(const TaskKey& key, std::uint64_t seed,
                           const TaskOptions& options = {});

// RGB of a named palette color. Throws kInvalidArgument.
Rgb ColorOf(std::string_view name);

std::uint64_t HashJson(const Json& j);
inline std::uint64_t FixedParamsHash(const TaskSpec& s) { return HashJson(s.fixed_params); }

void to_json(Json& j, const TaskSpec& s);

}  // namespace nebula

#endif  // NEBULA_TASKGEN_H_
