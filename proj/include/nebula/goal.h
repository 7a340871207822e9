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

// Structured task goals. A Goal is an ordered list of subgoals, optionally
// guarded by a condition that selects between two lists. Goals are plain
// data: task generation produces them, the simulator carries the active one
// as privileged state, success predicates and the scripted expert read it.

#ifndef NEBULA_GOAL_H_
#define NEBULA_GOAL_H_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace nebula {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

enum class GoalKind : std::uint8_t {
  kPlaceAt,   // object released at target position (and yaw, if given)
  kPlaceIn,   // object released inside container refs[0]
  kStackOn,   // object released resting on top of refs[0]
  kRelation,  // object released satisfying a planar relation to refs
  kLift,      // object held with its bottom >= lift_height above the table
  kTouch,     // gripper tip within contact distance of the object
  kRelease,   // object not held and resting on a support
};

enum class Relation : std::uint8_t { kLeftOf, kRightOf, kInFrontOf, kBehind, kBetween };

std::string_view GoalKindName(GoalKind k);
std::string_view RelationName(Relation r);

// Inclusive sim-step range in which a subgoal may be achieved.
struct StepWindow {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  bool operator==(const StepWindow&) const = default;
};

struct Subgoal {
  GoalKind kind = GoalKind::kPlaceAt;
  int object = 0;
  std::vector<int> refs;
  Relation relation = Relation::kLeftOf;
  // Placement target for kPlaceAt; for kRelation/kStackOn/kPlaceIn a
  // position known to satisfy the goal, used by planners only.
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  std::optional<double> target_yaw;
  double yaw_period = 0.0;  // rotational symmetry of the object; 0 = none
  std::optional<StepWindow> window;
  // kTouch: contacting any other non-container object first is a failure.
  bool exclusive_contact = false;
  double lift_height = 0.08;

  bool operator==(const Subgoal&) const = default;
};

enum class ConditionKind : std::uint8_t {
  kSmallerThan,     // size(a) < size(b)
  kLargerThan,      // size(a) > size(b)
  kLeftmostCubeIs,  // the cube with the largest y has `color`
};

struct Condition {
  ConditionKind kind = ConditionKind::kSmallerThan;
  int a = 0;
  int b = 0;
  Rgb color;
  bool operator==(const Condition&) const = default;
};

struct Goal {
  std::vector<Subgoal> subgoals;
  std::optional<Condition> condition;
  std::vector<Subgoal> otherwise;  // used when condition is false

  bool operator==(const Goal&) const = default;
};

// Subgoals that must still hold at the end of an episode; touches, and lifts
// that are followed by further subgoals, only need to be achieved once.
bool IsPersistent(const Subgoal& g, bool is_last);

}  // namespace nebula

#endif  // NEBULA_GOAL_H_
