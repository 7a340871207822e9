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

// Programmatic success predicates over simulated scene trajectories.
//
// A goal is an ordered list of subgoals. Progress advances through the list
// as each subgoal becomes true. A subgoal with a step window fails the goal
// if it becomes true before the window opens or stays false past its end.
// Once every subgoal has been reached, the persistent ones (placements, and
// a lift that ends the list) must all hold together for hold_steps
// consecutive states. Goals made only of touches and intermediate lifts
// succeed as soon as the last one is reached and stay successful.

#ifndef NEBULA_SUCCESS_H_
#define NEBULA_SUCCESS_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "nebula/scene.h"
#include "nebula/taskgen.h"

namespace nebula {

struct Tolerance {
  double position = 0.03;
  double orientation = kOrientationTolerance;
};

// Planar relation thresholds.
inline constexpr double kRelationMargin = 0.05;    // along the relation axis
inline constexpr double kRelationAlignment = 0.1;  // across it
inline constexpr double kBetweenOffset = 0.05;     // off the segment

bool RelationHolds(Relation r, const Vec3& a, const std::vector<Vec3>& refs);
bool ConditionHolds(const Condition& c, const SceneState& scene);
// Branch selected by the goal's condition on this scene.
std::vector<Subgoal> ResolveGoal(const Goal& goal, const SceneState& scene);

// Whether a subgoal holds in a single state (windows are not checked).
bool SubgoalAchieved(const Subgoal& g, const SceneState& s, const Tolerance& tol);
// Smallest yaw difference modulo the symmetry period (0 = none).
double YawError(double yaw, double target, double period);

// True when the gripper tip is within contact distance of an object.
bool InContact(const SceneState& s, int object_id);

class GoalProgress {
 public:
  GoalProgress(Tolerance tol, int hold_steps) : tol_(tol), hold_steps_(hold_steps) {}

  // Feeds the next state and returns the success label for it. The goal is
  // read from the state; when an event replaces it, progress restarts
  // unless the new goal extends the old one.
  bool Observe(const SceneState& s) { return Observe(s, s.active_goal); }
  // Same, judging the state against `goal` instead of its own.
  bool Observe(const SceneState& s, const Goal& goal);

  bool success() const { return success_; }
  bool failed() const { return failed_; }
  std::size_t next_index() const { return index_; }
  const std::vector<Subgoal>& subgoals() const { return resolved_; }

 private:
  Tolerance tol_;
  int hold_steps_;
  bool initialized_ = false;
  Goal goal_;
  std::vector<Subgoal> resolved_;
  std::size_t index_ = 0;
  int held_for_ = 0;
  bool latched_ = false;
  bool failed_ = false;
  bool success_ = false;
};

// Judges states against the spec's goal until an event changes the goal
// the scene carries; from then on the scene's goal applies. This lets one
// trajectory be scored under both the isolated and entangled predicates.
class SuccessTracker {
 public:
  explicit SuccessTracker(const TaskSpec& spec);
  // Throws kSpecMismatch if the state belongs to another scene or robot.
  bool Observe(const SceneState& s);
  bool success() const { return progress_.success(); }

 private:
  std::uint64_t scene_id_;
  std::string robot_id_;
  Goal spec_goal_;
  std::optional<Goal> initial_goal_;
  GoalProgress progress_;
};

// Label of the last state after feeding the whole trajectory (which starts
// with the initial state). Throws kInvalidArgument on an empty trajectory
// and kSpecMismatch for states from another scene or robot.
bool EvaluateSuccess(const TaskSpec& spec, const std::vector<SceneState>& trajectory);

}  // namespace nebula

#endif  // NEBULA_SUCCESS_H_
