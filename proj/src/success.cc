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

#include "nebula/success.h"

#include <cmath>
#include <numbers>

#include "nebula/error.h"

namespace nebula {
namespace {

constexpr double kRestEpsilon = 1e-4;

double Bottom(const SceneObject& o) { return o.pose.position.z() - WorldHalfHeight(o); }
double Top(const SceneObject& o) { return o.pose.position.z() + WorldHalfHeight(o); }

bool YawOk(const Subgoal& g, const SceneObject& o, const Tolerance& tol) {
  if (!g.target_yaw) return true;
  return YawError(Yaw(o.pose.orientation), *g.target_yaw, g.yaw_period) <= tol.orientation;
}

bool InsideContainer(const SceneObject& o, const SceneObject& c) {
  const Vec3 local = c.pose.orientation.conjugate() * (o.pose.position - c.pose.position);
  const Vec3 he = HalfExtents(c);
  return std::abs(local.x()) <= he.x() - kContainerWall &&
         std::abs(local.y()) <= he.y() - kContainerWall && Bottom(o) <= Top(c) + 1e-9;
}

bool StartsWith(const std::vector<Subgoal>& whole, const std::vector<Subgoal>& prefix) {
  if (prefix.size() > whole.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (!(whole[i] == prefix[i])) return false;
  }
  return true;
}

}  // namespace

double YawError(double yaw, double target, double period) {
  const double p = period > 0.0 ? period : 2.0 * std::numbers::pi;
  double d = std::fmod(yaw - target, p);
  if (d < 0) d += p;
  return std::min(d, p - d);
}

bool RelationHolds(Relation r, const Vec3& a, const std::vector<Vec3>& refs) {
  if (refs.empty()) return false;
  const Vec3& b = refs[0];
  switch (r) {
    case Relation::kLeftOf:
      return a.y() - b.y() >= kRelationMargin && std::abs(a.x() - b.x()) <= kRelationAlignment;
    case Relation::kRightOf:
      return b.y() - a.y() >= kRelationMargin && std::abs(a.x() - b.x()) <= kRelationAlignment;
    case Relation::kInFrontOf:
      return b.x() - a.x() >= kRelationMargin && std::abs(a.y() - b.y()) <= kRelationAlignment;
    case Relation::kBehind:
      return a.x() - b.x() >= kRelationMargin && std::abs(a.y() - b.y()) <= kRelationAlignment;
    case Relation::kBetween: {
      if (refs.size() < 2) return false;
      const Eigen::Vector2d p = a.head<2>(), u = b.head<2>(), v = refs[1].head<2>();
      const Eigen::Vector2d seg = v - u;
      const double len2 = seg.squaredNorm();
      if (len2 == 0.0) return false;
      const double t = (p - u).dot(seg) / len2;
      const double off = (p - (u + t * seg)).norm();
      return t >= 0.25 && t <= 0.75 && off <= kBetweenOffset;
    }
  }
  return false;
}

bool ConditionHolds(const Condition& c, const SceneState& scene) {
  switch (c.kind) {
    case ConditionKind::kSmallerThan:
    case ConditionKind::kLargerThan: {
      const SceneObject* a = scene.Find(c.a);
      const SceneObject* b = scene.Find(c.b);
      if (!a || !b) return false;
      return c.kind == ConditionKind::kSmallerThan ? a->size < b->size : a->size > b->size;
    }
    case ConditionKind::kLeftmostCubeIs: {
      const SceneObject* best = nullptr;
      for (const auto& o : scene.objects) {
        if (o.shape != Shape::kCube) continue;
        if (!best || o.pose.position.y() > best->pose.position.y()) best = &o;
      }
      return best && best->color == c.color;
    }
  }
  return false;
}

std::vector<Subgoal> ResolveGoal(const Goal& goal, const SceneState& scene) {
  if (!goal.condition || ConditionHolds(*goal.condition, scene)) return goal.subgoals;
  return goal.otherwise;
}

bool InContact(const SceneState& s, int object_id) {
  const SceneObject* o = s.Find(object_id);
  return o && SurfaceDistance(*o, s.gripper.pose.position) <= kContactDistance;
}

bool SubgoalAchieved(const Subgoal& g, const SceneState& s, const Tolerance& tol) {
  const SceneObject* o = s.Find(g.object);
  if (!o) return false;
  const bool free = !o->attached_to.has_value();
  switch (g.kind) {
    case GoalKind::kPlaceAt:
      return free && (o->pose.position - g.target).norm() <= tol.position && YawOk(g, *o, tol);
    case GoalKind::kPlaceIn: {
      const SceneObject* c = g.refs.empty() ? nullptr : s.Find(g.refs[0]);
      return free && c && InsideContainer(*o, *c);
    }
    case GoalKind::kStackOn: {
      const SceneObject* base = g.refs.empty() ? nullptr : s.Find(g.refs[0]);
      if (!free || !base || base->attached_to) return false;
      const double dxy = (o->pose.position - base->pose.position).head<2>().norm();
      return dxy <= tol.position && std::abs(Bottom(*o) - Top(*base)) <= kRestEpsilon &&
             YawOk(g, *o, tol);
    }
    case GoalKind::kRelation: {
      if (!free) return false;
      std::vector<Vec3> refs;
      for (int id : g.refs) {
        const SceneObject* r = s.Find(id);
        if (!r) return false;
        refs.push_back(r->pose.position);
      }
      return RelationHolds(g.relation, o->pose.position, refs);
    }
    case GoalKind::kLift:
      return !free && Bottom(*o) >= g.lift_height;
    case GoalKind::kTouch:
      return InContact(s, g.object);
    case GoalKind::kRelease:
      return free;
  }
  return false;
}

bool GoalProgress::Observe(const SceneState& s, const Goal& goal) {
  if (!initialized_ || !(goal == goal_)) {
    const bool extends = initialized_ && goal.condition == goal_.condition &&
                         goal.otherwise == goal_.otherwise &&
                         StartsWith(goal.subgoals, goal_.subgoals);
    goal_ = goal;
    if (extends) {
      const std::vector<Subgoal> next = ResolveGoal(goal_, s);
      // Keep the branch chosen on the first scene; only append new items.
      if (!goal_.condition) resolved_ = next;
    } else {
      resolved_ = ResolveGoal(goal_, s);
      index_ = 0;
      held_for_ = 0;
      latched_ = false;
      failed_ = false;
    }
    initialized_ = true;
  }
  success_ = false;
  if (failed_) return false;
  if (latched_ && index_ == resolved_.size()) return success_ = true;

  while (index_ < resolved_.size()) {
    const Subgoal& g = resolved_[index_];
    if (g.window && s.sim_step > g.window->end) {
      failed_ = true;
      return false;
    }
    const bool achieved = SubgoalAchieved(g, s, tol_);
    if (g.exclusive_contact && !achieved) {
      for (const auto& o : s.objects) {
        if (o.id != g.object && IsGraspable(o.shape) && InContact(s, o.id)) {
          failed_ = true;
          return false;
        }
      }
    }
    const bool in_window = !g.window || s.sim_step >= g.window->begin;
    if (achieved && !in_window) {
      // Reaching a windowed subgoal before its window opens is premature.
      failed_ = true;
      return false;
    }
    if (!achieved) break;
    ++index_;
  }
  if (index_ < resolved_.size() || resolved_.empty()) {
    held_for_ = 0;
    return false;
  }

  bool any_persistent = false;
  bool all_hold = true;
  for (std::size_t i = 0; i < resolved_.size(); ++i) {
    if (!IsPersistent(resolved_[i], i + 1 == resolved_.size())) continue;
    any_persistent = true;
    if (!SubgoalAchieved(resolved_[i], s, tol_)) all_hold = false;
  }
  if (!any_persistent) {
    latched_ = true;
    return success_ = true;
  }
  held_for_ = all_hold ? held_for_ + 1 : 0;
  return success_ = held_for_ >= hold_steps_;
}

SuccessTracker::SuccessTracker(const TaskSpec& spec)
    : scene_id_(spec.scene_id),
      robot_id_(spec.robot_id),
      spec_goal_(spec.goal),
      progress_({spec.criterion.tolerance_m, spec.criterion.tolerance_rad},
                spec.criterion.hold_steps) {}

bool SuccessTracker::Observe(const SceneState& s) {
  if (s.scene_id != scene_id_) {
    throw Error(ErrorCode::kSpecMismatch, "trajectory state belongs to another scene");
  }
  if (s.embodiment.robot_id != robot_id_) {
    throw Error(ErrorCode::kSpecMismatch, "trajectory robot '" + s.embodiment.robot_id +
                                              "' differs from the task's '" + robot_id_ + "'");
  }
  if (!initial_goal_) initial_goal_ = s.active_goal;
  return progress_.Observe(s, s.active_goal == *initial_goal_ ? spec_goal_ : s.active_goal);
}

bool EvaluateSuccess(const TaskSpec& spec, const std::vector<SceneState>& trajectory) {
  if (trajectory.empty()) throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  SuccessTracker tracker(spec);
  bool label = false;
  for (const SceneState& s : trajectory) label = tracker.Observe(s);
  return label;
}

}  // namespace nebula
