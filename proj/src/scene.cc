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

#include "nebula/scene.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nebula/error.h"
#include "nebula/rng.h"

namespace nebula {

std::string_view GoalKindName(GoalKind k) {
  switch (k) {
    case GoalKind::kPlaceAt: return "place_at";
    case GoalKind::kPlaceIn: return "place_in";
    case GoalKind::kStackOn: return "stack_on";
    case GoalKind::kRelation: return "relation";
    case GoalKind::kLift: return "lift";
    case GoalKind::kTouch: return "touch";
    case GoalKind::kRelease: return "release";
  }
  return "?";
}

std::string_view RelationName(Relation r) {
  switch (r) {
    case Relation::kLeftOf: return "left_of";
    case Relation::kRightOf: return "right_of";
    case Relation::kInFrontOf: return "in_front_of";
    case Relation::kBehind: return "behind";
    case Relation::kBetween: return "between";
  }
  return "?";
}

bool IsPersistent(const Subgoal& g, bool is_last) {
  switch (g.kind) {
    case GoalKind::kTouch:
      return false;
    case GoalKind::kLift:
      return is_last;
    default:
      return true;
  }
}

std::string_view ShapeName(Shape s) {
  switch (s) {
    case Shape::kCube: return "cube";
    case Shape::kSphere: return "sphere";
    case Shape::kCylinder: return "cylinder";
    case Shape::kPeg: return "peg";
    case Shape::kContainer: return "container";
    case Shape::kSwitch: return "switch";
  }
  return "?";
}

std::string_view EventKindName(EventKind k) {
  switch (k) {
    case EventKind::kDisplaceObject: return "displace_object";
    case EventKind::kSwapInstruction: return "swap_instruction";
    case EventKind::kSequentialInstruction: return "sequential_instruction";
    case EventKind::kAttributeSwitch: return "attribute_switch";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Geometry

Vec3 HalfExtents(const SceneObject& o) {
  const double h = o.size / 2.0;
  switch (o.shape) {
    case Shape::kCube:
    case Shape::kSphere:
    case Shape::kCylinder:
      return {h, h, h};
    case Shape::kPeg:
      return {h, h, o.size};
    case Shape::kContainer:
      return {h, h, o.size / 4.0};
    case Shape::kSwitch:
      return {h, h, o.size / 10.0};
  }
  return {h, h, h};
}

double WorldHalfHeight(const SceneObject& o) {
  if (o.shape == Shape::kSphere) return o.size / 2.0;
  const Eigen::Matrix3d r = o.pose.orientation.toRotationMatrix();
  const Vec3 he = HalfExtents(o);
  return std::abs(r(2, 0)) * he.x() + std::abs(r(2, 1)) * he.y() +
         std::abs(r(2, 2)) * he.z();
}

bool IsGraspable(Shape s) { return !IsFixture(s); }
bool IsFixture(Shape s) { return s == Shape::kContainer || s == Shape::kSwitch; }

double SurfaceDistance(const SceneObject& o, const Vec3& p) {
  if (o.shape == Shape::kSphere) {
    return std::max(0.0, (p - o.pose.position).norm() - o.size / 2.0);
  }
  // Cylinders and pegs are treated as their bounding boxes.
  const Vec3 local = o.pose.orientation.conjugate() * (p - o.pose.position);
  const Vec3 he = HalfExtents(o);
  const Vec3 outside = (local.cwiseAbs() - he).cwiseMax(0.0);
  return outside.norm();
}

double Yaw(const Quat& q) {
  const Eigen::Matrix3d r = q.toRotationMatrix();
  return std::atan2(r(1, 0), r(0, 0));
}

Quat YawQuat(double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

// ---------------------------------------------------------------------------
// Kinematics

Vec3 WorkspaceOrigin() { return {0.45, 0.0, 0.30}; }

JointAxis AxisOfJoint(int joint) {
  static constexpr JointAxis kOrder[] = {JointAxis::kX,    JointAxis::kY,
                                         JointAxis::kZ,    JointAxis::kYaw,
                                         JointAxis::kRoll, JointAxis::kPitch};
  return joint < 6 ? kOrder[joint] : JointAxis::kYaw;
}

Pose ForwardKinematics(const std::vector<double>& q) {
  Vec3 p = WorkspaceOrigin();
  double yaw = 0, roll = 0, pitch = 0;
  for (int j = 0; j < static_cast<int>(q.size()); ++j) {
    switch (AxisOfJoint(j)) {
      case JointAxis::kX: p.x() += kLinearJointScale * q[j]; break;
      case JointAxis::kY: p.y() += kLinearJointScale * q[j]; break;
      case JointAxis::kZ: p.z() += kLinearJointScale * q[j]; break;
      case JointAxis::kYaw: yaw += q[j]; break;
      case JointAxis::kRoll: roll += q[j]; break;
      case JointAxis::kPitch: pitch += q[j]; break;
    }
  }
  Pose pose;
  pose.position = p;
  pose.orientation = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                      Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                      Eigen::AngleAxisd(roll, Vec3::UnitX()));
  pose.orientation.normalize();
  return pose;
}

// ---------------------------------------------------------------------------
// Scene

const SceneObject* SceneState::Find(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

SceneObject* SceneState::Find(int id) {
  for (auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const SceneObject* SceneState::Held() const {
  for (const auto& o : objects) {
    if (o.attached_to) return &o;
  }
  return nullptr;
}

SceneState MakeEmptyScene(const EmbodimentConfig& embodiment) {
  SceneState s;
  s.embodiment = embodiment;
  s.q.assign(embodiment.dof, 0.0);
  s.q_dot.assign(embodiment.dof, 0.0);
  s.gripper.pose = ForwardKinematics(s.q);
  return s;
}

namespace {

bool InFootprint(const SceneObject& support, const Vec3& p, double shrink) {
  const Vec3 local = support.pose.orientation.conjugate() * (p - support.pose.position);
  const Vec3 he = HalfExtents(support);
  return std::abs(local.x()) <= he.x() - shrink && std::abs(local.y()) <= he.y() - shrink;
}

Pose Compose(const Pose& a, const Pose& b) {
  Pose out;
  out.position = a.position + a.orientation * b.position;
  out.orientation = (a.orientation * b.orientation).normalized();
  return out;
}

Pose Inverse(const Pose& a) {
  Pose out;
  out.orientation = a.orientation.conjugate();
  out.position = -(out.orientation * a.position);
  return out;
}

double Clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

}  // namespace

void SettleObjects(SceneState& scene) {
  std::vector<std::size_t> order(scene.objects.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& oa = scene.objects[a];
    const auto& ob = scene.objects[b];
    return oa.pose.position.z() - WorldHalfHeight(oa) <
           ob.pose.position.z() - WorldHalfHeight(ob);
  });
  for (std::size_t idx : order) {
    SceneObject& o = scene.objects[idx];
    if (o.attached_to) continue;
    const Vec3 c = o.pose.position;
    double support = 0.0;
    for (const SceneObject& other : scene.objects) {
      if (other.id == o.id || other.attached_to) continue;
      if (other.pose.position.z() >= c.z()) continue;
      if (other.shape == Shape::kContainer) {
        if (InFootprint(other, c, kContainerWall)) {
          const double floor =
              other.pose.position.z() - WorldHalfHeight(other) + kContainerWall;
          support = std::max(support, floor);
          continue;
        }
      }
      if (InFootprint(other, c, 0.0)) {
        support = std::max(support, other.pose.position.z() + WorldHalfHeight(other));
      }
    }
    o.pose.position.z() = support + WorldHalfHeight(o);
  }
}

void ApplyEvent(SceneState& scene, const Event& e) {
  switch (e.kind) {
    case EventKind::kDisplaceObject: {
      SceneObject* o = scene.Find(e.object);
      if (!o) throw Error(ErrorCode::kInvalidEvent, "unknown object");
      o->attached_to.reset();
      o->pose.position.x() = e.position.x();
      o->pose.position.y() = e.position.y();
      o->pose.position.z() = 1.0;  // settle from above
      for (auto& m : scene.motion_scripts) {
        if (m.object == e.object) m.cancelled = true;
      }
      break;
    }
    case EventKind::kSwapInstruction:
      scene.active_instruction = e.instruction;
      scene.active_goal = e.goal;
      break;
    case EventKind::kSequentialInstruction:
      scene.active_instruction = e.instruction;
      scene.active_goal.subgoals.insert(scene.active_goal.subgoals.end(),
                                        e.goal.subgoals.begin(), e.goal.subgoals.end());
      break;
    case EventKind::kAttributeSwitch:
      for (const ColorChange& c : e.colors) {
        SceneObject* o = scene.Find(c.object);
        if (!o) throw Error(ErrorCode::kInvalidEvent, "unknown object");
        o->color = c.color;
      }
      if (!e.goal.subgoals.empty()) scene.active_goal = e.goal;
      if (!e.instruction.empty()) scene.active_instruction = e.instruction;
      break;
  }
}

SceneState InjectEvent(const SceneState& scene, const Event& event) {
  if (event.fire_step < scene.sim_step) {
    throw Error(ErrorCode::kInvalidEvent, "fire_step is in the past");
  }
  if ((event.kind == EventKind::kDisplaceObject && !scene.Find(event.object))) {
    throw Error(ErrorCode::kInvalidEvent, "unknown object " + std::to_string(event.object));
  }
  for (const ColorChange& c : event.colors) {
    if (!scene.Find(c.object)) {
      throw Error(ErrorCode::kInvalidEvent, "unknown object " + std::to_string(c.object));
    }
  }
  SceneState s = scene;
  if (event.fire_step == s.sim_step) {
    ApplyEvent(s, event);
    SettleObjects(s);
  } else {
    s.event_queue.push_back(event);
  }
  return s;
}

SceneState StepScene(const SceneState& scene, const Action& action, double dt) {
  const int dof = scene.embodiment.dof;
  if (static_cast<int>(action.values.size()) != dof + 1 ||
      static_cast<int>(scene.q.size()) != dof) {
    throw Error(ErrorCode::kDimensionMismatch,
                "action has " + std::to_string(action.values.size()) +
                    " components, expected " + std::to_string(dof + 1));
  }
  if (!(dt > 0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  SceneState s = scene;
  auto command = [&](int i) {
    const double v = action.values[i];
    return std::isfinite(v) ? Clamp(v, -1.0, 1.0) : 0.0;
  };

  // 1. Joint integration.
  int z_joint = -1;
  for (int j = 0; j < dof; ++j) {
    const auto& lim = s.embodiment.joint_limits[j];
    const double next = Clamp(scene.q[j] + command(j) * kMaxJointDelta, lim.min, lim.max);
    s.q[j] = next;
    if (AxisOfJoint(j) == JointAxis::kZ) z_joint = j;
  }
  Pose tip = ForwardKinematics(s.q);

  // Keep the tip, and anything it holds, above the table plane.
  double lift = std::max(0.0, -tip.position.z());
  for (const SceneObject& o : s.objects) {
    if (!o.attached_to) continue;
    SceneObject moved = o;
    moved.pose = Compose(tip, o.attach_offset);
    lift = std::max(lift, WorldHalfHeight(moved) - moved.pose.position.z());
  }
  if (lift > 0.0) {
    if (z_joint >= 0) {
      s.q[z_joint] += lift / kLinearJointScale;
      tip = ForwardKinematics(s.q);
    } else {
      tip.position.z() += lift;
    }
  }
  for (int j = 0; j < dof; ++j) s.q_dot[j] = (s.q[j] - scene.q[j]) / dt;
  s.gripper.pose = tip;

  // 2. Gripper aperture, grasp and release.
  const double previous_aperture = s.gripper.aperture;
  double aperture = (1.0 - command(dof)) / 2.0;
  if (s.embodiment.gripper == GripperType::kNone) aperture = 1.0;
  s.gripper.aperture = aperture;
  SceneObject* held = nullptr;
  for (auto& o : s.objects) {
    if (o.attached_to) held = &o;
  }
  if (held && aperture >= 0.5) {
    held->attached_to.reset();
    held = nullptr;
  } else if (!held && previous_aperture >= 0.5 && aperture < 0.5) {
    double best = kGraspRadius;
    for (auto& o : s.objects) {
      if (!IsGraspable(o.shape)) continue;
      const double d = SurfaceDistance(o, tip.position);
      if (d <= best) {
        best = d;
        held = &o;
      }
    }
    if (held) {
      held->attached_to = s.gripper.id;
      held->attach_offset = Compose(Inverse(tip), held->pose);
      for (auto& m : s.motion_scripts) {
        if (m.object == held->id) m.cancelled = true;
      }
    }
  }
  if (held) held->pose = Compose(tip, held->attach_offset);

  // 3. Motion scripts, for the transition k -> k + 1.
  const std::int64_t k = scene.sim_step;
  for (MotionScript& m : s.motion_scripts) {
    if (m.cancelled) continue;
    SceneObject* o = s.Find(m.object);
    if (!o || o->attached_to) continue;
    for (const MotionSegment& seg : m.segments) {
      if (k < seg.start_step || k >= seg.end_step) continue;
      if (m.anchor_step != seg.start_step) {
        m.anchor_step = seg.start_step;
        m.anchor = o->pose.position;
      }
      const double elapsed = static_cast<double>(k + 1 - seg.start_step) * dt;
      o->pose.position.x() = m.anchor.x() + seg.velocity.x() * elapsed;
      o->pose.position.y() = m.anchor.y() + seg.velocity.y() * elapsed;
      break;
    }
  }

  // 4. Due events, in injection order.
  s.sim_step = scene.sim_step + 1;
  std::vector<Event> pending;
  for (const Event& e : s.event_queue) {
    if (e.fire_step <= s.sim_step) {
      ApplyEvent(s, e);
    } else {
      pending.push_back(e);
    }
  }
  s.event_queue = std::move(pending);

  SettleObjects(s);
  return s;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(Json& j, const Pose& p) {
  j = Json{{"position", {p.position.x(), p.position.y(), p.position.z()}},
           {"orientation",
            {p.orientation.w(), p.orientation.x(), p.orientation.y(), p.orientation.z()}}};
}

void to_json(Json& j, const Rgb& c) { j = Json::array({c.r, c.g, c.b}); }

void to_json(Json& j, const Subgoal& g) {
  j = Json{{"kind", GoalKindName(g.kind)},
           {"object", g.object},
           {"refs", g.refs},
           {"target", {g.target.x(), g.target.y(), g.target.z()}}};
  if (g.kind == GoalKind::kRelation) j["relation"] = RelationName(g.relation);
  if (g.target_yaw) {
    j["target_yaw"] = *g.target_yaw;
    j["yaw_period"] = g.yaw_period;
  }
  if (g.window) j["window"] = {g.window->begin, g.window->end};
  if (g.exclusive_contact) j["exclusive_contact"] = true;
  if (g.kind == GoalKind::kLift) j["lift_height"] = g.lift_height;
}

void to_json(Json& j, const Goal& g) {
  j = Json{{"subgoals", g.subgoals}};
  if (g.condition) {
    static constexpr const char* kNames[] = {"smaller_than", "larger_than",
                                             "leftmost_cube_is"};
    j["condition"] = {{"kind", kNames[static_cast<int>(g.condition->kind)]},
                      {"a", g.condition->a},
                      {"b", g.condition->b},
                      {"color", g.condition->color}};
    j["otherwise"] = g.otherwise;
  }
}

void to_json(Json& j, const SceneObject& o) {
  j = Json{{"id", o.id},
           {"shape", ShapeName(o.shape)},
           {"color", o.color},
           {"size", o.size},
           {"pose", o.pose}};
  if (o.attached_to) {
    j["attached_to"] = *o.attached_to;
    j["attach_offset"] = o.attach_offset;
  } else {
    j["attached_to"] = nullptr;
  }
}

void to_json(Json& j, const Event& e) {
  j = Json{{"fire_step", e.fire_step}, {"kind", EventKindName(e.kind)}};
  switch (e.kind) {
    case EventKind::kDisplaceObject:
      j["object"] = e.object;
      j["position"] = {e.position.x(), e.position.y(), e.position.z()};
      break;
    case EventKind::kSwapInstruction:
    case EventKind::kSequentialInstruction:
      j["instruction"] = e.instruction;
      j["goal"] = e.goal;
      break;
    case EventKind::kAttributeSwitch: {
      Json colors = Json::array();
      for (const auto& c : e.colors) colors.push_back({{"object", c.object}, {"color", c.color}});
      j["colors"] = colors;
      if (!e.goal.subgoals.empty()) j["goal"] = e.goal;
      if (!e.instruction.empty()) j["instruction"] = e.instruction;
      break;
    }
  }
}

namespace {

Json ScriptsJson(const std::vector<MotionScript>& scripts) {
  Json out = Json::array();
  for (const auto& m : scripts) {
    Json segs = Json::array();
    for (const auto& s : m.segments) {
      segs.push_back({{"start_step", s.start_step},
                      {"end_step", s.end_step},
                      {"velocity", {s.velocity.x(), s.velocity.y(), s.velocity.z()}}});
    }
    out.push_back({{"object", m.object},
                   {"segments", segs},
                   {"cancelled", m.cancelled},
                   {"anchor_step", m.anchor_step},
                   {"anchor", {m.anchor.x(), m.anchor.y(), m.anchor.z()}}});
  }
  return out;
}

Json PhysicalJson(const SceneState& s) {
  return Json{{"q", s.q},
              {"q_dot", s.q_dot},
              {"gripper", {{"id", s.gripper.id},
                           {"pose", s.gripper.pose},
                           {"aperture", s.gripper.aperture}}},
              {"objects", s.objects},
              {"motion_scripts", ScriptsJson(s.motion_scripts)}};
}

}  // namespace

void to_json(Json& j, const SceneState& s) {
  j = PhysicalJson(s);
  j["scene_id"] = s.scene_id;
  j["sim_step"] = s.sim_step;
  j["embodiment"] = s.embodiment;
  j["event_queue"] = s.event_queue;
  j["active_instruction"] = s.active_instruction;
  j["active_goal"] = s.active_goal;
}

std::uint64_t WorldFingerprint(const SceneState& scene) {
  return Fnv1a64(PhysicalJson(scene).dump());
}

}  // namespace nebula
