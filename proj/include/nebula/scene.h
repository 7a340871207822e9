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

// Deterministic kinematic tabletop world.
//
// The table top is the plane z = 0. The robot base sits near the origin and
// faces +x, so "left" is +y and "in front of" means smaller x. There are no
// contact dynamics: objects move only when held by the gripper, driven by a
// motion script, or teleported by an event, and released objects settle
// straight down onto whatever supports them.

#ifndef NEBULA_SCENE_H_
#define NEBULA_SCENE_H_

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nebula/episode.h"
#include "nebula/goal.h"
#include "nebula/json_io.h"

namespace nebula {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  bool operator==(const Pose& o) const {
    return position == o.position && orientation.coeffs() == o.orientation.coeffs();
  }
};

enum class Shape : std::uint8_t { kCube, kSphere, kCylinder, kPeg, kContainer, kSwitch };

std::string_view ShapeName(Shape s);

struct SceneObject {
  int id = 0;  // >= 1; also the segmentation id
  Shape shape = Shape::kCube;
  Rgb color;
  double size = 0.04;  // meters; footprint edge or diameter
  Pose pose;
  std::optional<int> attached_to;  // gripper id while held
  Pose attach_offset;              // object pose in the gripper frame

  bool operator==(const SceneObject&) const = default;
};

// Half extents of the object's bounding box in its own frame.
Vec3 HalfExtents(const SceneObject& o);
// Vertical half extent in the world frame (accounts for tilt).
double WorldHalfHeight(const SceneObject& o);
bool IsGraspable(Shape s);
bool IsFixture(Shape s);  // containers and switches
// Distance from a point to the object's surface; 0 inside.
double SurfaceDistance(const SceneObject& o, const Vec3& p);
double Yaw(const Quat& q);
Quat YawQuat(double yaw);

struct GripperState {
  int id = 0;
  Pose pose;
  double aperture = 1.0;  // 1 open, 0 closed
  bool operator==(const GripperState&) const = default;
};

struct MotionSegment {
  std::int64_t start_step = 0;
  std::int64_t end_step = 0;  // exclusive
  Vec3 velocity = Vec3::Zero();  // m/s, in the table plane
  bool operator==(const MotionSegment&) const = default;
};

struct MotionScript {
  int object = 0;
  std::vector<MotionSegment> segments;
  bool cancelled = false;  // set once the object is grasped
  // Position at the start of the running segment; positions are computed
  // from it as anchor + v * (elapsed_steps * dt) so long runs stay exact.
  std::int64_t anchor_step = -1;
  Vec3 anchor = Vec3::Zero();
  bool operator==(const MotionScript&) const = default;
};

enum class EventKind : std::uint8_t {
  kDisplaceObject,
  kSwapInstruction,
  kSequentialInstruction,
  kAttributeSwitch,
};

std::string_view EventKindName(EventKind k);

struct ColorChange {
  int object = 0;
  Rgb color;
  bool operator==(const ColorChange&) const = default;
};

struct Event {
  std::int64_t fire_step = 0;
  EventKind kind = EventKind::kDisplaceObject;
  // kDisplaceObject
  int object = 0;
  Vec3 position = Vec3::Zero();  // z is ignored; the object settles
  // kSwapInstruction / kSequentialInstruction
  std::string instruction;
  // kSwapInstruction replaces the goal; kSequentialInstruction appends
  // goal.subgoals; kAttributeSwitch replaces it when non-empty.
  Goal goal;
  // kAttributeSwitch
  std::vector<ColorChange> colors;

  bool operator==(const Event&) const = default;
};

struct SceneState {
  std::uint64_t scene_id = 0;
  std::int64_t sim_step = 0;
  EmbodimentConfig embodiment;
  std::vector<double> q;
  std::vector<double> q_dot;
  GripperState gripper;
  std::vector<SceneObject> objects;
  std::vector<MotionScript> motion_scripts;
  std::vector<Event> event_queue;  // pending, in injection order
  std::string active_instruction;
  Goal active_goal;  // privileged

  const SceneObject* Find(int id) const;
  SceneObject* Find(int id);
  const SceneObject* Held() const;
  bool operator==(const SceneState&) const = default;
};

// Simulator constants.
inline constexpr double kDefaultDt = 0.05;
inline constexpr double kMaxJointDelta = 0.05;  // rad per step at |a| = 1
inline constexpr double kLinearJointScale = 0.5;  // m per rad, xyz joints
inline constexpr double kContactDistance = 0.01;
inline constexpr double kGraspRadius = kContactDistance;
inline constexpr double kContainerWall = 0.005;

// Home tip position at q = 0.
Vec3 WorkspaceOrigin();

// Kinematic chain: joints 0..5 drive x, y, z (scaled), yaw, roll, pitch of a
// free-flying end effector; further joints add to yaw.
enum class JointAxis : std::uint8_t { kX, kY, kZ, kYaw, kRoll, kPitch };
JointAxis AxisOfJoint(int joint);
Pose ForwardKinematics(const std::vector<double>& q);

// Empty table with the gripper at home, joints zeroed.
SceneState MakeEmptyScene(const EmbodimentConfig& embodiment);

// Rests every free object on its support. Applied by Step() and used by
// scene builders.
void SettleObjects(SceneState& scene);

// Advances one step. Throws kDimensionMismatch for a wrongly sized action.
SceneState StepScene(const SceneState& scene, const Action& action,
                     double dt = kDefaultDt);

// Enqueues an event; events due now are applied immediately. Throws
// kInvalidEvent for past fire steps or unknown objects.
SceneState InjectEvent(const SceneState& scene, const Event& event);

// Applies an event's effect right away (used by StepScene for due events).
void ApplyEvent(SceneState& scene, const Event& event);

// Hash over the physical world only (objects, gripper, joints, scripts);
// ignores instruction, goal and bookkeeping fields.
std::uint64_t WorldFingerprint(const SceneState& scene);

void to_json(Json& j, const Pose& p);
void to_json(Json& j, const Rgb& c);
void to_json(Json& j, const Subgoal& g);
void to_json(Json& j, const Goal& g);
void to_json(Json& j, const SceneObject& o);
void to_json(Json& j, const Event& e);
void to_json(Json& j, const SceneState& s);

}  // namespace nebula

#endif  // NEBULA_SCENE_H_
