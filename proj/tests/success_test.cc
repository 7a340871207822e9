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

#include <gtest/gtest.h>

#include <numbers>

#include "nebula/error.h"

namespace nebula {
namespace {

SceneState SceneWith(std::vector<SceneObject> objects) {
  SceneState s = MakeEmptyScene(DefaultEmbodiment());
  s.objects = std::move(objects);
  SettleObjects(s);
  return s;
}

SceneObject Obj(int id, Shape shape, double x, double y, double size = 0.04) {
  SceneObject o;
  o.id = id;
  o.shape = shape;
  o.size = size;
  o.pose.position = {x, y, 0.3};
  return o;
}

Subgoal PlaceAt(int object, Vec3 target) {
  Subgoal g;
  g.kind = GoalKind::kPlaceAt;
  g.object = object;
  g.target = target;
  return g;
}

TEST(RelationTest, PlanarRelations) {
  const Vec3 ref(0.5, 0.0, 0.02);
  EXPECT_TRUE(RelationHolds(Relation::kLeftOf, {0.5, 0.06, 0.02}, {ref}));
  EXPECT_FALSE(RelationHolds(Relation::kLeftOf, {0.5, 0.04, 0.02}, {ref}));
  EXPECT_FALSE(RelationHolds(Relation::kLeftOf, {0.62, 0.2, 0.02}, {ref}));  // misaligned
  EXPECT_TRUE(RelationHolds(Relation::kRightOf, {0.45, -0.3, 0.02}, {ref}));
  EXPECT_TRUE(RelationHolds(Relation::kInFrontOf, {0.4, 0.05, 0.02}, {ref}));
  EXPECT_FALSE(RelationHolds(Relation::kInFrontOf, {0.6, 0.0, 0.02}, {ref}));
  EXPECT_TRUE(RelationHolds(Relation::kBehind, {0.6, 0.0, 0.02}, {ref}));
  EXPECT_FALSE(RelationHolds(Relation::kLeftOf, {0.5, 0.2, 0.02}, {}));
}

TEST(RelationTest, Between) {
  const Vec3 a(0.3, -0.2, 0.02), b(0.3, 0.2, 0.02);
  EXPECT_TRUE(RelationHolds(Relation::kBetween, {0.3, 0.0, 0.02}, {a, b}));
  EXPECT_TRUE(RelationHolds(Relation::kBetween, {0.34, 0.09, 0.02}, {a, b}));
  EXPECT_FALSE(RelationHolds(Relation::kBetween, {0.3, 0.15, 0.02}, {a, b}));  // t = 0.875
  EXPECT_FALSE(RelationHolds(Relation::kBetween, {0.36, 0.0, 0.02}, {a, b}));  // off segment
  EXPECT_FALSE(RelationHolds(Relation::kBetween, {0.3, 0.0, 0.02}, {a}));
  EXPECT_FALSE(RelationHolds(Relation::kBetween, {0.3, 0.0, 0.02}, {a, a}));
}

TEST(SuccessTest, YawErrorWrapsBySymmetryPeriod) {
  EXPECT_NEAR(YawError(0.1, -0.1, 0.0), 0.2, 1e-12);
  EXPECT_NEAR(YawError(3.1, -3.1, 0.0), 2 * std::numbers::pi - 6.2, 1e-12);
  EXPECT_NEAR(YawError(std::numbers::pi / 2 + 0.05, 0.0, std::numbers::pi / 2), 0.05, 1e-12);
}

TEST(SuccessTest, ConditionsSelectBranches) {
  SceneState s = SceneWith({Obj(1, Shape::kCube, 0.3, 0.1, 0.03), Obj(2, Shape::kCube, 0.3, -0.1, 0.05)});
  s.Find(1)->color = Rgb{255, 0, 0};
  s.Find(2)->color = Rgb{0, 0, 255};
  EXPECT_TRUE(ConditionHolds({ConditionKind::kSmallerThan, 1, 2, {}}, s));
  EXPECT_FALSE(ConditionHolds({ConditionKind::kLargerThan, 1, 2, {}}, s));
  EXPECT_TRUE(ConditionHolds({ConditionKind::kLeftmostCubeIs, 0, 0, Rgb{255, 0, 0}}, s));
  EXPECT_FALSE(ConditionHolds({ConditionKind::kLeftmostCubeIs, 0, 0, Rgb{0, 0, 255}}, s));

  Goal g;
  g.subgoals = {PlaceAt(1, {0, 0, 0})};
  g.otherwise = {PlaceAt(2, {0, 0, 0})};
  g.condition = Condition{ConditionKind::kLargerThan, 1, 2, {}};
  EXPECT_EQ(ResolveGoal(g, s).front().object, 2);
  g.condition->kind = ConditionKind::kSmallerThan;
  EXPECT_EQ(ResolveGoal(g, s).front().object, 1);
}

TEST(SuccessTest, PlaceAtNeedsToleranceAndHold) {
  SceneState s = SceneWith({Obj(1, Shape::kCube, 0.5, 0.0)});
  GoalProgress p(Tolerance{0.03, 0.2}, 5);
  Goal g;
  g.subgoals = {PlaceAt(1, {0.52, 0.0, 0.02})};
  for (int k = 0; k < 4; ++k) EXPECT_FALSE(p.Observe(s, g)) << k;
  EXPECT_TRUE(p.Observe(s, g));

  GoalProgress tight(Tolerance{0.015, 0.2}, 1);
  EXPECT_FALSE(tight.Observe(s, g));
}

TEST(SuccessTest, HoldCounterResetsWhenPlacementBreaks) {
  SceneState on = SceneWith({Obj(1, Shape::kCube, 0.5, 0.0)});
  SceneState off = SceneWith({Obj(1, Shape::kCube, 0.3, 0.0)});
  Goal g;
  g.subgoals = {PlaceAt(1, {0.5, 0.0, 0.02})};
  GoalProgress p({}, 3);
  EXPECT_FALSE(p.Observe(on, g));
  EXPECT_FALSE(p.Observe(on, g));
  EXPECT_FALSE(p.Observe(off, g));
  EXPECT_FALSE(p.Observe(on, g));
  EXPECT_FALSE(p.Observe(on, g));
  EXPECT_TRUE(p.Observe(on, g));
  EXPECT_FALSE(p.Observe(off, g));
}

TEST(SuccessTest, HeldObjectIsNotPlaced) {
  SceneState s = SceneWith({Obj(1, Shape::kCube, 0.5, 0.0)});
  s.Find(1)->attached_to = 0;
  EXPECT_FALSE(SubgoalAchieved(PlaceAt(1, {0.5, 0.0, 0.02}), s, {}));
  Subgoal lift;
  lift.kind = GoalKind::kLift;
  lift.object = 1;
  lift.lift_height = 0.05;
  EXPECT_FALSE(SubgoalAchieved(lift, s, {}));
  s.Find(1)->pose.position.z() = 0.08;
  EXPECT_TRUE(SubgoalAchieved(lift, s, {}));
}

TEST(SuccessTest, StackAndContainer) {
  SceneObject base = Obj(1, Shape::kCube, 0.5, 0.0, 0.06);
  SceneObject top = Obj(2, Shape::kCube, 0.505, 0.0, 0.04);
  top.pose.position.z() = 0.5;
  SceneState s = SceneWith({base, top});
  Subgoal stack;
  stack.kind = GoalKind::kStackOn;
  stack.object = 2;
  stack.refs = {1};
  EXPECT_TRUE(SubgoalAchieved(stack, s, {0.01, 0.2}));
  EXPECT_FALSE(SubgoalAchieved(stack, s, {0.004, 0.2}));

  SceneObject bin = Obj(3, Shape::kContainer, 0.3, 0.2, 0.12);
  SceneObject cube = Obj(4, Shape::kCube, 0.31, 0.2, 0.04);
  cube.pose.position.z() = 0.5;
  SceneState t = SceneWith({bin, cube});
  Subgoal in;
  in.kind = GoalKind::kPlaceIn;
  in.object = 4;
  in.refs = {3};
  EXPECT_TRUE(SubgoalAchieved(in, t, {}));
  t.Find(4)->pose.position.x() = 0.37;  // outside the inner wall
  EXPECT_FALSE(SubgoalAchieved(in, t, {}));
}

TEST(SuccessTest, YawTarget) {
  SceneState s = SceneWith({Obj(1, Shape::kCube, 0.5, 0.0)});
  Subgoal g = PlaceAt(1, {0.5, 0.0, 0.02});
  g.target_yaw = 0.5;
  EXPECT_FALSE(SubgoalAchieved(g, s, {0.03, 0.2}));
  s.Find(1)->pose.orientation = YawQuat(0.4);
  EXPECT_TRUE(SubgoalAchieved(g, s, {0.03, 0.2}));
}

TEST(SuccessTest, TouchLatchesAndExclusiveContactFails) {
  SceneState s = SceneWith({Obj(1, Shape::kCube, 0.5, 0.0), Obj(2, Shape::kCube, 0.3, 0.0)});
  Subgoal touch;
  touch.kind = GoalKind::kTouch;
  touch.object = 1;
  touch.exclusive_contact = true;
  Goal g;
  g.subgoals = {touch};

  GoalProgress p({}, 5);
  s.gripper.pose.position = {0.5, 0.0, 0.045};
  EXPECT_TRUE(p.Observe(s, g));
  s.gripper.pose.position = {0.5, 0.0, 0.3};
  EXPECT_TRUE(p.Observe(s, g));  // touches only need to happen once

  GoalProgress q({}, 5);
  s.gripper.pose.position = {0.3, 0.0, 0.045};
  EXPECT_FALSE(q.Observe(s, g));
  EXPECT_TRUE(q.failed());
  s.gripper.pose.position = {0.5, 0.0, 0.045};
  EXPECT_FALSE(q.Observe(s, g));
}

TEST(SuccessTest, WindowedSubgoals) {
  SceneState s = SceneWith({Obj(1, Shape::kCube, 0.5, 0.0)});
  Subgoal touch;
  touch.kind = GoalKind::kTouch;
  touch.object = 1;
  touch.window = StepWindow{10, 20};
  Goal g;
  g.subgoals = {touch};
  s.gripper.pose.position = {0.5, 0.0, 0.045};

  GoalProgress early({}, 1);
  s.sim_step = 5;
  EXPECT_FALSE(early.Observe(s, g));
  EXPECT_TRUE(early.failed());

  GoalProgress late({}, 1);
  s.sim_step = 21;
  EXPECT_FALSE(late.Observe(s, g));
  EXPECT_TRUE(late.failed());

  GoalProgress on_time({}, 1);
  s.sim_step = 15;
  EXPECT_TRUE(on_time.Observe(s, g));
}

TEST(SuccessTest, SequentialGoalExtensionKeepsProgress) {
  SceneState s = SceneWith({Obj(1, Shape::kCube, 0.5, 0.0)});
  Subgoal touch;
  touch.kind = GoalKind::kTouch;
  touch.object = 1;
  Goal first;
  first.subgoals = {touch};
  s.gripper.pose.position = {0.5, 0.0, 0.045};
  GoalProgress p({}, 1);
  EXPECT_TRUE(p.Observe(s, first));

  Goal extended = first;
  Subgoal release;
  release.kind = GoalKind::kRelease;
  release.object = 1;
  extended.subgoals.push_back(release);
  s.gripper.pose.position = {0.5, 0.0, 0.3};
  EXPECT_TRUE(p.Observe(s, extended));
  EXPECT_EQ(p.next_index(), 2u);
}

TEST(SuccessTest, TrackerRejectsForeignStates) {
  const GeneratedTask t = GenerateTask({Family::kControl, Tier::kEasy, 1}, 0);
  SceneState other = t.scene;
  other.scene_id ^= 1;
  try {
    EvaluateSuccess(t.spec, {t.scene, other});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSpecMismatch);
  }
  SceneState robot = t.scene;
  robot.embodiment.robot_id = "x";
  EXPECT_THROW(EvaluateSuccess(t.spec, {robot}), Error);
  EXPECT_THROW(EvaluateSuccess(t.spec, {}), Error);
  EXPECT_FALSE(EvaluateSuccess(t.spec, {t.scene}));
}

}  // namespace
}  // namespace nebula
