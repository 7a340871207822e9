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

#include "nebula/policy.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "nebula/error.h"

namespace nebula {

std::int64_t MonotonicNanos() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------------------
// PolicyHandle

PolicyHandle::PolicyHandle(std::unique_ptr<Policy> policy) : policy_(std::move(policy)) {
  if (!policy_) throw Error(ErrorCode::kInvalidArgument, "null policy");
}

void PolicyHandle::Reset(const std::string& instruction, const EmbodimentConfig& embodiment) {
  ready_ = false;
  policy_->Reset(instruction, embodiment);
  embodiment_ = embodiment;
  ready_ = true;
}

Action PolicyHandle::Act(const Observation& obs) {
  if (!ready_) throw Error(ErrorCode::kProtocolViolation, "act() called before reset()");
  ActTiming timing;
  timing.observe_ns = MonotonicNanos();
  Action a = policy_->Act(obs);
  timing.action_ns = MonotonicNanos();
  timings_.push_back(timing);
  const std::size_t want = static_cast<std::size_t>(embodiment_.dof) + 1;
  if (a.values.size() != want) {
    throw Error(ErrorCode::kMalformedAction, "action has " + std::to_string(a.values.size()) +
                                                 " components, expected " + std::to_string(want));
  }
  for (double v : a.values) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
      throw Error(ErrorCode::kMalformedAction, "action component outside [-1, 1]");
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// ScriptedExpert

namespace {

constexpr double kGripOpen = -1.0;
constexpr double kGripClose = 1.0;
constexpr double kGraspDepth = 0.003;   // tip target below an object's top
constexpr double kClearance = 0.05;     // travel height above the tallest top
constexpr double kAlignRadius = 0.02;   // xy error below which the tip descends
constexpr double kReleaseGap = 0.002;   // drop height for placements
constexpr double kHover = 0.03;         // waiting height for windowed goals
constexpr double kLiftMargin = 0.03;
constexpr double kYawAlign = 0.01;

double Top(const SceneObject& o) { return o.pose.position.z() + WorldHalfHeight(o); }
double Bottom(const SceneObject& o) { return o.pose.position.z() - WorldHalfHeight(o); }

double WrapPi(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

// Signed smallest rotation taking `yaw` to `target` modulo `period`.
double YawDelta(double yaw, double target, double period) {
  if (period <= 0) return WrapPi(target - yaw);
  double d = std::fmod(target - yaw, period);
  if (d > period / 2) d -= period;
  if (d < -period / 2) d += period;
  return d;
}

struct Command {
  Vec3 tip;                    // desired tip position
  std::optional<double> yaw;   // desired tip yaw; current when empty
  double grip = kGripOpen;
};

// Joint-space action reaching the commanded tip pose as fast as the
// per-step limit allows.
Action ToAction(const SceneState& s, const Command& c) {
  const int dof = s.embodiment.dof;
  Action a;
  a.values.assign(dof + 1, 0.0);
  const Vec3 origin = WorkspaceOrigin();
  int first_yaw = -1;
  double other_yaw = 0.0;
  for (int j = 0; j < dof; ++j) {
    if (AxisOfJoint(j) != JointAxis::kYaw) continue;
    if (first_yaw < 0) {
      first_yaw = j;
    } else {
      other_yaw += s.q[j];
    }
  }
  for (int j = 0; j < dof; ++j) {
    double want = 0.0;
    switch (AxisOfJoint(j)) {
      case JointAxis::kX: want = (c.tip.x() - origin.x()) / kLinearJointScale; break;
      case JointAxis::kY: want = (c.tip.y() - origin.y()) / kLinearJointScale; break;
      case JointAxis::kZ: want = (c.tip.z() - origin.z()) / kLinearJointScale; break;
      case JointAxis::kYaw:
        want = j == first_yaw ? (c.yaw ? *c.yaw - other_yaw : s.q[j]) : 0.0;
        break;
      case JointAxis::kRoll:
      case JointAxis::kPitch: want = 0.0; break;
    }
    const auto& lim = s.embodiment.joint_limits[j];
    want = std::clamp(want, lim.min, lim.max);
    a.values[j] = std::clamp((want - s.q[j]) / kMaxJointDelta, -1.0, 1.0);
  }
  a.values[dof] = c.grip;
  return a;
}

// True when one step of joint motion lands exactly on the commanded pose.
bool Reachable(const SceneState& s, const Command& c) {
  const Vec3 d = c.tip - s.gripper.pose.position;
  const double step = kMaxJointDelta * kLinearJointScale * (1.0 - 1e-9);
  if (d.cwiseAbs().maxCoeff() > step) return false;
  if (c.yaw && std::abs(WrapPi(*c.yaw - Yaw(s.gripper.pose.orientation))) > kMaxJointDelta * (1 - 1e-9)) {
    return false;
  }
  return true;
}

class Planner {
 public:
  Planner(const SceneState& s, bool allow_grasp) : s_(s), allow_grasp_(allow_grasp) {
    tip_ = s.gripper.pose.position;
    held_ = s.Held();
  }

  Action Idle() const {
    Command c{tip_, std::nullopt, held_ ? kGripClose : kGripOpen};
    return ToAction(s_, c);
  }

  Action For(const Subgoal& g) const {
    const SceneObject* obj = s_.Find(g.object);
    if (!obj) return Idle();
    const bool waiting = g.window && s_.sim_step + 1 < g.window->begin;
    switch (g.kind) {
      case GoalKind::kTouch: {
        if (held_) return LetGo();
        Vec3 target = TopPoint(*obj);
        if (waiting) target.z() += kHover;
        return ToAction(s_, Approach(target, kGripOpen));
      }
      case GoalKind::kLift: {
        if (held_ != obj) return Acquire(*obj);
        const double rise = std::max(0.0, g.lift_height + kLiftMargin - Bottom(*obj));
        return ToAction(s_, Command{tip_ + Vec3(0, 0, rise), std::nullopt, kGripClose});
      }
      case GoalKind::kRelease:
        return ToAction(s_, Command{tip_ + Vec3(0, 0, held_ == obj ? 0.0 : 0.02), std::nullopt,
                                    kGripOpen});
      case GoalKind::kPlaceAt:
      case GoalKind::kPlaceIn:
      case GoalKind::kStackOn:
      case GoalKind::kRelation: {
        if (held_ != obj) return Acquire(*obj);
        return Carry(*obj, PlacementTarget(g, *obj), g, waiting);
      }
    }
    return Idle();
  }

 private:
  Vec3 TopPoint(const SceneObject& o) const {
    return Vec3(o.pose.position.x(), o.pose.position.y(), Top(o) - kGraspDepth);
  }

  // Tip height that keeps the tip, and whatever it carries, clear of every
  // other object.
  double SafeZ() const {
    double top = 0.0;
    for (const auto& o : s_.objects) {
      if (&o == held_) continue;
      top = std::max(top, Top(o));
    }
    double z = top + kClearance;
    if (held_) z += tip_.z() - Bottom(*held_);
    return std::min(z, WorkspaceOrigin().z() + 0.2 - 1e-6);
  }

  Command Approach(const Vec3& target, double grip) const {
    const double xy_err = (target.head<2>() - tip_.head<2>()).norm();
    if (xy_err <= kAlignRadius) return Command{target, std::nullopt, grip};
    const double safe = SafeZ();
    if (tip_.z() < safe - 0.01) {
      return Command{Vec3(tip_.x(), tip_.y(), safe), std::nullopt, grip};
    }
    return Command{Vec3(target.x(), target.y(), std::max(safe, tip_.z() - 0.0)), std::nullopt,
                   grip};
  }

  Action LetGo() const {
    return ToAction(s_, Command{tip_ + Vec3(0, 0, 0.02), std::nullopt, kGripOpen});
  }

  Action Acquire(const SceneObject& obj) const {
    if (held_) return LetGo();
    const Vec3 target = TopPoint(obj);
    Command c = Approach(target, kGripOpen);
    const bool aligned = (target.head<2>() - tip_.head<2>()).norm() <= kAlignRadius;
    if (allow_grasp_ && aligned && Reachable(s_, c)) {
      // Close on the step that lands on the grasp point. A closed empty
      // gripper opens first so the next close is a real transition.
      if (s_.gripper.aperture >= 0.5) c.grip = kGripClose;
    }
    return ToAction(s_, c);
  }

  Vec3 PlacementTarget(const Subgoal& g, const SceneObject& obj) const {
    if (g.kind == GoalKind::kStackOn && !g.refs.empty()) {
      if (const SceneObject* base = s_.Find(g.refs[0])) {
        return Vec3(base->pose.position.x(), base->pose.position.y(),
                    Top(*base) + WorldHalfHeight(obj));
      }
    }
    return g.target;
  }

  Action Carry(const SceneObject& obj, const Vec3& center, const Subgoal& g, bool waiting) const {
    const double tip_yaw = Yaw(s_.gripper.pose.orientation);
    double delta = 0.0;
    if (g.target_yaw) delta = YawDelta(Yaw(obj.pose.orientation), *g.target_yaw, g.yaw_period);
    const Vec3 rel = obj.pose.position - tip_;
    const Vec3 rotated = Eigen::AngleAxisd(delta, Vec3::UnitZ()) * rel;
    Vec3 tip_goal = center + Vec3(0, 0, kReleaseGap) - rotated;
    if (waiting) tip_goal.z() += kHover;
    const double want_yaw = tip_yaw + delta;
    const double xy_err = (tip_goal.head<2>() - tip_.head<2>()).norm();

    Command c{tip_goal, want_yaw, kGripClose};
    if (xy_err > kAlignRadius || std::abs(delta) > kYawAlign) {
      const double safe = SafeZ();
      if (tip_.z() < safe - 0.01) {
        c.tip = Vec3(tip_.x(), tip_.y(), safe);
      } else {
        c.tip = Vec3(tip_goal.x(), tip_goal.y(), safe);
      }
      return ToAction(s_, c);
    }
    if (!waiting && Reachable(s_, c)) c.grip = kGripOpen;
    return ToAction(s_, c);
  }

  const SceneState& s_;
  bool allow_grasp_;
  Vec3 tip_;
  const SceneObject* held_;
};

}  // namespace

void ScriptedExpert::Reset(const std::string&, const EmbodimentConfig& embodiment) {
  embodiment_ = embodiment;
  scene_.reset();
  progress_.emplace(Tolerance{0.004, 0.02}, 1);
}

void ScriptedExpert::OnPrivilegedState(const SceneState& scene) {
  scene_ = scene;
  if (!progress_) progress_.emplace(Tolerance{0.004, 0.02}, 1);
  progress_->Observe(scene);
}

Action ScriptedExpert::Plan(const SceneState& scene, const Subgoal* subgoal) const {
  Planner planner(scene, options_.allow_grasp);
  return subgoal ? planner.For(*subgoal) : planner.Idle();
}

Action ScriptedExpert::Act(const Observation&) {
  if (!scene_) {
    Action a;
    a.values.assign(embodiment_.dof + 1, 0.0);
    a.values.back() = kGripOpen;
    return a;
  }
  const auto& goals = progress_->subgoals();
  const Subgoal* current = nullptr;
  if (progress_->next_index() < goals.size()) {
    current = &goals[progress_->next_index()];
  } else {
    // Everything reached once; repair any placement that no longer holds.
    const Tolerance tol{0.004, 0.02};
    for (std::size_t i = 0; i < goals.size(); ++i) {
      if (IsPersistent(goals[i], i + 1 == goals.size()) && !SubgoalAchieved(goals[i], *scene_, tol)) {
        current = &goals[i];
        break;
      }
    }
  }
  return Plan(*scene_, current);
}

// ---------------------------------------------------------------------------
// FrozenPolicy

void FrozenPolicy::Reset(const std::string& instruction, const EmbodimentConfig& embodiment) {
  inner_.Reset(instruction, embodiment);
  world_.reset();
}

void FrozenPolicy::OnPrivilegedState(const SceneState& scene) {
  if (world_) return;
  world_ = scene;
  world_->event_queue.clear();
}

Action FrozenPolicy::Act(const Observation& obs) {
  if (!world_) return inner_.Act(obs);
  inner_.OnPrivilegedState(*world_);
  Action a = inner_.Act(obs);
  *world_ = StepScene(*world_, a);
  return a;
}

// ---------------------------------------------------------------------------
// Simple policies

void RandomPolicy::Reset(const std::string&, const EmbodimentConfig& embodiment) {
  dof_ = embodiment.dof;
  rng_ = Rng(seed_);
}

Action RandomPolicy::Act(const Observation&) {
  Action a;
  a.values.resize(dof_ + 1);
  for (double& v : a.values) v = rng_.Uniform(-1.0, 1.0);
  return a;
}

std::string DelayedConstantPolicy::id() const {
  return fmt::format("delayed:{:g}", delay_.count() / 1000.0);
}

void DelayedConstantPolicy::Reset(const std::string&, const EmbodimentConfig& embodiment) {
  dof_ = embodiment.dof;
}

Action DelayedConstantPolicy::Act(const Observation&) {
  const auto deadline = std::chrono::steady_clock::now() + delay_;
  std::this_thread::sleep_until(deadline);
  Action a;
  a.values.assign(dof_ + 1, 0.0);
  return a;
}

JitterPolicy::JitterPolicy(double amplitude, std::uint64_t seed)
    : amplitude_(amplitude), seed_(seed), rng_(seed) {
  if (!(amplitude >= 0.0 && amplitude <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "jitter amplitude must lie in [0, 1]");
  }
}

std::string JitterPolicy::id() const { return fmt::format("jitter:{:g}", amplitude_); }

void JitterPolicy::Reset(const std::string&, const EmbodimentConfig& embodiment) {
  dof_ = embodiment.dof;
  rng_ = Rng(seed_);
}

Action JitterPolicy::Act(const Observation&) {
  Action a;
  a.values.resize(dof_ + 1);
  for (double& v : a.values) v = amplitude_ == 0.0 ? 0.0 : rng_.Uniform(-amplitude_, amplitude_);
  return a;
}

void ZeroPolicy::Reset(const std::string&, const EmbodimentConfig& embodiment) {
  dof_ = embodiment.dof;
}

Action ZeroPolicy::Act(const Observation&) {
  Action a;
  a.values.assign(dof_ + 1, 0.0);
  return a;
}

// ---------------------------------------------------------------------------
// Selectors

namespace {

double ParseNumber(const std::string& text, const std::string& selector) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad parameter in policy selector '" + selector + "'");
  }
}

}  // namespace

std::optional<PolicyFactory> ScriptedPolicyFactory(const std::string& selector) {
  const auto colon = selector.find(':');
  const std::string name = selector.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : selector.substr(colon + 1);
  auto need_arg = [&] {
    if (arg.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "policy selector '" + selector + "' needs a value");
    }
  };
  if (name == "expert" && arg.empty()) {
    return PolicyFactory([] { return std::make_unique<ScriptedExpert>(); });
  }
  if (name == "reach-only" && arg.empty()) {
    return PolicyFactory(
        [] { return std::make_unique<ScriptedExpert>(ScriptedExpert::Options{false}); });
  }
  if (name == "frozen" && arg.empty()) {
    return PolicyFactory([] { return std::make_unique<FrozenPolicy>(); });
  }
  if (name == "zero" && arg.empty()) {
    return PolicyFactory([] { return std::make_unique<ZeroPolicy>(); });
  }
  if (name == "random") {
    need_arg();
    const double v = ParseNumber(arg, selector);
    if (v < 0 || v != std::floor(v)) {
      throw Error(ErrorCode::kInvalidArgument, "random seed must be a nonnegative integer");
    }
    const auto seed = static_cast<std::uint64_t>(v);
    return PolicyFactory([seed] { return std::make_unique<RandomPolicy>(seed); });
  }
  if (name == "delayed") {
    need_arg();
    const double ms = ParseNumber(arg, selector);
    if (ms < 0) throw Error(ErrorCode::kInvalidArgument, "delay must be >= 0");
    const auto us = std::chrono::microseconds(static_cast<std::int64_t>(std::llround(ms * 1000.0)));
    return PolicyFactory([us] { return std::make_unique<DelayedConstantPolicy>(us); });
  }
  if (name == "jitter") {
    need_arg();
    const double amp = ParseNumber(arg, selector);
    JitterPolicy probe(amp);  // validates the amplitude
    return PolicyFactory([amp] { return std::make_unique<JitterPolicy>(amp); });
  }
  return std::nullopt;
}

}  // namespace nebula
