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

// The policy contract and the in-process reference policies.
//
// The harness drives a policy synchronously: Reset once per episode, then
// one Act per observation. Scripted policies may also receive the simulator
// state through OnPrivilegedState, which the runner calls outside the timed
// region before every Act.

#ifndef NEBULA_POLICY_H_
#define NEBULA_POLICY_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nebula/episode.h"
#include "nebula/rng.h"
#include "nebula/scene.h"
#include "nebula/success.h"

namespace nebula {

class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string id() const = 0;
  virtual void Reset(const std::string& instruction, const EmbodimentConfig& embodiment) = 0;
  virtual Action Act(const Observation& obs) = 0;

  // Whether observations must carry rendered pixels.
  virtual bool needs_images() const { return false; }
  // Size of the policy's weights or other on-disk artifact.
  virtual std::uint64_t artifact_bytes() const { return 0; }
  // Accelerator memory in use, when the policy can report it.
  virtual std::optional<std::uint64_t> accelerator_bytes() const { return std::nullopt; }
  // True for policies living in another process.
  virtual bool external() const { return false; }

  virtual void OnPrivilegedState(const SceneState& /*scene*/) {}
  virtual void OnInstruction(const std::string& /*instruction*/) {}
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

enum class PolicyMode : std::uint8_t { kInProcessScripted, kExternalBridge };

struct ActTiming {
  std::int64_t observe_ns = 0;  // observation handed to the policy
  std::int64_t action_ns = 0;   // action returned
  double latency_ms() const { return static_cast<double>(action_ns - observe_ns) / 1e6; }
};

std::int64_t MonotonicNanos();

// Enforces the call protocol and records timing around Act.
class PolicyHandle {
 public:
  explicit PolicyHandle(std::unique_ptr<Policy> policy);

  // Latches the instruction and clears policy state.
  void Reset(const std::string& instruction, const EmbodimentConfig& embodiment);
  // Throws kProtocolViolation before Reset, kMalformedAction for actions of
  // the wrong size or with components outside [-1, 1].
  Action Act(const Observation& obs);

  void OnPrivilegedState(const SceneState& scene) { policy_->OnPrivilegedState(scene); }
  void OnInstruction(const std::string& instruction) { policy_->OnInstruction(instruction); }

  std::string id() const { return policy_->id(); }
  PolicyMode mode() const {
    return policy_->external() ? PolicyMode::kExternalBridge : PolicyMode::kInProcessScripted;
  }
  const EmbodimentConfig& embodiment() const { return embodiment_; }
  Policy& policy() { return *policy_; }
  const std::vector<ActTiming>& timings() const { return timings_; }
  void ClearTimings() { timings_.clear(); }

 private:
  std::unique_ptr<Policy> policy_;
  EmbodimentConfig embodiment_;
  bool ready_ = false;
  std::vector<ActTiming> timings_;
};

// Plans straight end-effector moves from the privileged scene every step:
// travel above everything, descend onto the object, grasp, carry, release.
class ScriptedExpert : public Policy {
 public:
  struct Options {
    bool allow_grasp = true;  // false gives the reach-only variant
  };
  ScriptedExpert() = default;
  explicit ScriptedExpert(Options options) : options_(options) {}

  std::string id() const override { return options_.allow_grasp ? "expert" : "reach-only"; }
  void Reset(const std::string& instruction, const EmbodimentConfig& embodiment) override;
  Action Act(const Observation& obs) override;
  void OnPrivilegedState(const SceneState& scene) override;

  // Action for a scene given the subgoal in progress; exposed for tests.
  Action Plan(const SceneState& scene, const Subgoal* subgoal) const;

 private:
  Options options_;
  EmbodimentConfig embodiment_;
  std::optional<SceneState> scene_;
  std::optional<GoalProgress> progress_;
};

// Runs the expert open-loop on a private copy of the first scene it sees,
// with events removed. It never notices displacements or new instructions.
class FrozenPolicy : public Policy {
 public:
  std::string id() const override { return "frozen"; }
  void Reset(const std::string& instruction, const EmbodimentConfig& embodiment) override;
  Action Act(const Observation& obs) override;
  void OnPrivilegedState(const SceneState& scene) override;

 private:
  ScriptedExpert inner_;
  std::optional<SceneState> world_;
};

// I.i.d. uniform actions in [-1, 1]; reseeded on every Reset.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  std::string id() const override { return "random:" + std::to_string(seed_); }
  void Reset(const std::string& instruction, const EmbodimentConfig& embodiment) override;
  Action Act(const Observation& obs) override;

 private:
  std::uint64_t seed_;
  Rng rng_;
  int dof_ = 0;
};

// Returns the zero action after sleeping until `delay` has elapsed since
// the call began.
class DelayedConstantPolicy : public Policy {
 public:
  explicit DelayedConstantPolicy(std::chrono::microseconds delay) : delay_(delay) {}
  std::string id() const override;
  void Reset(const std::string& instruction, const EmbodimentConfig& embodiment) override;
  Action Act(const Observation& obs) override;

 private:
  std::chrono::microseconds delay_;
  int dof_ = 0;
};

// Zero action plus i.i.d. uniform noise in [-amplitude, amplitude].
class JitterPolicy : public Policy {
 public:
  explicit JitterPolicy(double amplitude, std::uint64_t seed = 0);
  std::string id() const override;
  void Reset(const std::string& instruction, const EmbodimentConfig& embodiment) override;
  Action Act(const Observation& obs) override;

 private:
  double amplitude_;
  std::uint64_t seed_;
  Rng rng_;
  int dof_ = 0;
};

// Always the zero action; measures harness overhead.
class ZeroPolicy : public Policy {
 public:
  std::string id() const override { return "zero"; }
  void Reset(const std::string& instruction, const EmbodimentConfig& embodiment) override;
  Action Act(const Observation& obs) override;

 private:
  int dof_ = 0;
};

// In-process selectors: expert, reach-only, frozen, zero, random:SEED,
// delayed:MS, jitter:AMP. Returns nullopt for anything else; throws
// kInvalidArgument for a known name with a bad parameter.
std::optional<PolicyFactory> ScriptedPolicyFactory(const std::string& selector);

}  // namespace nebula

#endif  // NEBULA_POLICY_H_
