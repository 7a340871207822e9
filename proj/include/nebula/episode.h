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

// Canonical trajectory records. An Episode is one complete task attempt:
// instruction, task metadata, the embodiment it ran on, and a time-ordered
// list of Steps, each holding the observation the policy saw, the action it
// returned and the binary success label after that action.

#ifndef NEBULA_EPISODE_H_
#define NEBULA_EPISODE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nebula/types.h"

namespace nebula {

struct JointLimit {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const JointLimit&) const = default;
};

// Robot hardware description, decoupled from episode content.
struct EmbodimentConfig {
  std::string robot_id;
  int dof = 0;
  GripperType gripper = GripperType::kParallelJaw;
  int arm_count = 1;
  std::vector<JointLimit> joint_limits;  // radians, one per joint

  bool operator==(const EmbodimentConfig&) const = default;
};

// 7-joint single-arm parallel-jaw robot used unless a run says otherwise.
EmbodimentConfig DefaultEmbodiment();

// Row-major pixel payload. rgb is 3 bytes/px, depth a little-endian float32
// in meters, segmentation a little-endian uint16 object id.
struct Image {
  int width = 0;
  int height = 0;
  Modality modality = Modality::kRgb;
  std::vector<std::uint8_t> data;

  std::size_t ExpectedBytes() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(ModalityStride(modality));
  }
  float DepthAt(int x, int y) const;
  std::uint16_t SegmentAt(int x, int y) const;

  bool operator==(const Image&) const = default;
};

using ViewKey = std::pair<CameraId, Modality>;

struct Observation {
  std::map<ViewKey, Image> views;
  std::vector<double> q;      // rad
  std::vector<double> q_dot;  // rad/s
  std::int64_t t = 0;
  double wall_time = 0.0;  // seconds since episode start

  bool operator==(const Observation&) const = default;
};

// Normalized joint-delta targets in [-1, 1] for each joint, followed by one
// gripper command (-1 open, +1 close).
struct Action {
  std::vector<double> values;
  bool operator==(const Action&) const = default;
};

struct Step {
  std::int64_t index = 0;
  Observation observation;
  Action action;
  std::uint8_t success = 0;

  bool operator==(const Step&) const = default;
};

struct TaskMeta {
  Family family = Family::kControl;
  Tier tier = Tier::kEasy;
  int template_id = 1;
  std::uint64_t seed = 0;
  std::string variant_tag;

  bool operator==(const TaskMeta&) const = default;
};

struct Episode {
  std::string episode_id;
  std::string instruction;
  EmbodimentConfig embodiment;
  TaskMeta task_meta;
  std::vector<Step> steps;
  std::uint8_t final_success = 0;

  bool operator==(const Episode&) const = default;
};

enum class ViolationCode {
  kEmbodimentDof,
  kJointLimits,
  kArmCount,
  kEmptyEpisodeId,
  kEmptySteps,
  kStepOrder,
  kActionDim,
  kActionRange,
  kObservationDim,
  kCameraSet,
  kImageSize,
  kNegativeTime,
  kSuccessFlag,
  kFinalSuccess,
};

std::string_view ViolationCodeName(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::int64_t step = -1;  // -1 when the violation is episode-level
  std::string detail;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;  // sorted by (code, step, detail)

  bool ok() const { return violations.empty(); }
  bool Has(ViolationCode code) const;
};

ValidationReport ValidateEmbodiment(const EmbodimentConfig& embodiment);
ValidationReport ValidateEpisode(const Episode& episode);

// Final-step success label. Throws Error(kInvalidEpisode) when the episode
// fails validation.
bool EpisodeSuccess(const Episode& episode);

}  // namespace nebula

#endif  // NEBULA_EPISODE_H_
