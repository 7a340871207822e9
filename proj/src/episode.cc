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

#include "nebula/episode.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <tuple>

#include "nebula/error.h"

namespace nebula {

EmbodimentConfig DefaultEmbodiment() {
  EmbodimentConfig e;
  e.robot_id = "desk_arm_7dof";
  e.dof = 7;
  e.gripper = GripperType::kParallelJaw;
  e.arm_count = 1;
  // x, y, z, yaw, roll, pitch, redundant yaw. The first three are scaled
  // to the table workspace by the simulator's kinematic chain.
  e.joint_limits = {{-0.6, 0.6},   {-0.8, 0.8},   {-0.6, 0.4},
                    {-3.14, 3.14}, {-1.57, 1.57}, {-1.57, 1.57},
                    {-3.14, 3.14}};
  return e;
}

float Image::DepthAt(int x, int y) const {
  float v;
  std::memcpy(&v, data.data() + (static_cast<std::size_t>(y) * width + x) * 4,
              sizeof(v));
  return v;
}

std::uint16_t Image::SegmentAt(int x, int y) const {
  const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 2;
  return static_cast<std::uint16_t>(data[o] | (data[o + 1] << 8));
}

std::string_view ViolationCodeName(ViolationCode code) {
  switch (code) {
    case ViolationCode::kEmbodimentDof: return "EMBODIMENT_DOF";
    case ViolationCode::kJointLimits: return "JOINT_LIMITS";
    case ViolationCode::kArmCount: return "ARM_COUNT";
    case ViolationCode::kEmptyEpisodeId: return "EMPTY_EPISODE_ID";
    case ViolationCode::kEmptySteps: return "EMPTY_STEPS";
    case ViolationCode::kStepOrder: return "STEP_ORDER";
    case ViolationCode::kActionDim: return "ACTION_DIM";
    case ViolationCode::kActionRange: return "ACTION_RANGE";
    case ViolationCode::kObservationDim: return "OBSERVATION_DIM";
    case ViolationCode::kCameraSet: return "CAMERA_SET";
    case ViolationCode::kImageSize: return "IMAGE_SIZE";
    case ViolationCode::kNegativeTime: return "NEGATIVE_TIME";
    case ViolationCode::kSuccessFlag: return "SUCCESS_FLAG";
    case ViolationCode::kFinalSuccess: return "FINAL_SUCCESS";
  }
  return "UNKNOWN";
}

bool ValidationReport::Has(ViolationCode code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [code](const Violation& v) { return v.code == code; });
}

namespace {

// Step-level problems are reported once per code: first offending step plus
// a count, so a systematically wrong episode yields one entry, not hundreds.
class Collector {
 public:
  void Episode(ViolationCode code, std::string detail) {
    out_.push_back({code, -1, std::move(detail)});
  }

  void AtStep(ViolationCode code, std::int64_t step, std::string detail) {
    auto [it, inserted] = first_.try_emplace(code, Entry{step, 0, detail});
    ++it->second.count;
  }

  ValidationReport Finish() {
    for (auto& [code, e] : first_) {
      std::string detail = e.detail;
      if (e.count > 1) detail += " (" + std::to_string(e.count) + " steps)";
      out_.push_back({code, e.step, std::move(detail)});
    }
    std::sort(out_.begin(), out_.end(), [](const Violation& a, const Violation& b) {
      return std::tie(a.code, a.step, a.detail) < std::tie(b.code, b.step, b.detail);
    });
    return ValidationReport{std::move(out_)};
  }

 private:
  struct Entry {
    std::int64_t step;
    int count;
    std::string detail;
  };
  std::map<ViolationCode, Entry> first_;
  std::vector<Violation> out_;
};

void CheckEmbodiment(const EmbodimentConfig& e, Collector& c) {
  if (e.dof < 1) c.Episode(ViolationCode::kEmbodimentDof, "dof < 1");
  if (e.arm_count < 1) c.Episode(ViolationCode::kArmCount, "arm_count < 1");
  if (static_cast<int>(e.joint_limits.size()) != e.dof) {
    c.Episode(ViolationCode::kJointLimits, "joint_limits size != dof");
  } else {
    for (std::size_t j = 0; j < e.joint_limits.size(); ++j) {
      const auto& l = e.joint_limits[j];
      if (!(l.min < l.max)) {
        c.Episode(ViolationCode::kJointLimits,
                  "joint " + std::to_string(j) + " has min >= max");
        break;
      }
    }
  }
}

void CheckObservation(const Observation& obs, std::int64_t step, int dof,
                      Collector& c) {
  if (static_cast<int>(obs.q.size()) != dof ||
      static_cast<int>(obs.q_dot.size()) != dof) {
    c.AtStep(ViolationCode::kObservationDim, step, "q/q_dot size != dof");
  }
  if (obs.t < 0) c.AtStep(ViolationCode::kNegativeTime, step, "t < 0");

  bool complete = obs.views.size() == kAllCameras.size() * kAllModalities.size();
  for (CameraId cam : kAllCameras) {
    for (Modality m : kAllModalities) {
      if (!obs.views.contains({cam, m})) complete = false;
    }
  }
  if (!complete) {
    c.AtStep(ViolationCode::kCameraSet, step,
             "views must cover 6 cameras x 3 modalities");
  }
  for (const auto& [key, img] : obs.views) {
    if (img.modality != key.second || img.width < 0 || img.height < 0 ||
        img.data.size() != img.ExpectedBytes()) {
      c.AtStep(ViolationCode::kImageSize, step,
               std::string("bad payload for ") +
                   std::string(CameraName(key.first)) + "/" +
                   std::string(ModalityName(key.second)));
      break;
    }
  }
}

}  // namespace

ValidationReport ValidateEmbodiment(const EmbodimentConfig& embodiment) {
  Collector c;
  CheckEmbodiment(embodiment, c);
  return c.Finish();
}

ValidationReport ValidateEpisode(const Episode& ep) {
  Collector c;
  CheckEmbodiment(ep.embodiment, c);
  if (ep.episode_id.empty()) c.Episode(ViolationCode::kEmptyEpisodeId, "");
  if (ep.steps.empty()) {
    c.Episode(ViolationCode::kEmptySteps, "episode has no steps");
    return c.Finish();
  }

  const int dof = ep.embodiment.dof;
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    const Step& s = ep.steps[i];
    const auto pos = static_cast<std::int64_t>(i);
    if (s.index != pos) {
      c.AtStep(ViolationCode::kStepOrder, pos,
               "index " + std::to_string(s.index) + " at position " +
                   std::to_string(pos));
    }
    if (static_cast<int>(s.action.values.size()) != dof + 1) {
      c.AtStep(ViolationCode::kActionDim, pos,
               "action length " + std::to_string(s.action.values.size()) +
                   ", expected " + std::to_string(dof + 1));
    }
    for (double v : s.action.values) {
      if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
        c.AtStep(ViolationCode::kActionRange, pos, "component outside [-1, 1]");
        break;
      }
    }
    if (s.success > 1) c.AtStep(ViolationCode::kSuccessFlag, pos, "success not in {0,1}");
    CheckObservation(s.observation, pos, dof, c);
  }
  if (ep.final_success > 1 || ep.final_success != ep.steps.back().success) {
    c.Episode(ViolationCode::kFinalSuccess,
              "final_success must equal the last step's flag");
  }
  return c.Finish();
}

bool EpisodeSuccess(const Episode& episode) {
  const ValidationReport report = ValidateEpisode(episode);
  if (!report.ok()) {
    throw Error(ErrorCode::kInvalidEpisode,
                std::string(ViolationCodeName(report.violations.front().code)));
  }
  return episode.steps.back().success == 1;
}

}  // namespace nebula
