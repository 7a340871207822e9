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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "nebula/error.h"
#include "test_support.h"

namespace nebula {
namespace {

using testing::MakeEpisode;
using testing::SyntheticSpec;

TEST(EpisodeTest, SyntheticEpisodeIsValid) {
  const Episode ep = MakeEpisode({});
  const ValidationReport r = ValidateEpisode(ep);
  EXPECT_TRUE(r.ok()) << (r.ok() ? "" : r.violations.front().detail);
}

TEST(EpisodeTest, DefaultEmbodimentIsValid) {
  const EmbodimentConfig e = DefaultEmbodiment();
  EXPECT_EQ(e.dof, 7);
  EXPECT_TRUE(ValidateEmbodiment(e).ok());
}

TEST(EpisodeTest, EmbodimentViolations) {
  EmbodimentConfig e = DefaultEmbodiment();
  e.dof = 0;
  EXPECT_TRUE(ValidateEmbodiment(e).Has(ViolationCode::kEmbodimentDof));
  e = DefaultEmbodiment();
  e.joint_limits.pop_back();
  EXPECT_TRUE(ValidateEmbodiment(e).Has(ViolationCode::kJointLimits));
  e = DefaultEmbodiment();
  e.joint_limits[2] = {0.5, 0.5};
  EXPECT_TRUE(ValidateEmbodiment(e).Has(ViolationCode::kJointLimits));
  e = DefaultEmbodiment();
  e.arm_count = 0;
  EXPECT_TRUE(ValidateEmbodiment(e).Has(ViolationCode::kArmCount));
}

TEST(EpisodeTest, EmptyStepsAndId) {
  Episode ep = MakeEpisode({});
  ep.steps.clear();
  ep.episode_id.clear();
  const ValidationReport r = ValidateEpisode(ep);
  EXPECT_TRUE(r.Has(ViolationCode::kEmptySteps));
  EXPECT_TRUE(r.Has(ViolationCode::kEmptyEpisodeId));
}

TEST(EpisodeTest, ActionDimensionIsDofPlusGripper) {
  Episode ep = MakeEpisode({});
  ep.steps[1].action.values.pop_back();
  const ValidationReport r = ValidateEpisode(ep);
  ASSERT_TRUE(r.Has(ViolationCode::kActionDim));
  EXPECT_EQ(r.violations.front().step, 1);
}

TEST(EpisodeTest, ActionRange) {
  Episode ep = MakeEpisode({});
  ep.steps[0].action.values[0] = 1.0000001;
  EXPECT_TRUE(ValidateEpisode(ep).Has(ViolationCode::kActionRange));
  ep.steps[0].action.values[0] = std::nan("");
  EXPECT_TRUE(ValidateEpisode(ep).Has(ViolationCode::kActionRange));
  ep.steps[0].action.values[0] = -1.0;
  EXPECT_TRUE(ValidateEpisode(ep).ok());
}

TEST(EpisodeTest, StepOrderReportedOncePerCode) {
  SyntheticSpec spec;
  spec.steps = 5;
  Episode ep = MakeEpisode(spec);
  for (auto& s : ep.steps) s.index += 10;
  const ValidationReport r = ValidateEpisode(ep);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].code, ViolationCode::kStepOrder);
  EXPECT_EQ(r.violations[0].step, 0);
  EXPECT_NE(r.violations[0].detail.find("5 steps"), std::string::npos);
}

TEST(EpisodeTest, ObservationChecks) {
  Episode ep = MakeEpisode({});
  ep.steps[2].observation.q.pop_back();
  EXPECT_TRUE(ValidateEpisode(ep).Has(ViolationCode::kObservationDim));

  ep = MakeEpisode({});
  ep.steps[0].observation.views.erase({CameraId::kWrist, Modality::kDepth});
  EXPECT_TRUE(ValidateEpisode(ep).Has(ViolationCode::kCameraSet));

  ep = MakeEpisode({});
  ep.steps[0].observation.views.at({CameraId::kTop, Modality::kRgb}).data.pop_back();
  EXPECT_TRUE(ValidateEpisode(ep).Has(ViolationCode::kImageSize));

  ep = MakeEpisode({});
  ep.steps[0].observation.t = -1;
  EXPECT_TRUE(ValidateEpisode(ep).Has(ViolationCode::kNegativeTime));
}

TEST(EpisodeTest, SuccessFlags) {
  SyntheticSpec spec;
  spec.success = true;
  Episode ep = MakeEpisode(spec);
  EXPECT_TRUE(EpisodeSuccess(ep));
  ep.final_success = 0;
  EXPECT_TRUE(ValidateEpisode(ep).Has(ViolationCode::kFinalSuccess));
  EXPECT_THROW(EpisodeSuccess(ep), Error);

  ep = MakeEpisode(spec);
  ep.steps[0].success = 2;
  EXPECT_TRUE(ValidateEpisode(ep).Has(ViolationCode::kSuccessFlag));

  spec.success = false;
  EXPECT_FALSE(EpisodeSuccess(MakeEpisode(spec)));
}

TEST(EpisodeTest, ViolationsAreSorted) {
  Episode ep = MakeEpisode({});
  ep.final_success = 1;
  ep.steps[2].action.values.push_back(0.0);
  ep.steps[1].observation.q_dot.clear();
  const ValidationReport r = ValidateEpisode(ep);
  ASSERT_EQ(r.violations.size(), 3u);
  for (std::size_t i = 1; i < r.violations.size(); ++i) {
    EXPECT_LT(static_cast<int>(r.violations[i - 1].code), static_cast<int>(r.violations[i].code));
  }
}

TEST(EpisodeTest, ImageAccessors) {
  Image depth{2, 1, Modality::kDepth, std::vector<std::uint8_t>(8, 0)};
  const float v = 1.25f;
  std::memcpy(depth.data.data() + 4, &v, 4);
  EXPECT_FLOAT_EQ(depth.DepthAt(1, 0), 1.25f);
  Image seg{1, 2, Modality::kSegmentation, {0, 0, 0x34, 0x12}};
  EXPECT_EQ(seg.SegmentAt(0, 1), 0x1234);
}

}  // namespace
}  // namespace nebula
