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

#include "nebula/types.h"

#include <gtest/gtest.h>

#include "nebula/error.h"
#include "nebula/rng.h"

namespace nebula {
namespace {

TEST(TypesTest, FamilyNamesRoundTrip) {
  for (Family f : kAllFamilies) {
    const auto parsed = ParseFamily(FamilyName(f));
    ASSERT_TRUE(parsed.has_value());
    EXPECT_EQ(*parsed, f);
  }
  EXPECT_EQ(ParseFamily("control"), Family::kControl);
  EXPECT_EQ(ParseFamily("dynamic"), Family::kDynamicAdaptation);
  EXPECT_EQ(ParseFamily("spatial"), Family::kSpatialReasoning);
  EXPECT_EQ(ParseFamily("robust"), Family::kRobustness);
  EXPECT_FALSE(ParseFamily("Cooking").has_value());
}

TEST(TypesTest, TierCameraModalityRoundTrip) {
  for (Tier t : kAllTiers) EXPECT_EQ(ParseTier(TierName(t)), t);
  for (CameraId c : kAllCameras) EXPECT_EQ(ParseCamera(CameraName(c)), c);
  for (Modality m : kAllModalities) EXPECT_EQ(ParseModality(ModalityName(m)), m);
  for (GripperType g : {GripperType::kParallelJaw, GripperType::kSuction, GripperType::kNone}) {
    EXPECT_EQ(ParseGripperType(GripperTypeName(g)), g);
  }
  EXPECT_EQ(ParseTier("HARD"), Tier::kHard);
  EXPECT_FALSE(ParseCamera("ceiling").has_value());
}

TEST(TypesTest, ModalityStrides) {
  EXPECT_EQ(ModalityStride(Modality::kRgb), 3);
  EXPECT_EQ(ModalityStride(Modality::kDepth), 4);
  EXPECT_EQ(ModalityStride(Modality::kSegmentation), 2);
}

TEST(TypesTest, ErrorCarriesCodeAndMessage) {
  const Error e(ErrorCode::kBadMagic, "not a shard");
  EXPECT_EQ(e.code(), ErrorCode::kBadMagic);
  EXPECT_EQ(e.message(), "not a shard");
  EXPECT_EQ(std::string(e.what()), "BadMagic: not a shard");
}

TEST(RngTest, IndexStaysInRangeAndCoversIt) {
  Rng rng(1);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.Index(7);
    ASSERT_LT(k, 7u);
    ++seen[k];
  }
  for (int c : seen) EXPECT_GT(c, 800);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs = differs || x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, UnitIsHalfOpen) {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.Unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RngTest, Fnv1aKnownVectors) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

}  // namespace
}  // namespace nebula
