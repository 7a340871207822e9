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

#ifndef NEBULA_TYPES_H_
#define NEBULA_TYPES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace nebula {

enum class Family : std::uint8_t {
  kControl,
  kPerception,
  kLanguage,
  kDynamicAdaptation,
  kSpatialReasoning,
  kRobustness,
};

enum class Tier : std::uint8_t { kEasy, kMedium, kHard };

inline constexpr std::array<Family, 6> kAllFamilies = {
    Family::kControl,           Family::kPerception,
    Family::kLanguage,          Family::kDynamicAdaptation,
    Family::kSpatialReasoning,  Family::kRobustness,
};
inline constexpr std::array<Tier, 3> kAllTiers = {Tier::kEasy, Tier::kMedium,
                                                  Tier::kHard};
inline constexpr int kTemplatesPerTier = 3;

enum class CameraId : std::uint8_t { kFront, kBack, kLeft, kRight, kTop, kWrist };
inline constexpr std::array<CameraId, 6> kAllCameras = {
    CameraId::kFront, CameraId::kBack, CameraId::kLeft,
    CameraId::kRight, CameraId::kTop,  CameraId::kWrist,
};

enum class Modality : std::uint8_t { kRgb, kDepth, kSegmentation };
inline constexpr std::array<Modality, 3> kAllModalities = {
    Modality::kRgb, Modality::kDepth, Modality::kSegmentation};

enum class GripperType : std::uint8_t { kParallelJaw, kSuction, kNone };

std::string_view FamilyName(Family f);
std::string_view TierName(Tier t);
std::string_view CameraName(CameraId c);
std::string_view ModalityName(Modality m);
std::string_view GripperTypeName(GripperType g);

// Parsers accept the canonical names above case-insensitively, plus a few
// short aliases ("dynamic", "spatial", "robust").
std::optional<Family> ParseFamily(std::string_view s);
std::optional<Tier> ParseTier(std::string_view s);
std::optional<CameraId> ParseCamera(std::string_view s);
std::optional<Modality> ParseModality(std::string_view s);
std::optional<GripperType> ParseGripperType(std::string_view s);

// Bytes per pixel for an image payload of the given modality.
constexpr int ModalityStride(Modality m) {
  switch (m) {
    case Modality::kRgb:
      return 3;
    case Modality::kDepth:
      return 4;
    case Modality::kSegmentation:
      return 2;
  }
  return 0;
}

}  // namespace nebula

#endif  // NEBULA_TYPES_H_
