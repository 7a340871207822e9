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

#include <algorithm>
#include <cctype>
#include <string>

#include "nebula/error.h"

namespace nebula {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidEpisode: return "InvalidEpisode";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kFormatVersionUnsupported: return "FormatVersionUnsupported";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kMalformedQuery: return "MalformedQuery";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kUnknownTemplate: return "UnknownTemplate";
    case ErrorCode::kSpecMismatch: return "SpecMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnknownCamera: return "UnknownCamera";
    case ErrorCode::kInvalidEvent: return "InvalidEvent";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kEmbodimentMismatch: return "EmbodimentMismatch";
    case ErrorCode::kBridgeDisconnected: return "BridgeDisconnected";
    case ErrorCode::kBridgeTimeout: return "BridgeTimeout";
    case ErrorCode::kMalformedAction: return "MalformedAction";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kCatalogMismatch: return "CatalogMismatch";
    case ErrorCode::kUnknownFormat: return "UnknownFormat";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view FamilyName(Family f) {
  switch (f) {
    case Family::kControl: return "Control";
    case Family::kPerception: return "Perception";
    case Family::kLanguage: return "Language";
    case Family::kDynamicAdaptation: return "DynamicAdaptation";
    case Family::kSpatialReasoning: return "SpatialReasoning";
    case Family::kRobustness: return "Robustness";
  }
  return "?";
}

std::string_view TierName(Tier t) {
  switch (t) {
    case Tier::kEasy: return "Easy";
    case Tier::kMedium: return "Medium";
    case Tier::kHard: return "Hard";
  }
  return "?";
}

std::string_view CameraName(CameraId c) {
  switch (c) {
    case CameraId::kFront: return "front";
    case CameraId::kBack: return "back";
    case CameraId::kLeft: return "left";
    case CameraId::kRight: return "right";
    case CameraId::kTop: return "top";
    case CameraId::kWrist: return "wrist";
  }
  return "?";
}

std::string_view ModalityName(Modality m) {
  switch (m) {
    case Modality::kRgb: return "rgb";
    case Modality::kDepth: return "depth";
    case Modality::kSegmentation: return "segmentation";
  }
  return "?";
}

std::string_view GripperTypeName(GripperType g) {
  switch (g) {
    case GripperType::kParallelJaw: return "parallel_jaw";
    case GripperType::kSuction: return "suction";
    case GripperType::kNone: return "none";
  }
  return "?";
}

std::optional<Family> ParseFamily(std::string_view s) {
  const std::string l = Lower(s);
  for (Family f : kAllFamilies) {
    if (l == Lower(FamilyName(f))) return f;
  }
  if (l == "dynamic") return Family::kDynamicAdaptation;
  if (l == "spatial") return Family::kSpatialReasoning;
  if (l == "robust" || l == "robustness/generalization")
    return Family::kRobustness;
  return std::nullopt;
}

std::optional<Tier> ParseTier(std::string_view s) {
  const std::string l = Lower(s);
  for (Tier t : kAllTiers) {
    if (l == Lower(TierName(t))) return t;
  }
  return std::nullopt;
}

std::optional<CameraId> ParseCamera(std::string_view s) {
  const std::string l = Lower(s);
  for (CameraId c : kAllCameras) {
    if (l == CameraName(c)) return c;
  }
  return std::nullopt;
}

std::optional<Modality> ParseModality(std::string_view s) {
  const std::string l = Lower(s);
  for (Modality m : kAllModalities) {
    if (l == ModalityName(m)) return m;
  }
  return std::nullopt;
}

std::optional<GripperType> ParseGripperType(std::string_view s) {
  const std::string l = Lower(s);
  for (GripperType g : {GripperType::kParallelJaw, GripperType::kSuction,
                        GripperType::kNone}) {
    if (l == GripperTypeName(g)) return g;
  }
  return std::nullopt;
}

}  // namespace nebula
