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

// Orthographic ray-cast renderer for the six fixed cameras. Objects are drawn
// in flat color; depth is the distance along the camera axis from the image
// plane; segmentation holds object ids (0 for table and background). The
// gripper itself is not drawn.

#ifndef NEBULA_RENDER_H_
#define NEBULA_RENDER_H_

#include <array>
#include <set>

#include "nebula/episode.h"
#include "nebula/scene.h"

namespace nebula {

inline constexpr int kDefaultImageSize = 64;
inline constexpr Rgb kTableColor{160, 140, 110};

struct CameraModel {
  Vec3 center;   // middle of the image plane
  Vec3 forward;  // unit viewing direction
  Vec3 up;       // unit, image rows run against it
  double extent = 0.8;  // meters covered by the image width and height
};

// Throws kUnknownCamera for ids outside the fixed six.
CameraModel CameraFor(const SceneState& scene, CameraId camera);

// One ray cast fills all three modalities.
struct RenderedView {
  Image rgb;
  Image depth;
  Image segmentation;
};

RenderedView RenderView(const SceneState& scene, CameraId camera,
                        int size = kDefaultImageSize);

Image Render(const SceneState& scene, CameraId camera, Modality modality,
             int size = kDefaultImageSize);

struct ObservationOptions {
  // False skips rasterization; every view is then a zero-filled image of
  // the right size. Policies that do not look at pixels run this way.
  bool render = true;
  int image_size = kDefaultImageSize;
  // Cameras withheld from the policy; their views are zero-filled.
  std::set<CameraId> camera_mask;
  double dt = kDefaultDt;
};

// Observation at the scene's current step: all 6 x 3 views, joint state,
// t = sim_step and wall_time = t * dt (simulated seconds).
Observation MakeObservation(const SceneState& scene,
                            const ObservationOptions& options = {});

}  // namespace nebula

#endif  // NEBULA_RENDER_H_
