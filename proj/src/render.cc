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

#include "nebula/render.h"

#include <cmath>
#include <cstring>
#include <limits>

#include "nebula/error.h"

namespace nebula {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Table slab: the visible work surface, 5 cm thick below z = 0.
constexpr double kTableMinX = 0.0, kTableMaxX = 0.9;
constexpr double kTableMinY = -0.5, kTableMaxY = 0.5;
constexpr double kTableThickness = 0.05;

// Entry distance of a ray into an axis-aligned box centered at the origin,
// or +inf on a miss. Rays starting inside report 0.
double RayBox(const Vec3& o, const Vec3& d, const Vec3& half) {
  double t_near = -kInf, t_far = kInf;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (std::abs(o[i]) > half[i]) return kInf;
      continue;
    }
    double t0 = (-half[i] - o[i]) / d[i];
    double t1 = (half[i] - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return kInf;
  }
  if (t_far < 0.0) return kInf;
  return std::max(t_near, 0.0);
}

double RaySphere(const Vec3& o, const Vec3& d, const Vec3& c, double r) {
  const Vec3 oc = o - c;
  const double b = oc.dot(d);
  const double disc = b * b - (oc.squaredNorm() - r * r);
  if (disc < 0.0) return kInf;
  const double s = std::sqrt(disc);
  const double t_far = -b + s;
  if (t_far < 0.0) return kInf;
  return std::max(-b - s, 0.0);
}

double RayObject(const SceneObject& obj, const Vec3& o, const Vec3& d) {
  if (obj.shape == Shape::kSphere) {
    return RaySphere(o, d, obj.pose.position, obj.size / 2.0);
  }
  const Quat inv = obj.pose.orientation.conjugate();
  return RayBox(inv * (o - obj.pose.position), inv * d, HalfExtents(obj));
}

void PutFloat(std::uint8_t* dst, float v) { std::memcpy(dst, &v, sizeof v); }
void PutU16(std::uint8_t* dst, std::uint16_t v) { std::memcpy(dst, &v, sizeof v); }

Image Blank(int size, Modality m) {
  Image img;
  img.width = size;
  img.height = size;
  img.modality = m;
  img.data.assign(img.ExpectedBytes(), 0);
  return img;
}

}  // namespace

CameraModel CameraFor(const SceneState& scene, CameraId camera) {
  const Vec3 z = Vec3::UnitZ();
  switch (camera) {
    case CameraId::kTop:
      return {{0.45, 0.0, 1.0}, -z, Vec3::UnitX(), 0.8};
    case CameraId::kFront:
      return {{1.2, 0.0, 0.2}, -Vec3::UnitX(), z, 0.8};
    case CameraId::kBack:
      return {{-0.3, 0.0, 0.2}, Vec3::UnitX(), z, 0.8};
    case CameraId::kLeft:
      return {{0.45, 0.8, 0.2}, -Vec3::UnitY(), z, 0.8};
    case CameraId::kRight:
      return {{0.45, -0.8, 0.2}, Vec3::UnitY(), z, 0.8};
    case CameraId::kWrist: {
      const double yaw = Yaw(scene.gripper.pose.orientation);
      return {scene.gripper.pose.position, -z,
              Vec3(std::cos(yaw), std::sin(yaw), 0.0), 0.2};
    }
  }
  throw Error(ErrorCode::kUnknownCamera,
              "camera id " + std::to_string(static_cast<int>(camera)));
}

RenderedView RenderView(const SceneState& scene, CameraId camera, int size) {
  if (size < 1) throw Error(ErrorCode::kInvalidArgument, "image size must be >= 1");
  const CameraModel cam = CameraFor(scene, camera);
  const Vec3 right = cam.forward.cross(cam.up);
  RenderedView view{Blank(size, Modality::kRgb), Blank(size, Modality::kDepth),
                    Blank(size, Modality::kSegmentation)};
  const Vec3 table_center((kTableMinX + kTableMaxX) / 2, (kTableMinY + kTableMaxY) / 2,
                          -kTableThickness / 2);
  const Vec3 table_half((kTableMaxX - kTableMinX) / 2, (kTableMaxY - kTableMinY) / 2,
                        kTableThickness / 2);
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      const double u = ((col + 0.5) / size - 0.5) * cam.extent;
      const double v = (0.5 - (row + 0.5) / size) * cam.extent;
      const Vec3 origin = cam.center + right * u + cam.up * v;
      double best = RayBox(origin - table_center, cam.forward, table_half);
      const SceneObject* hit = nullptr;
      for (const SceneObject& obj : scene.objects) {
        const double t = RayObject(obj, origin, cam.forward);
        if (t < best) {
          best = t;
          hit = &obj;
        }
      }
      if (best == kInf) continue;
      const std::size_t px = static_cast<std::size_t>(row) * size + col;
      const Rgb c = hit ? hit->color : kTableColor;
      view.rgb.data[px * 3 + 0] = c.r;
      view.rgb.data[px * 3 + 1] = c.g;
      view.rgb.data[px * 3 + 2] = c.b;
      PutFloat(&view.depth.data[px * 4], static_cast<float>(best));
      PutU16(&view.segmentation.data[px * 2],
             hit ? static_cast<std::uint16_t>(hit->id) : 0);
    }
  }
  return view;
}

Image Render(const SceneState& scene, CameraId camera, Modality modality, int size) {
  RenderedView v = RenderView(scene, camera, size);
  switch (modality) {
    case Modality::kRgb: return std::move(v.rgb);
    case Modality::kDepth: return std::move(v.depth);
    case Modality::kSegmentation: return std::move(v.segmentation);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown modality");
}

Observation MakeObservation(const SceneState& scene, const ObservationOptions& options) {
  Observation obs;
  obs.q = scene.q;
  obs.q_dot = scene.q_dot;
  obs.t = scene.sim_step;
  obs.wall_time = static_cast<double>(scene.sim_step) * options.dt;
  for (CameraId cam : kAllCameras) {
    if (options.render && !options.camera_mask.contains(cam)) {
      RenderedView v = RenderView(scene, cam, options.image_size);
      obs.views[{cam, Modality::kRgb}] = std::move(v.rgb);
      obs.views[{cam, Modality::kDepth}] = std::move(v.depth);
      obs.views[{cam, Modality::kSegmentation}] = std::move(v.segmentation);
    } else {
      for (Modality m : kAllModalities) {
        obs.views[{cam, m}] = Blank(options.image_size, m);
      }
    }
  }
  return obs;
}

}  // namespace nebula
