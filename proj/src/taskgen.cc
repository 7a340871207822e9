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

#include "nebula/taskgen.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include "nebula/error.h"
#include "nebula/rng.h"

namespace nebula {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuarterTurn = kPi / 2.0;

// ---------------------------------------------------------------------------
// Vocabulary

struct NamedColor {
  std::string_view name;
  Rgb rgb;
};

constexpr NamedColor kColors[] = {
    {"red", {220, 40, 40}},      {"green", {40, 180, 60}},    {"blue", {40, 80, 220}},
    {"yellow", {230, 210, 40}},  {"purple", {140, 60, 180}},  {"orange", {240, 140, 30}},
    {"white", {235, 235, 235}},  {"gray", {128, 128, 128}},   {"black", {30, 30, 30}},
    {"brown", {120, 80, 40}},    {"teal", {0, 150, 150}},     {"magenta", {220, 0, 200}},
    {"olive", {128, 128, 0}},    {"pink", {250, 150, 190}},
};

}  // namespace

Rgb ColorOf(std::string_view name) {
  for (const auto& c : kColors) {
    if (c.name == name) return c.rgb;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown color " + std::string(name));
}

namespace {

constexpr Rgb kBinColor{80, 80, 80};
constexpr Rgb kSwitchOff{200, 30, 30};
constexpr Rgb kSwitchOn{30, 200, 60};
constexpr Rgb kSocketColor{100, 100, 110};

constexpr double kCubeSize = 0.04;
constexpr double kBinSize = 0.16;
constexpr double kSwitchSize = 0.06;
constexpr double kPegSize = 0.03;
constexpr double kSocketSize = 0.046;
constexpr double kBinSlotOffset = 0.035;  // two items side by side in a bin
constexpr double kRelationOffset = 0.10;

// Footprint radii used for layout clearance.
constexpr double kObjectRadius = 0.05;
constexpr double kBinRadius = 0.11;

struct Region {
  double x0, x1, y0, y1;
};
constexpr Region kWorkRegion{0.25, 0.65, -0.30, 0.30};

std::string Fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v + 0.0);
  return buf;
}

std::string Coord(const Eigen::Vector2d& p) {
  return "(" + Fmt2(p.x()) + ", " + Fmt2(p.y()) + ")";
}

// ---------------------------------------------------------------------------
// Builder state shared by all templates

enum HideMask : unsigned { kShowAll = 0, kHideColor = 1, kHideShape = 2, kHideSize = 4 };

class Ctx {
 public:
  Ctx(std::uint64_t stream_seed, const EmbodimentConfig& embodiment)
      : rng(stream_seed), scene(MakeEmptyScene(embodiment)) {
    fixed = Json::object();
    probe = Json::object();
    fixed["objects"] = Json::array();
  }

  Rng rng;
  Json fixed;
  Json probe;
  SceneState scene;
  Goal goal;
  std::string instruction;
  int atomic = 0;
  Region region = kWorkRegion;
  // Robustness variants re-skin Control scenes through these.
  std::map<std::string, std::string, std::less<>> recolor;
  std::optional<Shape> shape_override;

  Rgb C(std::string_view role) const { return ColorOf(N(role)); }
  std::string N(std::string_view role) const {
    auto it = recolor.find(role);
    return it == recolor.end() ? std::string(role) : it->second;
  }
  Shape ItemShape() const { return shape_override.value_or(Shape::kCube); }
  std::string Noun() const { return std::string(ShapeName(ItemShape())); }

  void Reserve(const Eigen::Vector2d& xy, double radius) { occupied_.push_back({xy, radius}); }

  // Point on a 1 cm grid inside `r`, at least `radius` clear of everything
  // reserved so far; the point is reserved.
  Eigen::Vector2d Sample(double radius, const Region& r) {
    const auto nx = static_cast<std::uint64_t>(std::lround((r.x1 - r.x0) * 100)) + 1;
    const auto ny = static_cast<std::uint64_t>(std::lround((r.y1 - r.y0) * 100)) + 1;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const Eigen::Vector2d p(r.x0 + 0.01 * static_cast<double>(rng.Index(nx)),
                              r.y0 + 0.01 * static_cast<double>(rng.Index(ny)));
      if (Clear(p, radius)) {
        Reserve(p, radius);
        return p;
      }
    }
    throw Error(ErrorCode::kInvalidArgument, "could not lay out the scene");
  }
  Eigen::Vector2d Sample(double radius) { return Sample(radius, region); }

  // Grid point inside the work region; nothing is reserved.
  Eigen::Vector2d Peek() {
    const auto nx = static_cast<std::uint64_t>(std::lround((region.x1 - region.x0) * 100)) + 1;
    const auto ny = static_cast<std::uint64_t>(std::lround((region.y1 - region.y0) * 100)) + 1;
    return {region.x0 + 0.01 * static_cast<double>(rng.Index(nx)),
            region.y0 + 0.01 * static_cast<double>(rng.Index(ny))};
  }

  bool Clear(const Eigen::Vector2d& p, double radius) const {
    for (const auto& s : occupied_) {
      if ((s.xy - p).norm() < s.radius + radius) return false;
    }
    return true;
  }

  int Add(Shape shape, Rgb color, double size, const Eigen::Vector2d& xy, double yaw = 0.0,
          unsigned hide = kShowAll) {
    SceneObject o;
    o.id = next_id_++;
    o.shape = shape;
    o.color = color;
    o.size = size;
    o.pose.position = Vec3(xy.x(), xy.y(), 0.0);
    o.pose.orientation = YawQuat(yaw);
    o.pose.position.z() = WorldHalfHeight(o);
    scene.objects.push_back(o);
    Json rec{{"id", o.id}, {"position", {xy.x(), xy.y()}}, {"yaw", yaw}};
    if (!(hide & kHideShape)) rec["shape"] = ShapeName(shape);
    if (!(hide & kHideColor)) rec["color"] = color;
    if (!(hide & kHideSize)) rec["size"] = size;
    fixed["objects"].push_back(rec);
    return o.id;
  }

  int AddItem(std::string_view role, const Eigen::Vector2d& xy, double size = kCubeSize) {
    return Add(ItemShape(), C(role), size, xy);
  }
  int AddBin(const Eigen::Vector2d& xy) {
    return Add(Shape::kContainer, kBinColor, kBinSize, xy);
  }
  int AddSwitch(const Eigen::Vector2d& xy, Rgb color = kSwitchOff) {
    return Add(Shape::kSwitch, color, kSwitchSize, xy);
  }

  const SceneObject& Obj(int id) const { return *scene.Find(id); }
  // Resting center height of an object on the bare table.
  double RestZ(int id) const { return WorldHalfHeight(Obj(id)); }

  void Push(Subgoal g) {
    goal.subgoals.push_back(std::move(g));
  }

 private:
  struct Spot {
    Eigen::Vector2d xy;
    double radius;
  };
  std::vector<Spot> occupied_;
  int next_id_ = 1;
};

Subgoal Touch(int obj, bool exclusive = false) {
  Subgoal g;
  g.kind = GoalKind::kTouch;
  g.object = obj;
  g.exclusive_contact = exclusive;
  return g;
}

Subgoal Lift(int obj) {
  Subgoal g;
  g.kind = GoalKind::kLift;
  g.object = obj;
  return g;
}

Subgoal PlaceAt(int obj, const Vec3& target) {
  Subgoal g;
  g.kind = GoalKind::kPlaceAt;
  g.object = obj;
  g.target = target;
  return g;
}

// `slot` shifts the drop point sideways so two items fit in one bin.
Subgoal PlaceIn(const Ctx& c, int obj, int container, double slot = 0.0) {
  Subgoal g;
  g.kind = GoalKind::kPlaceIn;
  g.object = obj;
  g.refs = {container};
  const SceneObject& k = c.Obj(container);
  const SceneObject& o = c.Obj(obj);
  g.target = Vec3(k.pose.position.x(), k.pose.position.y() + slot,
                  k.pose.position.z() - WorldHalfHeight(k) + kContainerWall +
                      WorldHalfHeight(o));
  return g;
}

Subgoal StackOn(const Ctx& c, int obj, int base, double base_top) {
  Subgoal g;
  g.kind = GoalKind::kStackOn;
  g.object = obj;
  g.refs = {base};
  const SceneObject& b = c.Obj(base);
  g.target = Vec3(b.pose.position.x(), b.pose.position.y(),
                  base_top + WorldHalfHeight(c.Obj(obj)));
  return g;
}

Subgoal Relate(const Ctx& c, int obj, Relation r, std::vector<int> refs, const Eigen::Vector2d& xy) {
  Subgoal g;
  g.kind = GoalKind::kRelation;
  g.object = obj;
  g.relation = r;
  g.refs = std::move(refs);
  g.target = Vec3(xy.x(), xy.y(), c.RestZ(obj));
  return g;
}

Eigen::Vector2d XY(const SceneObject& o) { return o.pose.position.head<2>(); }

std::size_t VariantIndex(const std::vector<std::string>& variants, const std::string& v) {
  auto it = std::find(variants.begin(), variants.end(), v);
  if (it == variants.end()) throw Error(ErrorCode::kInvalidArgument, "unknown probe variant " + v);
  return static_cast<std::size_t>(it - variants.begin());
}

// ---------------------------------------------------------------------------
// Probe variants per template

const std::vector<std::string> kDefaultOnly = {"default"};
const std::vector<std::string> kGoalSlots = {"goal_a", "goal_b", "goal_c", "goal_d"};
const std::vector<std::string> kProbeColors = {"red", "green", "blue", "yellow"};
const std::vector<std::string> kProbeShapes = {"cube", "sphere", "cylinder"};
const std::vector<std::string> kProbeSizes = {"small", "medium", "large"};
const std::vector<std::string> kCubeColors = {"red", "green", "blue"};

std::vector<std::string> ColorPairs() {
  std::vector<std::string> out;
  for (const auto& a : kCubeColors) {
    for (const auto& b : kCubeColors) {
      if (a != b) out.push_back(a + "_" + b);
    }
  }
  return out;
}

std::vector<std::string> VariantsFor(const TaskKey& k) {
  switch (k.family) {
    case Family::kControl:
    case Family::kRobustness:
      if (k.family == Family::kControl && k.tier == Tier::kEasy && k.template_id == 1) {
        return kGoalSlots;
      }
      if (k.family == Family::kRobustness && k.tier == Tier::kEasy && k.template_id == 1) {
        return kGoalSlots;
      }
      return kDefaultOnly;
    case Family::kPerception:
      if (k.template_id == 1) return kProbeColors;
      if (k.template_id == 2) return kProbeShapes;
      return kProbeSizes;
    case Family::kLanguage:
      if (k.tier == Tier::kEasy) return kCubeColors;
      if (k.tier == Tier::kMedium) {
        if (k.template_id == 1) return {"smallest", "largest"};
        if (k.template_id == 2) return {"put_in_bin", "pick_up"};
        return {"closest", "farthest"};
      }
      if (k.template_id == 1) return ColorPairs();
      return kCubeColors;
    case Family::kDynamicAdaptation:
      if (k.tier == Tier::kMedium) return {"slow", "fast"};
      return kDefaultOnly;
    case Family::kSpatialReasoning:
      if (k.tier == Tier::kEasy && k.template_id == 1) return {"left", "right"};
      if (k.tier == Tier::kEasy && k.template_id == 2) return {"in_front", "behind"};
      if (k.tier == Tier::kHard && k.template_id == 1) return {"30", "45", "60"};
      return kDefaultOnly;
  }
  return kDefaultOnly;
}

// ---------------------------------------------------------------------------
// Control (also the base of Robustness)

void BuildControl(Ctx& c, Tier tier, int t, const std::string& v) {
  const std::string noun = c.Noun();
  auto goal_spot = [&](int id) {
    const Eigen::Vector2d p = c.Sample(kObjectRadius);
    return std::pair{p, Vec3(p.x(), p.y(), c.RestZ(id))};
  };
  if (tier == Tier::kEasy) {
    if (t == 1) {
      const int red = c.AddItem("red", c.Sample(kObjectRadius));
      std::array<Vec3, 4> goals;
      std::array<Eigen::Vector2d, 4> spots;
      for (int i = 0; i < 4; ++i) std::tie(spots[i], goals[i]) = goal_spot(red);
      c.fixed["goal_candidates"] = Json::array();
      for (const auto& s : spots) c.fixed["goal_candidates"].push_back({s.x(), s.y()});
      const std::size_t slot = VariantIndex(kGoalSlots, v);
      c.probe["goal"] = {spots[slot].x(), spots[slot].y()};
      c.Push(PlaceAt(red, goals[slot]));
      c.instruction = "Move the " + c.N("red") + " " + noun + " to " + Coord(spots[slot]) + ".";
      c.atomic = 2;
    } else if (t == 2) {
      const int red = c.AddItem("red", c.Sample(kObjectRadius));
      c.Push(Lift(red));
      c.instruction = "Pick up the " + c.N("red") + " " + noun + ".";
      c.atomic = 1;
    } else {
      const int bin = c.AddBin(c.Sample(kBinRadius));
      const int red = c.AddItem("red", c.Sample(kObjectRadius));
      c.Push(PlaceIn(c, red, bin));
      c.instruction = "Put the " + c.N("red") + " " + noun + " in the bin.";
      c.atomic = 2;
    }
    return;
  }
  if (tier == Tier::kMedium) {
    if (t == 1) {
      const int red = c.AddItem("red", c.Sample(kObjectRadius));
      const int blue = c.AddItem("blue", c.Sample(kObjectRadius));
      auto [p1, g1] = goal_spot(red);
      auto [p2, g2] = goal_spot(blue);
      c.Push(PlaceAt(red, g1));
      c.Push(PlaceAt(blue, g2));
      c.instruction = "Move the " + c.N("red") + " " + noun + " to " + Coord(p1) +
                      ", then the " + c.N("blue") + " " + noun + " to " + Coord(p2) + ".";
      c.atomic = 4;
    } else if (t == 2) {
      const int bin = c.AddBin(c.Sample(kBinRadius));
      const int sw = c.AddSwitch(c.Sample(kObjectRadius));
      const int red = c.AddItem("red", c.Sample(kObjectRadius));
      c.Push(PlaceIn(c, red, bin));
      c.Push(Touch(sw));
      c.instruction =
          "Put the " + c.N("red") + " " + noun + " in the bin, then press the switch.";
      c.atomic = 3;
    } else {
      const int bin = c.AddBin(c.Sample(kBinRadius));
      const int red = c.AddItem("red", c.Sample(kObjectRadius));
      const int blue = c.AddItem("blue", c.Sample(kObjectRadius));
      c.Push(PlaceIn(c, red, bin, kBinSlotOffset));
      c.Push(PlaceIn(c, blue, bin, -kBinSlotOffset));
      c.instruction = "Put the " + c.N("red") + " and " + c.N("blue") + " " + noun +
                      "s in the bin.";
      c.atomic = 4;
    }
    return;
  }
  // Hard
  if (t == 1) {
    const int base = c.Add(Shape::kCube, c.C("blue"), 0.05, c.Sample(kObjectRadius));
    const int r = c.AddItem("red", c.Sample(kObjectRadius));
    const int g = c.AddItem("green", c.Sample(kObjectRadius));
    const int y = c.AddItem("yellow", c.Sample(kObjectRadius));
    double top = 0.05;
    int below = base;
    for (int id : {r, g, y}) {
      c.Push(StackOn(c, id, below, top));
      top += 2.0 * c.RestZ(id);
      below = id;
    }
    c.instruction = "Build a tower on the " + c.N("blue") + " cube: the " + c.N("red") +
                    " " + noun + " first, then the " + c.N("green") + " " + noun +
                    ", then the " + c.N("yellow") + " " + noun + ".";
    c.atomic = 6;
  } else if (t == 2) {
    const int s1 = c.Add(Shape::kContainer, kSocketColor, kSocketSize, c.Sample(kObjectRadius));
    const int s2 = c.Add(Shape::kContainer, kSocketColor, kSocketSize, c.Sample(kObjectRadius));
    const int sw = c.AddSwitch(c.Sample(kObjectRadius));
    const int p1 = c.Add(Shape::kPeg, c.C("red"), kPegSize, c.Sample(kObjectRadius));
    const int p2 = c.Add(Shape::kPeg, c.C("blue"), kPegSize, c.Sample(kObjectRadius));
    for (auto [peg, socket] : {std::pair{p1, s1}, std::pair{p2, s2}}) {
      const SceneObject& k = c.Obj(socket);
      c.Push(PlaceAt(peg, Vec3(k.pose.position.x(), k.pose.position.y(),
                               kContainerWall + c.RestZ(peg))));
    }
    c.Push(Touch(sw));
    c.instruction = "Insert the " + c.N("red") + " peg into the socket at " +
                    Coord(XY(c.Obj(s1))) + " and the " + c.N("blue") +
                    " peg into the socket at " + Coord(XY(c.Obj(s2))) +
                    ", then press the switch.";
    c.atomic = 5;
  } else {
    std::vector<int> ids;
    for (const char* role : {"red", "green", "blue"}) {
      ids.push_back(c.AddItem(role, c.Sample(kObjectRadius)));
    }
    std::string text = "Move";
    const char* roles[] = {"red", "green", "blue"};
    for (int i = 0; i < 3; ++i) {
      auto [p, g] = goal_spot(ids[i]);
      c.Push(PlaceAt(ids[i], g));
      text += std::string(i == 0 ? " the " : i == 1 ? ", the " : " and the ") + c.N(roles[i]) +
              " " + noun + " to " + Coord(p);
    }
    c.instruction = text + ".";
    c.atomic = 6;
  }
}

// ---------------------------------------------------------------------------
// Perception

void BuildPerception(Ctx& c, Tier tier, int t, const std::string& v, bool entangled) {
  const int distractors = tier == Tier::kEasy ? 2 : 3;
  const int slots = distractors + 1;
  const int bin = c.AddBin(c.Sample(kBinRadius));
  std::vector<Eigen::Vector2d> spots;
  for (int i = 0; i < slots; ++i) spots.push_back(c.Sample(0.055));
  const int target_slot = static_cast<int>(c.rng.Index(slots));
  c.fixed["target_slot"] = target_slot;

  // Frozen per-distractor draws, taken before the probe value is consulted.
  std::vector<int> offsets;
  for (int i = 0; i < distractors; ++i) {
    offsets.push_back(tier == Tier::kEasy ? i + 1 : 1 + static_cast<int>(c.rng.Index(2)));
  }
  const std::size_t pv = VariantIndex(VariantsFor({Family::kPerception, tier, t}), v);
  std::string noun;
  int target = 0;
  if (t == 1) {
    // Color probe.
    std::vector<Rgb> distractor_colors;
    if (tier == Tier::kEasy) {
      std::vector<std::string> pool = {"white", "gray", "black", "brown", "purple", "orange"};
      c.rng.Shuffle(pool);
      for (int i = 0; i < distractors; ++i) distractor_colors.push_back(ColorOf(pool[i]));
      c.fixed["distractor_colors"] = std::vector<std::string>(pool.begin(), pool.begin() + distractors);
    } else {
      const int lo = tier == Tier::kMedium ? 40 : 20;
      const int span = tier == Tier::kMedium ? 31 : 16;
      Json shades = Json::array();
      std::vector<std::array<int, 3>> deltas;
      for (int i = 0; i < distractors; ++i) {
        std::array<int, 3> d{};
        for (int ch = 0; ch < 3; ++ch) {
          const int mag = lo + static_cast<int>(c.rng.Index(span));
          d[ch] = c.rng.Index(2) ? mag : -mag;
        }
        deltas.push_back(d);
        shades.push_back(d);
      }
      c.fixed["distractor_shade_offsets"] = shades;
      const Rgb base = ColorOf(kProbeColors[pv]);
      for (const auto& d : deltas) {
        auto ch = [](int x, int dx) {
          return static_cast<std::uint8_t>(std::clamp(x + dx, 0, 255));
        };
        distractor_colors.push_back({ch(base.r, d[0]), ch(base.g, d[1]), ch(base.b, d[2])});
      }
    }
    c.probe["color"] = kProbeColors[pv];
    int d = 0;
    for (int i = 0; i < slots; ++i) {
      if (i == target_slot) {
        target = c.Add(Shape::kCube, ColorOf(kProbeColors[pv]), kCubeSize, spots[i], 0.0, kHideColor);
      } else {
        c.Add(Shape::kCube, distractor_colors[d++], kCubeSize, spots[i], 0.0,
              tier == Tier::kEasy ? kShowAll : kHideColor);
      }
    }
    noun = kProbeColors[pv] + " cube";
  } else if (t == 2) {
    // Shape probe.
    const Rgb color = ColorOf(kCubeColors[c.rng.Index(kCubeColors.size())]);
    c.fixed["color"] = color;
    c.fixed["distractor_shape_offsets"] = offsets;
    constexpr Shape kShapes[] = {Shape::kCube, Shape::kSphere, Shape::kCylinder};
    c.probe["shape"] = kProbeShapes[pv];
    int d = 0;
    for (int i = 0; i < slots; ++i) {
      const std::size_t si = i == target_slot ? pv : (pv + offsets[d++]) % 3;
      const int id = c.Add(kShapes[si], color, kCubeSize, spots[i], 0.0, kHideShape);
      if (i == target_slot) target = id;
    }
    noun = kProbeShapes[pv];
  } else {
    // Size probe; sizes draw closer together with tier.
    const double step = tier == Tier::kEasy ? 0.01 : tier == Tier::kMedium ? 0.006 : 0.004;
    const double sizes[] = {0.04 - step, 0.04, 0.04 + step};
    const Rgb color = ColorOf(kCubeColors[c.rng.Index(kCubeColors.size())]);
    c.fixed["color"] = color;
    c.fixed["size_step"] = step;
    c.fixed["distractor_size_offsets"] = offsets;
    c.probe["size"] = kProbeSizes[pv];
    int d = 0;
    for (int i = 0; i < slots; ++i) {
      const std::size_t si = i == target_slot ? pv : (pv + offsets[d++]) % 3;
      const int id = c.Add(Shape::kCube, color, sizes[si], spots[i], 0.0, kHideSize);
      if (i == target_slot) target = id;
    }
    noun = (pv == 0 ? "smallest" : pv == 1 ? "medium-sized" : "largest") + std::string(" cube");
  }
  if (tier == Tier::kHard) {
    // A tall block in front of the target hides it from the front camera.
    const Eigen::Vector2d tp = XY(c.Obj(target));
    Eigen::Vector2d occ(tp.x() + 0.09, tp.y());
    if (!c.Clear(occ, 0.035)) occ = c.Sample(kObjectRadius);
    c.Add(Shape::kCube, ColorOf("gray"), 0.07, occ);
  }
  c.Push(Touch(target, /*exclusive=*/true));
  if (entangled) {
    c.Push(PlaceIn(c, target, bin));
    c.instruction = "Put the " + noun + " in the bin.";
    c.atomic = 3;
  } else {
    c.instruction = "Touch the " + noun + ".";
    c.atomic = 1;
  }
}

// ---------------------------------------------------------------------------
// Language: one frozen scene per seed, shared by all nine templates.

void BuildLanguage(Ctx& c, Tier tier, int t, const std::string& v) {
  std::vector<double> sizes = {0.03, 0.04, 0.05};
  c.rng.Shuffle(sizes);
  const int bin = c.AddBin(c.Sample(kBinRadius));
  std::map<std::string, int> cube;
  for (std::size_t i = 0; i < kCubeColors.size(); ++i) {
    cube[kCubeColors[i]] = c.Add(Shape::kCube, ColorOf(kCubeColors[i]), sizes[i], c.Sample(kObjectRadius));
  }
  const int sphere = c.Add(Shape::kSphere, ColorOf("yellow"), kCubeSize, c.Sample(kObjectRadius));

  auto by_size = [&](bool largest) {
    int best = 0;
    for (const auto& [name, id] : cube) {
      if (!best || (largest ? c.Obj(id).size > c.Obj(best).size : c.Obj(id).size < c.Obj(best).size)) {
        best = id;
      }
    }
    return best;
  };

  if (tier == Tier::kEasy) {
    c.probe["color"] = v;
    const int id = cube.at(v);
    if (t == 1) {
      c.Push(Lift(id));
      c.instruction = "Pick up the " + v + " cube.";
      c.atomic = 1;
    } else if (t == 2) {
      c.Push(Touch(id));
      c.instruction = "Touch the " + v + " cube.";
      c.atomic = 1;
    } else {
      c.Push(PlaceIn(c, id, bin));
      c.instruction = "Put the " + v + " cube in the bin.";
      c.atomic = 2;
    }
    return;
  }
  if (tier == Tier::kMedium) {
    c.probe["phrase"] = v;
    if (t == 1) {
      c.Push(Lift(by_size(v == "largest")));
      c.instruction = "Pick up the " + v + " cube.";
      c.atomic = 1;
    } else if (t == 2) {
      if (v == "put_in_bin") {
        c.Push(PlaceIn(c, sphere, bin));
        c.instruction = "Put the object that is not a cube in the bin.";
        c.atomic = 2;
      } else {
        c.Push(Lift(sphere));
        c.instruction = "Pick up the object that is not a cube.";
        c.atomic = 1;
      }
    } else {
      const Eigen::Vector2d b = XY(c.Obj(bin));
      int best = 0;
      for (const auto& [name, id] : cube) {
        const double d = (XY(c.Obj(id)) - b).norm();
        if (!best) {
          best = id;
          continue;
        }
        const double bd = (XY(c.Obj(best)) - b).norm();
        if (v == "closest" ? d < bd : d > bd) best = id;
      }
      c.Push(Touch(best));
      c.instruction = std::string("Touch the cube ") +
                      (v == "closest" ? "closest to" : "farthest from") + " the bin.";
      c.atomic = 1;
    }
    return;
  }
  c.probe["phrase"] = v;
  if (t == 1) {
    const auto sep = v.find('_');
    const std::string a = v.substr(0, sep), b = v.substr(sep + 1);
    Condition cond;
    cond.kind = ConditionKind::kSmallerThan;
    cond.a = cube.at(a);
    cond.b = cube.at(b);
    c.goal.condition = cond;
    c.goal.subgoals = {PlaceIn(c, cube.at(a), bin)};
    c.goal.otherwise = {Lift(cube.at(b))};
    c.instruction = "If the " + a + " cube is smaller than the " + b + " cube, put the " + a +
                    " cube in the bin; otherwise, pick up the " + b + " cube.";
    c.atomic = 2;
  } else if (t == 2) {
    Condition cond;
    cond.kind = ConditionKind::kLeftmostCubeIs;
    cond.color = ColorOf(v);
    c.goal.condition = cond;
    c.goal.subgoals = {PlaceIn(c, sphere, bin)};
    c.goal.otherwise = {Lift(sphere)};
    c.instruction = "If the leftmost cube is " + v +
                    ", put the sphere in the bin; otherwise, pick up the sphere.";
    c.atomic = 2;
  } else {
    double slot = kBinSlotOffset;
    for (const auto& name : kCubeColors) {
      if (name == v) continue;
      c.Push(PlaceIn(c, cube.at(name), bin, slot));
      slot = -slot;
    }
    c.instruction = "Ignore the " + v + " cube and put the other two in the bin.";
    c.atomic = 4;
  }
}

// ---------------------------------------------------------------------------
// Dynamic adaptation

// Distance from p to the segment ab in the plane.
double SegmentDistance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

bool Inside(const Eigen::Vector2d& p, const Region& r) {
  return p.x() >= r.x0 && p.x() <= r.x1 && p.y() >= r.y0 && p.y() <= r.y1;
}

void BuildDynamic(Ctx& c, Tier tier, int t, const std::string& v, int trigger_window) {
  if (tier == Tier::kEasy) {
    const std::int64_t trigger = 20 + static_cast<std::int64_t>(c.rng.Index(21));
    c.fixed["trigger_step"] = trigger;
    c.probe["trigger_window"] = trigger_window;
    const StepWindow window{trigger, trigger + trigger_window};
    Event e;
    e.fire_step = trigger;
    e.kind = EventKind::kAttributeSwitch;
    if (t == 1) {
      const int sw = c.AddSwitch(c.Sample(kObjectRadius));
      c.AddItem("red", c.Sample(kObjectRadius));
      Subgoal g = Touch(sw);
      g.window = window;
      c.Push(g);
      e.colors = {{sw, kSwitchOn}};
      c.instruction = "Press the switch after it turns green, within " +
                      std::to_string(trigger_window) + " steps.";
      c.atomic = 1;
    } else if (t == 2) {
      const int a = c.AddItem("red", c.Sample(kObjectRadius));
      const int b = c.AddItem("blue", c.Sample(kObjectRadius));
      c.Push(Touch(a));
      e.colors = {{a, ColorOf("blue")}, {b, ColorOf("red")}};
      e.goal.subgoals = {Touch(b)};
      c.instruction = "Touch the red cube.";
      c.atomic = 1;
    } else {
      const int lamp = c.AddSwitch(c.Sample(kObjectRadius));
      const int bin = c.AddBin(c.Sample(kBinRadius));
      const int cube = c.AddItem("red", c.Sample(kObjectRadius));
      Subgoal g = PlaceIn(c, cube, bin);
      g.window = window;
      c.Push(g);
      e.colors = {{lamp, kSwitchOn}};
      c.instruction = "When the lamp turns green, put the red cube in the bin within " +
                      std::to_string(trigger_window) + " steps.";
      c.atomic = 2;
    }
    c.scene.event_queue.push_back(e);
    return;
  }

  // Moving target: one straight leg (Medium) or two legs with a seeded
  // redirection (Hard). The whole path stays inside the work region.
  const Region inner{0.30, 0.60, -0.25, 0.25};
  const double dt = kDefaultDt;
  std::vector<MotionSegment> legs;
  Eigen::Vector2d start;
  std::vector<Eigen::Vector2d> path;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 10000) throw Error(ErrorCode::kInvalidArgument, "could not lay out motion");
    legs.clear();
    start = Eigen::Vector2d(c.rng.Uniform(inner.x0, inner.x1), c.rng.Uniform(inner.y0, inner.y1));
    path = {start};
    if (tier == Tier::kMedium) {
      const double heading = c.rng.Uniform(0, 2 * kPi);
      const double speed = v == "fast" ? 0.04 : 0.02;
      const Vec3 vel(speed * std::cos(heading), speed * std::sin(heading), 0.0);
      legs.push_back({0, 150, vel});
      c.fixed["heading"] = heading;
      c.probe["speed"] = speed;
      // Check the path for the fastest variant so every variant fits.
      path.push_back(start + Eigen::Vector2d(std::cos(heading), std::sin(heading)) * 0.04 * 150 * dt);
    } else {
      const std::int64_t turn = 20 + static_cast<std::int64_t>(c.rng.Index(40));
      Eigen::Vector2d p = start;
      std::int64_t begin = 0;
      for (int leg = 0; leg < 2; ++leg) {
        const double heading = c.rng.Uniform(0, 2 * kPi);
        const double speed = c.rng.Uniform(0.03, 0.05);
        const std::int64_t end = leg == 0 ? turn : turn + 120;
        const Vec3 vel(speed * std::cos(heading), speed * std::sin(heading), 0.0);
        legs.push_back({begin, end, vel});
        p += vel.head<2>() * static_cast<double>(end - begin) * dt;
        path.push_back(p);
        begin = end;
      }
      c.fixed["turn_step"] = turn;
    }
    if (std::all_of(path.begin(), path.end(), [&](const auto& p) { return Inside(p, kWorkRegion); })) {
      break;
    }
  }
  c.fixed["start"] = {start.x(), start.y()};
  Json legs_json = Json::array();
  for (const auto& l : legs) {
    legs_json.push_back({{"start_step", l.start_step}, {"end_step", l.end_step},
                         {"velocity", {l.velocity.x(), l.velocity.y()}}});
  }
  if (tier == Tier::kHard) c.fixed["legs"] = legs_json;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    // Keep other objects away from the moving object's track.
    const Eigen::Vector2d mid = (path[i] + path[i + 1]) / 2.0;
    c.Reserve(mid, (path[i + 1] - path[i]).norm() / 2.0 + 0.03);
  }
  c.Reserve(start, 0.03);

  const int cube = c.Add(Shape::kCube, ColorOf("red"), kCubeSize, start);
  // Static distractor and, when needed, the bin, kept clear of the track.
  auto clear_of_track = [&](double radius) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const Eigen::Vector2d p = c.Sample(radius);
      bool ok = true;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (SegmentDistance(p, path[i], path[i + 1]) < radius + 0.04) ok = false;
      }
      if (ok) return p;
    }
    throw Error(ErrorCode::kInvalidArgument, "could not lay out the scene");
  };
  c.Add(Shape::kCube, ColorOf("blue"), kCubeSize, clear_of_track(kObjectRadius));
  MotionScript script;
  script.object = cube;
  script.segments = legs;
  c.scene.motion_scripts.push_back(script);

  if (t == 1) {
    c.Push(Touch(cube));
    c.instruction = "Touch the moving red cube.";
    c.atomic = 1;
  } else if (t == 2) {
    c.Push(Lift(cube));
    c.instruction = "Pick up the moving red cube.";
    c.atomic = 1;
  } else {
    const int bin = c.AddBin(clear_of_track(kBinRadius));
    c.Push(PlaceIn(c, cube, bin));
    c.instruction = "Put the moving red cube in the bin.";
    c.atomic = 2;
    if (tier == Tier::kHard) {
      Event e;
      e.kind = EventKind::kDisplaceObject;
      e.object = cube;
      e.fire_step = legs.front().end_step + 10;
      const Eigen::Vector2d to = c.Sample(kObjectRadius);
      e.position = Vec3(to.x(), to.y(), 0.0);
      c.fixed["displace"] = {{"step", e.fire_step}, {"to", {to.x(), to.y()}}};
      c.scene.event_queue.push_back(e);
    }
  }
}

// ---------------------------------------------------------------------------
// Spatial reasoning

void BuildSpatial(Ctx& c, Tier tier, int t, const std::string& v) {
  if (tier == Tier::kEasy) {
    if (t == 1 || t == 2) {
      const Region ref_region = t == 1 ? Region{0.30, 0.60, -0.15, 0.15}
                                       : Region{0.37, 0.53, -0.25, 0.25};
      const int blue = c.Add(Shape::kCube, ColorOf("blue"), kCubeSize, c.Sample(kObjectRadius, ref_region));
      const Eigen::Vector2d b = XY(c.Obj(blue));
      const Eigen::Vector2d axis = t == 1 ? Eigen::Vector2d(0, kRelationOffset)
                                          : Eigen::Vector2d(kRelationOffset, 0);
      // Both candidate drop points stay free whatever the probe says.
      c.Reserve(b + axis, kObjectRadius);
      c.Reserve(b - axis, kObjectRadius);
      const int red = c.Add(Shape::kCube, ColorOf("red"), kCubeSize, c.Sample(kObjectRadius));
      c.probe["relation"] = v;
      Relation rel;
      Eigen::Vector2d target;
      std::string phrase;
      if (v == "left") {
        rel = Relation::kLeftOf, target = b + axis, phrase = "to the left of";
      } else if (v == "right") {
        rel = Relation::kRightOf, target = b - axis, phrase = "to the right of";
      } else if (v == "in_front") {
        rel = Relation::kInFrontOf, target = b - axis, phrase = "in front of";
      } else {
        rel = Relation::kBehind, target = b + axis, phrase = "behind";
      }
      c.Push(Relate(c, red, rel, {blue}, target));
      c.instruction = "Put the red cube " + phrase + " the blue cube.";
      c.atomic = 2;
    } else {
      const int green = c.Add(Shape::kCube, ColorOf("green"), kCubeSize, c.Sample(kObjectRadius));
      Eigen::Vector2d gb;
      for (int attempt = 0;; ++attempt) {
        if (attempt > 10000) throw Error(ErrorCode::kInvalidArgument, "layout");
        const Eigen::Vector2d cand = c.Peek();
        const double d = (cand - XY(c.Obj(green))).norm();
        const Eigen::Vector2d mid = (cand + XY(c.Obj(green))) / 2.0;
        if (d >= 0.2 && d <= 0.3 && c.Clear(cand, kObjectRadius) && c.Clear(mid, kObjectRadius)) {
          gb = cand;
          break;
        }
      }
      const int blue = c.Add(Shape::kCube, ColorOf("blue"), kCubeSize, gb);
      c.Reserve(gb, kObjectRadius);
      const Eigen::Vector2d mid = (XY(c.Obj(green)) + gb) / 2.0;
      c.Reserve(mid, kObjectRadius);
      const int red = c.Add(Shape::kCube, ColorOf("red"), kCubeSize, c.Sample(kObjectRadius));
      c.Push(Relate(c, red, Relation::kBetween, {green, blue}, mid));
      c.instruction = "Put the red cube between the green cube and the blue cube.";
      c.atomic = 2;
    }
    return;
  }
  if (tier == Tier::kMedium) {
    const Region ref_region{0.30, 0.60, -0.15, 0.15};
    const int blue = c.Add(Shape::kCube, ColorOf("blue"), kCubeSize, c.Sample(kObjectRadius, ref_region));
    const Eigen::Vector2d b = XY(c.Obj(blue));
    const Eigen::Vector2d side(0, kRelationOffset);
    c.Reserve(b + side, kObjectRadius);
    c.Reserve(b - side, kObjectRadius);
    const int red = c.Add(Shape::kCube, ColorOf("red"), kCubeSize, c.Sample(kObjectRadius));
    if (t == 1) {
      c.Push(StackOn(c, red, blue, kCubeSize));
      c.instruction = "Stack the red cube on the blue cube.";
      c.atomic = 2;
      return;
    }
    const int green = c.Add(Shape::kCube, ColorOf("green"), kCubeSize, c.Sample(kObjectRadius));
    if (t == 2) {
      c.Push(StackOn(c, red, blue, kCubeSize));
      c.Push(Relate(c, green, Relation::kLeftOf, {blue}, b + side));
      c.instruction =
          "Stack the red cube on the blue cube, then put the green cube to the left of the "
          "blue cube.";
    } else {
      c.Push(Relate(c, green, Relation::kRightOf, {blue}, b - side));
      Subgoal s = StackOn(c, red, green, kCubeSize);
      s.target.head<2>() = b - side;  // where green will be
      c.Push(s);
      c.instruction =
          "Put the green cube to the right of the blue cube, then stack the red cube on the "
          "green cube.";
    }
    c.atomic = 4;
    return;
  }
  // Hard: orientation matters.
  if (t == 1) {
    const int red = c.Add(Shape::kCube, ColorOf("red"), kCubeSize, c.Sample(kObjectRadius));
    const Eigen::Vector2d p = c.Sample(kObjectRadius);
    c.fixed["goal"] = {p.x(), p.y()};
    const double deg = std::stod(v);
    c.probe["yaw_degrees"] = deg;
    Subgoal g = PlaceAt(red, Vec3(p.x(), p.y(), c.RestZ(red)));
    g.target_yaw = deg * kPi / 180.0;
    g.yaw_period = kQuarterTurn;
    c.Push(g);
    c.instruction = "Place the red cube at " + Coord(p) + ", turned " + v + " degrees.";
    c.atomic = 2;
  } else if (t == 2) {
    const double yaw = c.rng.Uniform(0.2, 1.3);
    const int socket = c.Add(Shape::kContainer, kSocketColor, kSocketSize, c.Sample(kObjectRadius), yaw);
    const int peg = c.Add(Shape::kPeg, ColorOf("red"), kPegSize, c.Sample(kObjectRadius));
    const SceneObject& k = c.Obj(socket);
    Subgoal g = PlaceAt(peg, Vec3(k.pose.position.x(), k.pose.position.y(),
                                  kContainerWall + c.RestZ(peg)));
    g.target_yaw = yaw;
    g.yaw_period = kQuarterTurn;
    c.Push(g);
    c.instruction = "Insert the red peg into the rotated socket.";
    c.atomic = 2;
  } else {
    const double yaw = c.rng.Uniform(0.2, 1.3);
    const int blue = c.Add(Shape::kCube, ColorOf("blue"), 0.05, c.Sample(kObjectRadius), yaw);
    const int red = c.Add(Shape::kCube, ColorOf("red"), kCubeSize, c.Sample(kObjectRadius));
    Subgoal g = StackOn(c, red, blue, 0.05);
    g.target_yaw = yaw;
    g.yaw_period = kQuarterTurn;
    c.Push(g);
    c.instruction = "Stack the red cube on the blue cube with their edges aligned.";
    c.atomic = 2;
  }
}

// ---------------------------------------------------------------------------
// Robustness: Control scenes under distribution shift.

void BuildRobustness(Ctx& c, Tier tier, int t, const std::string& v, std::uint64_t seed) {
  if (tier == Tier::kEasy) {
    BuildControl(c, Tier::kEasy, t, v);
    Rng extra(Mix64(seed ^ Fnv1a64("Robustness/distractors")));
    const int count = 1 + static_cast<int>(extra.Index(2));
    c.probe["distractors"] = count;
    // Distractors come from their own stream so the base scene is untouched.
    Rng saved = c.rng;
    c.rng = extra;
    const char* colors[] = {"purple", "orange"};
    const Shape shapes[] = {Shape::kSphere, Shape::kCylinder};
    for (int i = 0; i < count; ++i) {
      c.Add(shapes[i], ColorOf(colors[i]), kCubeSize, c.Sample(kObjectRadius));
    }
    c.rng = saved;
    return;
  }
  if (tier == Tier::kMedium) {
    c.recolor = {{"red", "teal"}, {"blue", "magenta"}, {"green", "olive"}, {"yellow", "pink"}};
    c.probe["palette"] = "unseen";
    BuildControl(c, Tier::kMedium, t, v);
    return;
  }
  c.shape_override = t == 2 ? Shape::kSphere : Shape::kCylinder;
  c.region = Region{0.20, 0.70, -0.35, 0.35};
  c.probe["layout"] = "novel";
  BuildControl(c, Tier::kMedium, t, v);
}

CriterionKind KindFor(const Goal& g) {
  if (g.condition || g.subgoals.size() != 1) return CriterionKind::kSequenceCompleted;
  switch (g.subgoals[0].kind) {
    case GoalKind::kPlaceIn: return CriterionKind::kInsideContainer;
    case GoalKind::kStackOn: return CriterionKind::kStackedOn;
    case GoalKind::kRelation: return CriterionKind::kRelationSatisfied;
    case GoalKind::kTouch: return CriterionKind::kContactedTarget;
    default: return CriterionKind::kAtGoalPose;
  }
}

std::string PredicateId(const TaskKey& k, const Goal& g, bool entangled) {
  std::string id = TaskKeyName(k) + ":";
  for (std::size_t i = 0; i < g.subgoals.size(); ++i) {
    if (i) id += "+";
    id += GoalKindName(g.subgoals[i].kind);
  }
  if (g.condition) {
    id += "|else:";
    for (std::size_t i = 0; i < g.otherwise.size(); ++i) {
      if (i) id += "+";
      id += GoalKindName(g.otherwise[i].kind);
    }
  }
  if (entangled) id += ":entangled";
  return id;
}

void CheckKey(const TaskKey& k) {
  if (static_cast<int>(k.family) > static_cast<int>(Family::kRobustness) ||
      static_cast<int>(k.tier) > static_cast<int>(Tier::kHard) || k.template_id < 1 ||
      k.template_id > kTemplatesPerTier) {
    throw Error(ErrorCode::kUnknownTemplate, "no template " + std::to_string(k.template_id) +
                                                 " for " + std::string(FamilyName(k.family)) +
                                                 "/" + std::string(TierName(k.tier)));
  }
}

}  // namespace

std::string TaskKeyName(const TaskKey& key) {
  return std::string(FamilyName(key.family)) + "/" + std::string(TierName(key.tier)) + "/" +
         std::to_string(key.template_id);
}

std::string_view CriterionKindName(CriterionKind k) {
  switch (k) {
    case CriterionKind::kAtGoalPose: return "at_goal_pose";
    case CriterionKind::kStackedOn: return "stacked_on";
    case CriterionKind::kInsideContainer: return "inside_container";
    case CriterionKind::kContactedTarget: return "contacted_target";
    case CriterionKind::kSequenceCompleted: return "sequence_completed";
    case CriterionKind::kRelationSatisfied: return "relation_satisfied";
  }
  return "?";
}

double TierTolerance(Tier tier) {
  switch (tier) {
    case Tier::kEasy: return 0.03;
    case Tier::kMedium: return 0.015;
    case Tier::kHard: return 0.008;
  }
  return 0.03;
}

int MaxSteps(Tier tier) { return tier == Tier::kHard ? 800 : 400; }

TaskMeta TaskSpec::meta() const {
  TaskMeta m;
  m.family = family;
  m.tier = tier;
  m.template_id = template_id;
  m.seed = seed;
  m.variant_tag = probe_variant + (entangled ? "+entangled" : "");
  return m;
}

std::vector<TaskKey> ListTasks(const std::optional<std::set<Family>>& families,
                               const std::optional<std::set<Tier>>& tiers) {
  std::vector<TaskKey> out;
  for (Family f : kAllFamilies) {
    if (families && !families->contains(f)) continue;
    for (Tier t : kAllTiers) {
      if (tiers && !tiers->contains(t)) continue;
      for (int id = 1; id <= kTemplatesPerTier; ++id) out.push_back({f, t, id});
    }
  }
  return out;
}

std::vector<std::string> ProbeVariants(const TaskKey& key) {
  CheckKey(key);
  return VariantsFor(key);
}

std::uint64_t HashJson(const Json& j) { return Fnv1a64(j.dump()); }

GeneratedTask GenerateTask(const TaskKey& key, std::uint64_t seed, const TaskOptions& options) {
  CheckKey(key);
  if (options.trigger_window < 1) {
    throw Error(ErrorCode::kInvalidArgument, "trigger_window must be >= 1");
  }
  const std::vector<std::string> variants = VariantsFor(key);
  std::string variant;
  if (options.probe_variant) {
    variant = *options.probe_variant;
    VariantIndex(variants, variant);
  } else {
    const std::uint64_t pick = Mix64(seed ^ Fnv1a64(TaskKeyName(key) + "/probe"));
    variant = variants[pick % variants.size()];
  }

  // The frozen stream depends on the seed and on which scene family the
  // template belongs to, never on the probe variant.
  std::string stream_name = TaskKeyName(key);
  std::uint64_t scene_id = Mix64(seed ^ Fnv1a64(stream_name));
  if (key.family == Family::kLanguage) {
    stream_name = "Language";
    scene_id = Mix64(seed ^ Fnv1a64(stream_name));
  } else if (key.family == Family::kRobustness && key.tier == Tier::kEasy) {
    stream_name = TaskKeyName({Family::kControl, Tier::kEasy, key.template_id});
  } else if (key.family == Family::kRobustness && key.tier == Tier::kMedium) {
    stream_name = TaskKeyName({Family::kControl, Tier::kMedium, key.template_id});
  }
  Ctx c(Mix64(seed ^ Fnv1a64(stream_name + "/fixed")), options.embodiment);
  const bool entangled = key.family == Family::kPerception && options.entangled;
  switch (key.family) {
    case Family::kControl: BuildControl(c, key.tier, key.template_id, variant); break;
    case Family::kPerception:
      BuildPerception(c, key.tier, key.template_id, variant, entangled);
      break;
    case Family::kLanguage: BuildLanguage(c, key.tier, key.template_id, variant); break;
    case Family::kDynamicAdaptation:
      BuildDynamic(c, key.tier, key.template_id, variant, options.trigger_window);
      break;
    case Family::kSpatialReasoning: BuildSpatial(c, key.tier, key.template_id, variant); break;
    case Family::kRobustness: BuildRobustness(c, key.tier, key.template_id, variant, seed); break;
  }

  SettleObjects(c.scene);
  c.scene.scene_id = scene_id;
  c.scene.active_instruction = c.instruction;
  c.scene.active_goal = c.goal;

  GeneratedTask out;
  TaskSpec& s = out.spec;
  s.family = key.family;
  s.tier = key.tier;
  s.template_id = key.template_id;
  s.seed = seed;
  s.probe_variant = variant;
  s.probe_params = c.probe;
  s.fixed_params = c.fixed;
  s.instruction = c.instruction;
  s.entangled = entangled;
  s.goal = c.goal;
  s.predicate_id = PredicateId(key, c.goal, entangled);
  s.scene_id = scene_id;
  s.robot_id = options.embodiment.robot_id;
  s.atomic_actions = c.atomic;
  s.max_steps = MaxSteps(key.tier);
  // Robustness keeps the predicate of the Control task it re-skins.
  const Tier tolerance_tier =
      key.family == Family::kRobustness && key.tier == Tier::kHard ? Tier::kMedium : key.tier;
  s.criterion.predicate_id = s.predicate_id;
  s.criterion.kind = KindFor(c.goal);
  s.criterion.tolerance_m = TierTolerance(tolerance_tier);
  s.criterion.tolerance_rad = kOrientationTolerance;
  s.criterion.hold_steps = kPlacementHoldSteps;
  out.scene = std::move(c.scene);
  return out;
}

void to_json(Json& j, const TaskSpec& s) {
  j = Json{{"family", FamilyName(s.family)},
           {"tier", TierName(s.tier)},
           {"template_id", s.template_id},
           {"seed", s.seed},
           {"probe_variant", s.probe_variant},
           {"probe_params", s.probe_params},
           {"fixed_params", s.fixed_params},
           {"instruction", s.instruction},
           {"predicate_id", s.predicate_id},
           {"entangled", s.entangled},
           {"criterion",
            {{"predicate_id", s.criterion.predicate_id},
             {"kind", CriterionKindName(s.criterion.kind)},
             {"tolerance_m", s.criterion.tolerance_m},
             {"tolerance_rad", s.criterion.tolerance_rad},
             {"hold_steps", s.criterion.hold_steps}}},
           {"goal", s.goal},
           {"scene_id", s.scene_id},
           {"robot_id", s.robot_id},
           {"atomic_actions", s.atomic_actions},
           {"max_steps", s.max_steps}};
}

}  // namespace nebula
