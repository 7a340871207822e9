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

#include "nebula/json_io.h"

#include "nebula/error.h"

namespace nebula {

Family FamilyFromJson(const Json& j) {
  auto f = ParseFamily(j.get<std::string>());
  if (!f) throw Error(ErrorCode::kInvalidArgument, "unknown family " + j.dump());
  return *f;
}

Tier TierFromJson(const Json& j) {
  auto t = ParseTier(j.get<std::string>());
  if (!t) throw Error(ErrorCode::kInvalidArgument, "unknown tier " + j.dump());
  return *t;
}

void to_json(Json& j, const EmbodimentConfig& e) {
  Json limits = Json::array();
  for (const auto& l : e.joint_limits) limits.push_back({l.min, l.max});
  j = Json{{"robot_id", e.robot_id},
           {"dof", e.dof},
           {"gripper", GripperTypeName(e.gripper)},
           {"arm_count", e.arm_count},
           {"joint_limits", limits}};
}

void from_json(const Json& j, EmbodimentConfig& e) {
  e.robot_id = j.at("robot_id").get<std::string>();
  e.dof = j.at("dof").get<int>();
  auto g = ParseGripperType(j.at("gripper").get<std::string>());
  if (!g) throw Error(ErrorCode::kInvalidArgument, "unknown gripper type");
  e.gripper = *g;
  e.arm_count = j.at("arm_count").get<int>();
  e.joint_limits.clear();
  for (const auto& l : j.at("joint_limits")) {
    e.joint_limits.push_back({l.at(0).get<double>(), l.at(1).get<double>()});
  }
}

void to_json(Json& j, const TaskMeta& m) {
  j = Json{{"family", FamilyName(m.family)},
           {"tier", TierName(m.tier)},
           {"template_id", m.template_id},
           {"seed", m.seed},
           {"variant_tag", m.variant_tag}};
}

void from_json(const Json& j, TaskMeta& m) {
  m.family = FamilyFromJson(j.at("family"));
  m.tier = TierFromJson(j.at("tier"));
  m.template_id = j.at("template_id").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.variant_tag = j.value("variant_tag", std::string());
}

void to_json(Json& j, const EpisodeSummary& s) {
  j = Json{{"index", s.index},
           {"episode_id", s.episode_id},
           {"instruction", s.instruction},
           {"robot_id", s.robot_id},
           {"task_meta", s.task_meta},
           {"final_success", s.final_success},
           {"step_count", s.step_count}};
}

void from_json(const Json& j, EpisodeSummary& s) {
  s.index = j.at("index").get<std::uint64_t>();
  s.episode_id = j.at("episode_id").get<std::string>();
  s.instruction = j.at("instruction").get<std::string>();
  s.robot_id = j.at("robot_id").get<std::string>();
  s.task_meta = j.at("task_meta").get<TaskMeta>();
  s.final_success = j.at("final_success").get<std::uint8_t>();
  s.step_count = j.at("step_count").get<std::uint64_t>();
}

void to_json(Json& j, const Manifest& m) {
  Json shards = Json::array();
  for (const auto& s : m.shards) {
    shards.push_back(Json{{"path", s.path},
                          {"episode_count", s.episode_count},
                          {"episodes", s.episodes}});
  }
  j = Json{{"dataset_name", m.dataset_name},
           {"schema_version", m.schema_version},
           {"shards", shards},
           {"family_counts", m.family_counts},
           {"embodiments", m.embodiments}};
}

void from_json(const Json& j, Manifest& m) {
  m.dataset_name = j.at("dataset_name").get<std::string>();
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != kManifestSchemaVersion) {
    throw Error(ErrorCode::kFormatVersionUnsupported,
                "manifest schema " + std::to_string(m.schema_version));
  }
  m.shards.clear();
  for (const auto& s : j.at("shards")) {
    ManifestShard shard;
    shard.path = s.at("path").get<std::string>();
    shard.episode_count = s.at("episode_count").get<std::uint64_t>();
    shard.episodes = s.at("episodes").get<std::vector<EpisodeSummary>>();
    m.shards.push_back(std::move(shard));
  }
  m.family_counts = j.at("family_counts").get<std::map<std::string, std::uint64_t>>();
  m.embodiments = j.at("embodiments").get<std::map<std::string, EmbodimentConfig>>();
}

}  // namespace nebula
