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

// Python bindings for the nebula core: the command line, task generation,
// shard reading and the bridge frame codec.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nebula/bridge.h"
#include "nebula/cli.h"
#include "nebula/storage.h"
#include "nebula/stress.h"
#include "nebula/taskgen.h"

namespace py = pybind11;

namespace nebula {
namespace {

py::tuple RunCliPy(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = RunCli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

TaskKey KeyFrom(const std::string& family, const std::string& tier, int template_id) {
  const auto f = ParseFamily(family);
  const auto t = ParseTier(tier);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "unknown family " + family);
  if (!t) throw Error(ErrorCode::kInvalidArgument, "unknown tier " + tier);
  return {*f, *t, template_id};
}

std::string GenerateTaskJson(const std::string& family, const std::string& tier, int template_id,
                             std::uint64_t seed, std::optional<std::string> probe_variant) {
  TaskOptions opt;
  opt.probe_variant = std::move(probe_variant);
  const GeneratedTask task = GenerateTask(KeyFrom(family, tier, template_id), seed, opt);
  return Json{{"spec", task.spec}, {"scene", task.scene}}.dump();
}

std::vector<std::string> ListTaskNames() {
  std::vector<std::string> names;
  for (const TaskKey& k : ListTasks()) names.push_back(TaskKeyName(k));
  return names;
}

std::uint64_t ShardEpisodeCount(const std::string& path) { return OpenShard(path).episode_count; }

py::dict ReadEpisodeSummary(const std::string& path, std::uint64_t index) {
  const Episode e = ReadEpisode(OpenShard(path), index);
  py::dict d;
  d["episode_id"] = e.episode_id;
  d["instruction"] = e.instruction;
  d["robot_id"] = e.embodiment.robot_id;
  d["family"] = std::string(FamilyName(e.task_meta.family));
  d["tier"] = std::string(TierName(e.task_meta.tier));
  d["template_id"] = e.task_meta.template_id;
  d["seed"] = e.task_meta.seed;
  d["step_count"] = e.steps.size();
  d["final_success"] = static_cast<int>(e.final_success);
  std::vector<std::vector<double>> actions;
  for (const Step& s : e.steps) actions.push_back(s.action.values);
  d["actions"] = std::move(actions);
  return d;
}

std::vector<std::string> VerifyShardPy(const std::string& path) {
  std::vector<std::string> problems;
  for (const auto& f : VerifyShard(path).failures) {
    problems.push_back(std::string(IntegrityCodeName(f.code)) + ": " + f.detail);
  }
  return problems;
}

double StabilityScorePy(const std::vector<std::vector<double>>& actions) {
  std::vector<Action> a;
  a.reserve(actions.size());
  for (const auto& v : actions) a.push_back(Action{v});
  return StabilityScore(a);
}

py::bytes EncodeFramePy(int type, const py::bytes& payload) {
  const std::string p = payload;
  Frame f;
  f.type = static_cast<FrameType>(type);
  f.payload.assign(p.begin(), p.end());
  const std::vector<std::uint8_t> bytes = EncodeFrame(f);
  return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

// Returns (type, payload, consumed), or None when more bytes are needed.
py::object DecodeFramePy(const py::bytes& data) {
  const std::string s = data;
  std::size_t consumed = 0;
  const auto f = DecodeFrame(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()),
      &consumed);
  if (!f) return py::none();
  return py::make_tuple(static_cast<int>(f->type),
                        py::bytes(reinterpret_cast<const char*>(f->payload.data()),
                                  f->payload.size()),
                        consumed);
}

}  // namespace
}  // namespace nebula

PYBIND11_MODULE(_core, m) {
  using namespace nebula;
  m.doc() = "Native core of the nebula evaluation toolkit";
  py::register_exception<Error>(m, "NebulaError", PyExc_RuntimeError);

  m.attr("PROTOCOL_VERSION") = kBridgeProtocolVersion;
  m.def("run_cli", &RunCliPy, py::arg("args"),
        "Run the command line in process; returns (exit_code, stdout, stderr).");
  m.def("list_tasks", &ListTaskNames, "Catalog keys as 'Family/Tier/template'.");
  m.def("generate_task", &GenerateTaskJson, py::arg("family"), py::arg("tier"),
        py::arg("template_id"), py::arg("seed"), py::arg("probe_variant") = py::none(),
        "Task spec and initial scene as a JSON string.");
  m.def("shard_episode_count", &ShardEpisodeCount, py::arg("path"));
  m.def("read_episode", &ReadEpisodeSummary, py::arg("path"), py::arg("index"),
        "Metadata and actions of one episode in a shard.");
  m.def("verify_shard", &VerifyShardPy, py::arg("path"),
        "Integrity problems of a shard file; empty when intact.");
  m.def("stability_score", &StabilityScorePy, py::arg("actions"));
  m.def("encode_frame", &EncodeFramePy, py::arg("type"), py::arg("payload"));
  m.def("decode_frame", &DecodeFramePy, py::arg("data"));
}
