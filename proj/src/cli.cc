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

#include "nebula/cli.h"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nebula/bridge.h"
#include "nebula/capability.h"
#include "nebula/error.h"
#include "nebula/query.h"
#include "nebula/report.h"
#include "nebula/stress.h"

namespace nebula {
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// DatasetWriter

DatasetWriter::DatasetWriter(fs::path dir, std::string name, int episodes_per_shard)
    : dir_(std::move(dir)), name_(std::move(name)), per_shard_(std::max(1, episodes_per_shard)) {
  manifest_.dataset_name = name_;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir_.string() + ": " + ec.message());
}

void DatasetWriter::Roll() {
  if (writer_) {
    writer_->Finish();
    AddShard(manifest_, current_, writer_->summaries(), writer_->embodiments());
    writer_.reset();
  }
}

void DatasetWriter::Append(const Episode& episode) {
  if (writer_ && writer_->count() >= static_cast<std::uint64_t>(per_shard_)) Roll();
  if (!writer_) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "-%05zu.shard", manifest_.shards.size());
    current_ = name_ + buf;
    writer_ = std::make_unique<ShardWriter>(dir_ / current_);
  }
  writer_->Append(episode);
  ++count_;
}

fs::path DatasetWriter::Finish() {
  Roll();
  const fs::path path = ManifestPath(dir_, name_);
  WriteManifest(manifest_, path);
  return path;
}

namespace {

// ---------------------------------------------------------------------------
// Options

struct Options {
  std::string config;
  std::string log_level = "warn";

  // shared
  std::vector<std::string> families;
  std::vector<std::string> tiers;
  std::vector<int> templates;
  int n = 50;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  std::string policy = "expert";
  int image_size = kDefaultRecordImageSize;
  std::vector<std::string> camera_mask;
  bool record = false;
  bool dump_scene = false;
  bool entangled = false;
  std::string name = "nebula";
  int shard_size = kDefaultShardEpisodes;
  int bridge_timeout_ms = static_cast<int>(kDefaultBridgeTimeout.count());

  // run-stress
  std::string kind;
  std::string level = "v1";
  int steps = kDefaultStressSteps;
  int warmup = -1;
  int episodes = kDefaultAdaptabilityEpisodes;

  // query / split / verify
  std::string query = "{}";
  std::vector<std::string> paths;
  double train_ratio = 0.8;
  std::string strata_key = "family";
  bool holdout_robustness = false;

  // report
  std::vector<std::string> capability;
  std::vector<std::string> metrics;
  std::string format = "json";
  std::vector<std::string> tier_mask;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void AddCatalogFilter(CLI::App* sub, Options& o) {
  sub->add_option("--family", o.families,
                  "Task families to include (Control, Perception, Language, Dynamic, Spatial, "
                  "Robustness); repeatable; default all");
  sub->add_option("--tier", o.tiers, "Tiers to include (Easy, Medium, Hard); default all");
  sub->add_option("--template", o.templates, "Template ids (1-3) to include; default all");
}

void AddSeed(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed,
                  "Base seed; episode k of a template uses seed+k (default: NEBULA_SEED or 0)");
}

void AddBridgeTimeout(CLI::App* sub, Options& o) {
  sub->add_option("--bridge-timeout-ms", o.bridge_timeout_ms,
                  "Reply timeout for bridge policies in milliseconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

std::unique_ptr<CLI::App> BuildApp(Options& o) {
  auto app = std::make_unique<CLI::App>(
      "nebula: episode data platform and capability/stress evaluation harness", "nebula");
  app->require_subcommand(1);
  app->fallthrough();
  app->add_option("--config", o.config,
                  "JSON file supplying any flag by name; command-line flags take precedence");
  app->add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str();

  auto* gen = app->add_subcommand("gen", "Generate expert episodes into a sharded dataset");
  AddCatalogFilter(gen, o);
  gen->add_option("--n", o.n, "Episodes per template")->capture_default_str()->check(CLI::PositiveNumber);
  AddSeed(gen, o);
  gen->add_option("--out", o.out, "Output directory")->required();
  gen->add_option("--workers", o.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--image-size", o.image_size, "Recorded image width and height")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--camera-mask", o.camera_mask, "Cameras to zero-fill in observations");
  gen->add_option("--name", o.name, "Dataset name")->capture_default_str();
  gen->add_option("--shard-size", o.shard_size, "Episodes per shard file")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_flag("--dump-scene", o.dump_scene, "Also write each task's spec and initial scene as JSON");

  auto* cap = app->add_subcommand("run-capability", "Run a policy over the capability catalog");
  AddCatalogFilter(cap, o);
  cap->add_option("--policy", o.policy,
                  "expert, reach-only, frozen, zero, random:N, delayed:MS, jitter:AMP or "
                  "bridge:COMMAND")->capture_default_str();
  cap->add_option("--n", o.n, "Episodes per template")->capture_default_str()->check(CLI::PositiveNumber);
  AddSeed(cap, o);
  cap->add_option("--out", o.out, "Output directory")->required();
  cap->add_option("--workers", o.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  cap->add_flag("--record", o.record, "Store every episode in <out>/episodes");
  cap->add_flag("--entangled", o.entangled, "Use the touch-then-place Perception predicates");
  cap->add_option("--image-size", o.image_size, "Recorded image width and height")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cap->add_option("--camera-mask", o.camera_mask, "Cameras to zero-fill in observations");
  cap->add_flag("--dump-scene", o.dump_scene, "Also write each task's spec and initial scene as JSON");
  AddBridgeTimeout(cap, o);

  auto* stress = app->add_subcommand("run-stress", "Run one stress probe");
  stress->add_option("--kind", o.kind, "frequency, latency, stability, adaptability or resources")
      ->required()
      ->check(CLI::IsMember({"frequency", "latency", "stability", "adaptability", "resources"}));
  stress->add_option("--level", o.level, "v1, v2 or v3")
      ->capture_default_str()
      ->check(CLI::IsMember({"v1", "v2", "v3"}));
  stress->add_option("--policy", o.policy, "Policy selector, as for run-capability")->capture_default_str();
  stress->add_option("--steps", o.steps, "Closed-loop steps K")->capture_default_str()->check(CLI::Range(2, 1000000));
  stress->add_option("--warmup", o.warmup, "Warmup steps W excluded from timing (default K/10)");
  stress->add_option("--episodes", o.episodes, "Adaptability episodes")->capture_default_str()->check(CLI::PositiveNumber);
  AddSeed(stress, o);
  stress->add_option("--out", o.out, "Output directory; the record is printed when omitted");
  stress->add_option("--workers", o.workers, "Accepted for symmetry and ignored; probes run on one thread");
  AddBridgeTimeout(stress, o);

  auto* ablate = app->add_subcommand("ablate-isolation",
                                     "Compare isolated and entangled Perception predicates");
  ablate->add_option("--policy", o.policy, "Policy selector")->capture_default_str();
  ablate->add_option("--tier", o.tiers, "Tiers to include; default all");
  ablate->add_option("--n", o.n, "Episodes per template")->capture_default_str()->check(CLI::PositiveNumber);
  AddSeed(ablate, o);
  ablate->add_option("--workers", o.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  ablate->add_option("--out", o.out, "Output directory; the report is printed when omitted");
  AddBridgeTimeout(ablate, o);

  auto* query = app->add_subcommand("query", "List episodes of a dataset matching a JSON query");
  query->add_option("--query", o.query,
                    "JSON object with any of family, tier, template_id, final_success, "
                    "step_count [lo, hi], instruction_contains")->capture_default_str();
  query->add_option("dataset", o.paths, "Dataset directory or manifest")->required()->expected(1);
  query->add_option("--out", o.out, "Write the matches to this file instead of stdout");

  auto* split = app->add_subcommand("split", "Stratified train/test split of a dataset");
  split->add_option("dataset", o.paths, "Dataset directory or manifest")->required()->expected(1);
  split->add_option("--train-ratio", o.train_ratio, "Fraction per stratum sent to train")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  split->add_option("--strata-key", o.strata_key, "family or family_tier")
      ->capture_default_str()
      ->check(CLI::IsMember({"family", "family_tier"}));
  split->add_flag("--holdout-robustness", o.holdout_robustness,
                  "Send every Robustness episode to test");
  AddSeed(split, o);
  split->add_option("--out", o.out, "Write the split to this file instead of stdout");

  auto* verify = app->add_subcommand("verify", "Check shard checksums and manifest consistency");
  verify->add_option("paths", o.paths, "Shard files, manifests or dataset directories")->required();

  auto* report = app->add_subcommand("report", "Aggregate capability reports and stress records");
  report->add_option("--capability", o.capability, "Capability report JSON files")->required();
  report->add_option("--metrics", o.metrics, "Stress record JSON files");
  report->add_option("--format", o.format, "json, csv or radar_json")->capture_default_str();
  report->add_option("--tier-mask", o.tier_mask,
                     "Tiers shown in radar_json (e.g. --tier-mask Easy Medium); default all");
  report->add_option("--out", o.out, "Write the export to this file instead of stdout");
  return app;
}

// ---------------------------------------------------------------------------
// Config file

std::string ScalarText(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Flags the config supplies for the chosen subcommand that the command line
// left unset, as extra arguments.
std::vector<std::string> ConfigArgs(const Json& config, CLI::App* sub) {
  if (!config.is_object()) throw UsageError("config file must hold a JSON object");
  std::map<std::string, Json> merged;
  for (const auto& [key, value] : config.items()) {
    if (!value.is_object()) merged[key] = value;  // objects are subcommand sections
  }
  if (config.contains(sub->get_name())) {
    const Json& section = config.at(sub->get_name());
    if (!section.is_object()) throw UsageError("config section '" + sub->get_name() + "' must be an object");
    for (const auto& [key, value] : section.items()) {
      if (!sub->get_option_no_throw("--" + key)) {
        throw UsageError("config key '" + key + "' is not a flag of " + sub->get_name());
      }
      merged[key] = value;
    }
  }
  std::vector<std::string> args;
  for (const auto& [key, value] : merged) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || opt->count() > 0) continue;
    const std::string flag = "--" + key;
    if (opt->get_expected_min() == 0) {
      if (value.is_boolean() ? value.get<bool>() : !value.is_null()) args.push_back(flag);
      continue;
    }
    if (value.is_array()) {
      for (const Json& v : value) {
        args.push_back(flag);
        args.push_back(ScalarText(v));
      }
    } else {
      args.push_back(flag);
      args.push_back(ScalarText(value));
    }
  }
  return args;
}

// ---------------------------------------------------------------------------
// Helpers

std::set<Family> ParseFamilies(const std::vector<std::string>& names) {
  std::set<Family> out;
  for (const auto& n : names) {
    const auto f = ParseFamily(n);
    if (!f) throw UsageError("unknown family '" + n + "'");
    out.insert(*f);
  }
  return out;
}

std::set<Tier> ParseTiers(const std::vector<std::string>& names) {
  std::set<Tier> out;
  for (const auto& n : names) {
    const auto t = ParseTier(n);
    if (!t) throw UsageError("unknown tier '" + n + "'");
    out.insert(*t);
  }
  return out;
}

std::set<CameraId> ParseCameras(const std::vector<std::string>& names) {
  std::set<CameraId> out;
  for (const auto& n : names) {
    const auto c = ParseCamera(n);
    if (!c) throw UsageError("unknown camera '" + n + "'");
    out.insert(*c);
  }
  return out;
}

std::vector<TaskKey> SelectTasks(const Options& o) {
  std::optional<std::set<Family>> families;
  std::optional<std::set<Tier>> tiers;
  if (!o.families.empty()) families = ParseFamilies(o.families);
  if (!o.tiers.empty()) tiers = ParseTiers(o.tiers);
  std::vector<TaskKey> keys = ListTasks(families, tiers);
  if (!o.templates.empty()) {
    for (int t : o.templates) {
      if (t < 1 || t > kTemplatesPerTier) throw UsageError("template ids run from 1 to 3");
    }
    std::erase_if(keys, [&](const TaskKey& k) {
      return std::find(o.templates.begin(), o.templates.end(), k.template_id) == o.templates.end();
    });
  }
  if (keys.empty()) throw UsageError("the catalog filter selects no templates");
  return keys;
}

PolicyFactory SelectPolicy(const Options& o) {
  if (auto f = ScriptedPolicyFactory(o.policy)) return *f;
  if (auto f = BridgePolicyFactory(o.policy, std::chrono::milliseconds(o.bridge_timeout_ms))) {
    return *f;
  }
  throw UsageError("unknown policy '" + o.policy + "'");
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Json ReadJson(const fs::path& path) {
  Json j = Json::parse(ReadText(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kIoError, path.string() + " is not valid JSON");
  return j;
}

// Machine output goes to --out when given, otherwise to stdout.
void Emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
  } else {
    WriteText(o.out, text);
  }
}

void DumpScenes(const std::vector<TaskKey>& keys, int n, std::uint64_t seed, bool entangled,
                const fs::path& dir) {
  for (const auto& key : keys) {
    for (int i = 0; i < n; ++i) {
      TaskOptions to;
      to.entangled = entangled && key.family == Family::kPerception;
      const GeneratedTask task = GenerateTask(key, seed + static_cast<std::uint64_t>(i), to);
      Json spec, scene;
      to_json(spec, task.spec);
      to_json(scene, task.scene);
      WriteText(dir / (EpisodeId(task.spec) + ".json"),
                Json{{"spec", spec}, {"scene", scene}}.dump(2) + "\n");
    }
  }
}

Json RefJson(const Manifest& m, const EpisodeRef& r) {
  const EpisodeSummary& s = Lookup(m, r);
  return {{"shard", m.shards[r.shard].path}, {"index", r.index}, {"episode_id", s.episode_id}};
}

// ---------------------------------------------------------------------------
// Subcommands

int CmdGen(const Options& o, std::ostream& out) {
  CapabilityOptions co;
  co.tasks = SelectTasks(o);
  co.episodes_per_task = o.n;
  co.seed = o.seed;
  co.workers = o.workers;
  co.episode.record = true;
  co.episode.image_size = o.image_size;
  co.episode.camera_mask = ParseCameras(o.camera_mask);
  DatasetWriter writer(o.out, o.name, o.shard_size);
  co.on_record = [&](const Episode& e) { writer.Append(e); };
  const CapabilityReport report = RunCapabilitySuite(*ScriptedPolicyFactory("expert"), co);
  const fs::path manifest = writer.Finish();
  if (o.dump_scene) DumpScenes(co.tasks, o.n, o.seed, false, fs::path(o.out) / "scenes");
  int successes = 0;
  for (const auto& t : report.templates) successes += t.successes;
  out << Json{{"manifest", manifest.string()},
              {"episodes", writer.count()},
              {"successes", successes}}.dump()
      << "\n";
  return kExitOk;
}

int CmdRunCapability(const Options& o, std::ostream& out) {
  CapabilityOptions co;
  co.tasks = SelectTasks(o);
  co.episodes_per_task = o.n;
  co.seed = o.seed;
  co.workers = o.workers;
  co.entangled = o.entangled;
  co.episode.record = o.record;
  co.episode.image_size = o.image_size;
  co.episode.camera_mask = ParseCameras(o.camera_mask);
  const PolicyFactory factory = SelectPolicy(o);
  std::optional<DatasetWriter> writer;
  if (o.record) {
    writer.emplace(fs::path(o.out) / "episodes", o.name);
    co.on_record = [&](const Episode& e) { writer->Append(e); };
  }
  const CapabilityReport report = RunCapabilitySuite(factory, co);
  if (writer) writer->Finish();
  if (o.dump_scene) DumpScenes(co.tasks, o.n, o.seed, o.entangled, fs::path(o.out) / "scenes");
  const fs::path dir(o.out);
  WriteText(dir / "capability_report.json", CapabilityReportToJson(report).dump(2) + "\n");
  // Timing lives beside the report so the report itself stays reproducible.
  WriteText(dir / "run_meta.json",
            Json{{"wall_time_s", report.wall_time_s}, {"workers", o.workers}}.dump(2) + "\n");
  int episodes = 0, successes = 0, errors = 0;
  for (const auto& t : report.templates) {
    episodes += t.episodes;
    successes += t.successes;
    errors += static_cast<int>(t.errors.size());
  }
  out << Json{{"report", (dir / "capability_report.json").string()},
              {"episodes", episodes},
              {"successes", successes},
              {"policy_errors", errors}}.dump()
      << "\n";
  return kExitOk;
}

int CmdRunStress(const Options& o, std::ostream& out) {
  if (o.workers != 1) spdlog::info("run-stress ignores --workers; probes run on one thread");
  StressProfile p;
  p.kind = *ParseStressKind(o.kind);
  p.level = *ParseStressLevel(o.level);
  p.steps = o.steps;
  p.warmup = o.warmup;
  p.seed = o.seed;
  p.episodes = o.episodes;
  if (p.EffectiveWarmup() >= p.steps) throw UsageError("--warmup must be smaller than --steps");
  const MetricRecord r = RunStress(SelectPolicy(o), p);
  const std::string text = MetricRecordToJson(r).dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    WriteText(fs::path(o.out) / ("stress_" + o.kind + "_" + o.level + ".json"), text);
  }
  if (r.failed) {
    spdlog::error("stress probe failed: {}", r.failure_cause);
    return kExitFailure;
  }
  return kExitOk;
}

int CmdAblate(const Options& o, std::ostream& out) {
  std::set<Tier> tiers = o.tiers.empty() ? std::set<Tier>(kAllTiers.begin(), kAllTiers.end())
                                         : ParseTiers(o.tiers);
  const AblationReport r = RunIsolationAblation(SelectPolicy(o), tiers, o.n, o.seed, o.workers);
  const std::string text = AblationReportToJson(r).dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    WriteText(fs::path(o.out) / "isolation_ablation.json", text);
  }
  return kExitOk;
}

int CmdQuery(const Options& o, std::ostream& out) {
  const Json qj = Json::parse(o.query, nullptr, false);
  if (qj.is_discarded()) throw Error(ErrorCode::kMalformedQuery, "--query is not valid JSON");
  const QueryExpr q = ParseQuery(qj);
  const Manifest m = LoadDataset(o.paths.at(0));
  std::string text;
  for (const auto& ref : Filter(m, q)) text += RefJson(m, ref).dump() + "\n";
  Emit(o, out, text);
  return kExitOk;
}

int CmdSplit(const Options& o, std::ostream& out) {
  const Manifest m = LoadDataset(o.paths.at(0));
  SplitSpec spec;
  spec.train_ratio = o.train_ratio;
  spec.strata_key = o.strata_key == "family_tier" ? StrataKey::kFamilyTier : StrataKey::kFamily;
  spec.seed = o.seed;
  spec.holdout_robustness = o.holdout_robustness;
  const Split s = StratifiedSplit(m, spec);
  Json train = Json::array(), test = Json::array();
  for (const auto& r : s.train) train.push_back(RefJson(m, r));
  for (const auto& r : s.test) test.push_back(RefJson(m, r));
  Emit(o, out, Json{{"train", train}, {"test", test}}.dump(2) + "\n");
  return kExitOk;
}

int CmdVerify(const Options& o, std::ostream& out) {
  bool ok = true;
  Json results = Json::array();
  auto verify_shard = [&](const fs::path& shard) {
    const IntegrityReport rep = VerifyShard(shard);
    Json failures = Json::array();
    for (const auto& f : rep.failures) {
      failures.push_back(
          {{"code", IntegrityCodeName(f.code)}, {"episode", f.episode}, {"detail", f.detail}});
    }
    ok = ok && rep.ok();
    results.push_back({{"shard", shard.string()}, {"ok", rep.ok()}, {"failures", failures}});
  };
  for (const auto& p : o.paths) {
    const fs::path path(p);
    const bool is_manifest = fs::is_directory(path) || path.string().ends_with(".manifest.json");
    if (!is_manifest) {
      verify_shard(path);
      continue;
    }
    const Manifest m = LoadDataset(path);
    const std::vector<std::string> problems = CheckManifest(m);
    ok = ok && problems.empty();
    results.push_back({{"manifest", path.string()}, {"ok", problems.empty()}, {"problems", problems}});
    for (const auto& s : m.shards) verify_shard(m.root / s.path);
  }
  out << results.dump(2) << "\n";
  return ok ? kExitOk : kExitFailure;
}

int CmdReport(const Options& o, std::ostream& out) {
  const ExportFormat format = ParseExportFormat(o.format);
  std::vector<CapabilityReport> reports;
  for (const auto& path : o.capability) reports.push_back(CapabilityReportFromJson(ReadJson(path)));
  std::vector<MetricRecord> metrics;
  for (const auto& path : o.metrics) {
    const Json j = ReadJson(path);
    if (j.is_array()) {
      for (const Json& m : j) metrics.push_back(MetricRecordFromJson(m));
    } else {
      metrics.push_back(MetricRecordFromJson(j));
    }
  }
  const std::set<Tier> tiers = o.tier_mask.empty()
                                   ? std::set<Tier>(kAllTiers.begin(), kAllTiers.end())
                                   : ParseTiers(o.tier_mask);
  const EvalReport r = Aggregate(std::move(reports), std::move(metrics));
  Emit(o, out, Export(r, format, tiers));
  return kExitOk;
}

bool IsUsageCode(ErrorCode c) {
  return c == ErrorCode::kInvalidArgument || c == ErrorCode::kMalformedQuery ||
         c == ErrorCode::kUnknownFormat || c == ErrorCode::kUnknownTemplate;
}

void ConfigureLogging(const std::string& level) {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("nebula");
    spdlog::set_default_logger(logger);
  });
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // CLI11 wants the arguments last-first.
  auto parse = [](CLI::App& app, std::vector<std::string> a) {
    std::reverse(a.begin(), a.end());
    app.parse(a);
  };

  Options first;
  auto app = BuildApp(first);
  try {
    parse(*app, args);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Options o;
  std::unique_ptr<CLI::App> final_app;
  try {
    CLI::App* sub = app->get_subcommands().front();
    std::vector<std::string> final_args = args;
    if (!first.config.empty()) {
      const Json config = Json::parse(ReadText(first.config), nullptr, false);
      if (config.is_discarded()) throw UsageError("config file is not valid JSON");
      const std::vector<std::string> extra = ConfigArgs(config, sub);
      const auto pos = std::find(final_args.begin(), final_args.end(), sub->get_name());
      final_args.insert(pos + 1, extra.begin(), extra.end());
    }
    final_app = BuildApp(o);
    try {
      parse(*final_app, final_args);
    } catch (const CLI::ParseError& e) {
      const int code = final_app->exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }
    sub = final_app->get_subcommands().front();
    const CLI::Option* seed_opt = sub->get_option_no_throw("--seed");
    if (seed_opt && seed_opt->count() == 0) {
      if (const char* env = std::getenv("NEBULA_SEED")) {
        try {
          std::size_t used = 0;
          o.seed = std::stoull(env, &used);
          if (used != std::strlen(env)) throw std::invalid_argument(env);
        } catch (const std::exception&) {
          throw UsageError(std::string("NEBULA_SEED must be an unsigned integer, got '") + env + "'");
        }
      }
    }
    ConfigureLogging(o.log_level);

    const std::string name = sub->get_name();
    if (name == "gen") return CmdGen(o, out);
    if (name == "run-capability") return CmdRunCapability(o, out);
    if (name == "run-stress") return CmdRunStress(o, out);
    if (name == "ablate-isolation") return CmdAblate(o, out);
    if (name == "query") return CmdQuery(o, out);
    if (name == "split") return CmdSplit(o, out);
    if (name == "verify") return CmdVerify(o, out);
    if (name == "report") return CmdReport(o, out);
    err << "unknown subcommand " << name << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    if (final_app) err << final_app->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return IsUsageCode(e.code()) ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace nebula
