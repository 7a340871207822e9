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

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero when any fails. Expected values are recomputed here from first
// principles rather than taken from the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nebula/bridge.h"
#include "nebula/capability.h"
#include "nebula/error.h"
#include "nebula/policy.h"
#include "nebula/query.h"
#include "nebula/report.h"
#include "nebula/storage.h"
#include "nebula/stress.h"
#include "nebula/taskgen.h"
#include "test_support.h"

namespace nebula {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string Fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// Criterion 1. Oracle: exp(-(1/(T-1)) * sum_t ||a_t - a_{t-1}||).
double StabilityOracle(const std::vector<std::vector<double>>& seq) {
  long double total = 0.0L;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    long double sq = 0.0L;
    for (std::size_t k = 0; k < seq[t].size(); ++k) {
      const long double d = static_cast<long double>(seq[t][k]) - seq[t - 1][k];
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return static_cast<double>(std::exp(-total / static_cast<long double>(seq.size() - 1)));
}

std::vector<Action> ToActions(const std::vector<std::vector<double>>& seq) {
  std::vector<Action> out;
  for (const auto& v : seq) out.push_back(Action{v});
  return out;
}

Outcome CheckStability() {
  Outcome o;
  const std::vector<Action> constant(50, Action{{0.3, -0.2, 0.0, 1.0, -1.0, 0.5, 0.1, 0.0}});
  const double c = StabilityScore(constant);
  o.Check(c == 1.0, "constant sequence gave " + Fmt(c, 17));

  const std::vector<Action> unit = {Action{{0.0, 0.0}}, Action{{1.0, 0.0}}};
  const double u = StabilityScore(unit);
  o.Check(std::abs(u - std::exp(-1.0)) <= 1e-12, "unit pair gave " + Fmt(u, 17));

  std::mt19937_64 gen(20260601);
  std::uniform_int_distribution<int> len(2, 60), dim(1, 9);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = len(gen), d = dim(gen);
    std::vector<std::vector<double>> seq(n, std::vector<double>(d));
    for (auto& row : seq) {
      for (double& x : row) x = val(gen);
    }
    worst = std::max(worst, std::abs(StabilityScore(ToActions(seq)) - StabilityOracle(seq)));
  }
  o.Check(worst <= 1e-9, "random sequences deviate by " + Fmt(worst));
  o.detail = o.pass ? "constant=1, unit=e^-1, 1000 random max err " + Fmt(worst) : o.detail;
  return o;
}

// Criterion 2.
Outcome CheckTiming() {
  Outcome o;
  std::string summary;
  double last_hz = 1e18;
  for (int d : {10, 50, 200}) {
    const PolicyFactory factory = MakePolicyFactory("delayed:" + std::to_string(d));
    StressProfile p;
    p.level = StressLevel::kV1;
    p.steps = 200;
    p.kind = StressKind::kFrequency;
    const MetricRecord f = MeasureInferenceFrequency(factory, p);
    p.kind = StressKind::kLatency;
    const MetricRecord l = MeasureLatency(factory, p);
    if (f.failed || l.failed || !f.frequency_hz || !l.latency_ms) {
      o.Check(false, "d=" + std::to_string(d) + " probe failed: " + f.failure_cause +
                         l.failure_cause);
      continue;
    }
    const double expect_hz = 1000.0 / d;
    const double hz = *f.frequency_hz, ms = l.latency_ms->mean_ms;
    o.Check(std::abs(hz - expect_hz) <= 0.10 * expect_hz,
            "d=" + std::to_string(d) + " frequency " + Fmt(hz));
    o.Check(std::abs(ms - d) <= 0.15 * d, "d=" + std::to_string(d) + " latency " + Fmt(ms));
    o.Check(hz < last_hz, "frequency not decreasing at d=" + std::to_string(d));
    last_hz = hz;
    summary += "d=" + std::to_string(d) + ": " + Fmt(hz) + " Hz, " + Fmt(ms) + " ms; ";
  }
  if (o.pass) o.detail = summary + "monotonic";
  return o;
}

// Criterion 3.
Outcome CheckAdaptability() {
  Outcome o;
  StressProfile p;
  p.kind = StressKind::kAdaptability;
  p.level = StressLevel::kV1;
  p.episodes = 40;
  const MetricRecord expert = RunAdaptability(MakePolicyFactory("expert"), p);
  const MetricRecord frozen = RunAdaptability(MakePolicyFactory("frozen"), p);
  const double e = expert.adaptability_rate.value_or(-1.0);
  const double f = frozen.adaptability_rate.value_or(2.0);
  o.Check(!expert.failed && e >= 0.95, "expert rate " + Fmt(e));
  o.Check(!frozen.failed && f <= 0.05, "frozen rate " + Fmt(f));
  o.Check(expert.sample_count == 40 && frozen.sample_count == 40, "sample count is not 40");
  if (o.pass) o.detail = "expert " + Fmt(e) + ", frozen " + Fmt(f) + " over 40 episodes";
  return o;
}

// Criterion 4.
Outcome CheckCapability() {
  Outcome o;
  CapabilityOptions opt;
  opt.tasks = ListTasks(std::set<Family>{Family::kControl}, std::set<Tier>{Tier::kEasy, Tier::kMedium});
  opt.episodes_per_task = 20;
  opt.seed = 0;
  const CapabilityReport expert = RunCapabilitySuite(MakePolicyFactory("expert"), opt);
  const CapabilityReport random = RunCapabilitySuite(MakePolicyFactory("random:0"), opt);
  int expert_ok = 0, expert_n = 0, random_ok = 0, random_n = 0;
  for (const auto& t : expert.templates) {
    expert_ok += t.successes;
    expert_n += t.episodes;
    o.Check(t.episodes == 20 && t.successes == 20,
            "expert " + TaskKeyName(t.key) + " " + std::to_string(t.successes) + "/" +
                std::to_string(t.episodes));
  }
  for (const auto& t : random.templates) {
    random_ok += t.successes;
    random_n += t.episodes;
  }
  for (Tier tier : {Tier::kEasy, Tier::kMedium}) {
    int ok = 0, n = 0;
    for (const auto& t : random.templates) {
      if (t.key.tier != tier) continue;
      ok += t.successes;
      n += t.episodes;
    }
    o.Check(n == 60 && ok <= 0.05 * n,
            "random Control/" + std::string(TierName(tier)) + " " + std::to_string(ok) + "/" +
                std::to_string(n));
  }
  o.Check(expert_n == 120, "expert ran " + std::to_string(expert_n) + " episodes");
  if (o.pass) {
    o.detail = "expert " + std::to_string(expert_ok) + "/" + std::to_string(expert_n) +
               ", random " + std::to_string(random_ok) + "/" + std::to_string(random_n);
  }
  return o;
}

// Criterion 5.
Outcome CheckIsolation() {
  Outcome o;
  const AblationReport reach =
      RunIsolationAblation(MakePolicyFactory("reach-only"), {Tier::kEasy}, 20, 0);
  int iso = 0, ent = 0, n = 0;
  for (const auto& row : reach.rows) {
    iso += row.isolated_successes;
    ent += row.entangled_successes;
    n += row.episodes;
  }
  o.Check(n > 0 && iso == n, "reach-only isolated " + std::to_string(iso) + "/" + std::to_string(n));
  o.Check(ent == 0, "reach-only entangled " + std::to_string(ent) + "/" + std::to_string(n));
  o.Check(reach.implication_violations() == 0, "reach-only implication violations");

  int violations = reach.implication_violations();
  for (const char* policy : {"expert", "random:3"}) {
    const AblationReport r = RunIsolationAblation(MakePolicyFactory(policy),
                                                  {Tier::kEasy, Tier::kMedium, Tier::kHard}, 5, 0);
    violations += r.implication_violations();
    o.Check(r.implication_violations() == 0, std::string(policy) + " implication violations");
  }
  if (o.pass) {
    o.detail = "reach-only isolated " + std::to_string(iso) + "/" + std::to_string(n) +
               ", entangled " + std::to_string(ent) + "/" + std::to_string(n) +
               ", violations " + std::to_string(violations);
  }
  return o;
}

// Criterion 6.
Outcome CheckControlledVariable() {
  Outcome o;
  int comparisons = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (const TaskKey& key : ListTasks()) {
      const std::vector<std::string> variants = ProbeVariants(key);
      std::optional<Json> first;
      for (const std::string& v : variants) {
        TaskOptions opt;
        opt.probe_variant = v;
        const GeneratedTask t = GenerateTask(key, seed, opt);
        if (!first) {
          first = t.spec.fixed_params;
        } else {
          ++comparisons;
          if (t.spec.fixed_params != *first) {
            o.Check(false, TaskKeyName(key) + " seed " + std::to_string(seed) + " variant " + v);
          }
        }
      }
    }
    std::optional<Json> scene;
    for (const TaskKey& key : ListTasks(std::set<Family>{Family::kLanguage})) {
      const GeneratedTask t = GenerateTask(key, seed);
      Json objects = t.scene.objects;
      if (!scene) {
        scene = objects;
      } else if (objects != *scene) {
        o.Check(false, "language scene differs at " + TaskKeyName(key) + " seed " +
                           std::to_string(seed));
      }
    }
  }
  if (o.pass) {
    o.detail = std::to_string(comparisons) +
               " variant comparisons over 100 seeds; language scene shared by 9 templates";
  }
  return o;
}

// Criterion 7.
Outcome CheckStorage() {
  Outcome o;
  TempDir dir;
  {
    const std::vector<Episode> corpus = testing::MakeCorpus(10000, 77, 1);
    const fs::path path = dir / "big.shard";
    WriteShard(corpus, path);
    const Shard shard = OpenShard(path);
    o.Check(shard.episode_count == corpus.size(), "episode count");
    int mismatches = 0;
    for (std::uint64_t i = 0; i < shard.episode_count && i < corpus.size(); ++i) {
      const Episode back = ReadEpisode(shard, i);
      if (!(back == corpus[i]) || EncodeEpisode(back) != EncodeEpisode(corpus[i])) ++mismatches;
    }
    o.Check(mismatches == 0, std::to_string(mismatches) + " roundtrip mismatches");

    // Random access: the reader should touch about one record.
    std::mt19937_64 gen(5);
    double worst_ratio = 0.0;
    for (int k = 0; k < 100; ++k) {
      const std::uint64_t i = gen() % shard.episode_count;
      ReadStats stats;
      ReadEpisode(shard, i, &stats);
      const double record = static_cast<double>(shard.index[i].byte_length + kRecordPrefixBytes);
      worst_ratio = std::max(worst_ratio, static_cast<double>(stats.bytes_read) / record);
    }
    o.Check(worst_ratio < 2.0, "random read touched " + Fmt(worst_ratio) + "x record size");
    o.detail = "10000 episodes bit-identical; read ratio " + Fmt(worst_ratio);
  }

  const std::vector<Episode> small = testing::MakeCorpus(12, 3, 1);
  const fs::path clean = dir / "small.shard";
  WriteShard(small, clean);
  const std::vector<std::uint8_t> original = testing::ReadBytes(clean);
  std::mt19937_64 gen(11);
  int detected = 0;
  const fs::path bad = dir / "corrupt.shard";
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::uint8_t> bytes = original;
    const std::size_t pos = gen() % bytes.size();
    const std::uint8_t flip = static_cast<std::uint8_t>(1 + gen() % 255);
    bytes[pos] ^= flip;
    testing::WriteBytes(bad, bytes);
    bool caught = false;
    try {
      caught = !VerifyShard(bad).ok();
    } catch (const Error&) {
      caught = true;
    }
    detected += caught ? 1 : 0;
  }
  o.Check(detected == 1000, std::to_string(detected) + "/1000 corruptions detected");
  if (o.pass) o.detail += "; 1000/1000 corruptions detected";
  return o;
}

// Criterion 8. The oracle evaluates the JSON query directly.
bool OracleMatch(const Json& q, const EpisodeSummary& e) {
  auto in_list = [](const Json& v, const std::string& name) {
    if (v.is_string()) return v.get<std::string>() == name;
    for (const auto& x : v) {
      if (x.get<std::string>() == name) return true;
    }
    return false;
  };
  if (q.contains("family") && !in_list(q["family"], std::string(FamilyName(e.task_meta.family)))) {
    return false;
  }
  if (q.contains("tier") && !in_list(q["tier"], std::string(TierName(e.task_meta.tier)))) {
    return false;
  }
  if (q.contains("final_success") && q["final_success"].get<bool>() != (e.final_success == 1)) {
    return false;
  }
  if (q.contains("step_count")) {
    const auto lo = q["step_count"][0].get<std::uint64_t>();
    const auto hi = q["step_count"][1].get<std::uint64_t>();
    if (e.step_count < lo || e.step_count > hi) return false;
  }
  if (q.contains("instruction_contains")) {
    std::string hay = e.instruction, needle = q["instruction_contains"].get<std::string>();
    for (auto& c : hay) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto& c : needle) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (hay.find(needle) == std::string::npos) return false;
  }
  if (q.contains("template_id")) {
    const Json& t = q["template_id"];
    bool hit = false;
    if (t.is_number()) {
      hit = t.get<int>() == e.task_meta.template_id;
    } else {
      for (const auto& x : t) hit = hit || x.get<int>() == e.task_meta.template_id;
    }
    if (!hit) return false;
  }
  return true;
}

Json RandomQuery(std::mt19937_64& gen) {
  const std::vector<std::string> families = {"Control", "Perception", "Language",
                                             "DynamicAdaptation", "SpatialReasoning", "Robustness"};
  const std::vector<std::string> tiers = {"Easy", "Medium", "Hard"};
  const std::vector<std::string> words = {"cube", "RED", "bin", "touch", "Stack"};
  auto coin = [&] { return gen() % 2 == 0; };
  Json q = Json::object();
  if (coin()) {
    Json f = Json::array();
    for (const auto& name : families) {
      if (gen() % 3 == 0) f.push_back(name);
    }
    q["family"] = f.empty() ? Json(families[gen() % families.size()]) : f;
  }
  if (coin()) q["tier"] = tiers[gen() % tiers.size()];
  if (gen() % 3 == 0) q["final_success"] = coin();
  if (coin()) {
    const std::uint64_t a = gen() % 800, b = gen() % 800;
    q["step_count"] = {std::min(a, b), std::max(a, b)};
  }
  if (gen() % 3 == 0) q["instruction_contains"] = words[gen() % words.size()];
  if (gen() % 3 == 0) q["template_id"] = Json::array({1 + static_cast<int>(gen() % 3)});
  return q;
}

Outcome CheckQuerySplit() {
  Outcome o;
  const Manifest m = testing::MakeSyntheticManifest(1000, 4, 99);
  std::mt19937_64 gen(8);
  int total_hits = 0;
  for (int k = 0; k < 20; ++k) {
    const Json q = k == 0 ? Json::object() : RandomQuery(gen);
    const std::vector<EpisodeRef> got = Filter(m, ParseQuery(q));
    std::vector<EpisodeRef> want;
    for (std::uint32_t s = 0; s < m.shards.size(); ++s) {
      for (const auto& e : m.shards[s].episodes) {
        if (OracleMatch(q, e)) want.push_back({s, e.index});
      }
    }
    total_hits += static_cast<int>(want.size());
    o.Check(got == want, "query " + q.dump() + " differs from brute force");
  }

  for (StrataKey key : {StrataKey::kFamily, StrataKey::kFamilyTier}) {
    SplitSpec spec;
    spec.train_ratio = 0.7;
    spec.strata_key = key;
    spec.seed = 4;
    const Split split = StratifiedSplit(m, spec);
    std::map<std::pair<int, int>, std::pair<int, int>> strata;  // key -> (n, train)
    auto stratum = [&](const EpisodeSummary& e) {
      return std::pair<int, int>(static_cast<int>(e.task_meta.family),
                                 key == StrataKey::kFamily ? -1 : static_cast<int>(e.task_meta.tier));
    };
    for (const auto& shard : m.shards) {
      for (const auto& e : shard.episodes) ++strata[stratum(e)].first;
    }
    for (const auto& r : split.train) ++strata[stratum(Lookup(m, r))].second;
    double worst = 0.0;
    for (const auto& [k, v] : strata) {
      worst = std::max(worst, std::abs(v.second - spec.train_ratio * v.first));
    }
    o.Check(worst < 1.0, "stratum deviation " + Fmt(worst));
    std::set<EpisodeRef> all(split.train.begin(), split.train.end());
    all.insert(split.test.begin(), split.test.end());
    o.Check(all.size() == 1000 && split.train.size() + split.test.size() == 1000,
            "split is not a partition");
  }

  SplitSpec hold;
  hold.holdout_robustness = true;
  const Split split = StratifiedSplit(m, hold);
  int robust_train = 0, robust_total = 0;
  for (const auto& r : split.train) {
    robust_train += Lookup(m, r).task_meta.family == Family::kRobustness ? 1 : 0;
  }
  for (const auto& r : split.test) {
    robust_total += Lookup(m, r).task_meta.family == Family::kRobustness ? 1 : 0;
  }
  o.Check(robust_train == 0, std::to_string(robust_train) + " Robustness episodes in train");
  o.Check(robust_total > 0, "no Robustness episodes in the corpus");
  if (o.pass) {
    o.detail = "20 queries over 1000 episodes match brute force (" + std::to_string(total_hits) +
               " hits); strata within 1; " + std::to_string(robust_total) +
               " Robustness episodes all in test";
  }
  return o;
}

// Criterion 9.
CapabilityReport SyntheticReport(const std::string& id,
                                 const std::function<int(const TaskKey&)>& successes,
                                 const std::vector<TaskKey>& catalog) {
  CapabilityReport r;
  r.policy_id = id;
  r.episodes_per_task = 10;
  for (const TaskKey& k : catalog) r.templates.push_back({k, 10, successes(k), {}});
  return r;
}

Outcome CheckAggregation() {
  Outcome o;
  const std::vector<TaskKey> catalog = ListTasks();
  const EvalReport two = Aggregate({SyntheticReport("a", [](const TaskKey&) { return 5; }, catalog),
                                    SyntheticReport("b", [](const TaskKey&) { return 7; }, catalog)});
  for (const AggregateCell& c : two.cells) {
    o.Check(c.count == 2 && c.mean && std::abs(*c.mean - 0.6) < 1e-12 && c.std &&
                std::abs(*c.std - 0.1) < 1e-12,
            "cell " + std::string(FamilyName(c.family)) + "/" + std::string(TierName(c.tier)));
  }
  const Json radar = Json::parse(Export(two, "radar_json"));
  o.Check(radar["axes"].size() == 6, "radar has " + std::to_string(radar["axes"].size()) + " axes");

  // Uneven per-template results so every tier matters.
  std::mt19937_64 gen(21);
  std::map<std::pair<std::string, TaskKey>, int> draws;
  auto draw = [&](const std::string& id) {
    return [&, id](const TaskKey& k) {
      auto [it, fresh] = draws.try_emplace({id, k}, 0);
      if (fresh) it->second = static_cast<int>(gen() % 11);
      return it->second;
    };
  };
  std::vector<CapabilityReport> full = {SyntheticReport("p1", draw("p1"), catalog),
                                        SyntheticReport("p2", draw("p2"), catalog),
                                        SyntheticReport("p3", draw("p3"), catalog)};
  const std::set<Tier> no_hard = {Tier::kEasy, Tier::kMedium};
  std::vector<TaskKey> easy_medium = ListTasks(std::nullopt, no_hard);
  std::vector<CapabilityReport> cut;
  for (const auto& r : full) {
    cut.push_back(SyntheticReport(
        r.policy_id, [&](const TaskKey& k) { return draws.at({r.policy_id, k}); }, easy_medium));
  }
  const Json masked = RadarJson(Aggregate(full), no_hard);
  const Json excluded = RadarJson(Aggregate(cut), no_hard);
  o.Check(masked == excluded, "masked radar differs from the Hard-excluded radar");

  // Independent axis values: mean over Easy and Medium of the template mean.
  const std::vector<Family> axes = {Family::kPerception,       Family::kControl,
                                    Family::kLanguage,         Family::kSpatialReasoning,
                                    Family::kDynamicAdaptation, Family::kRobustness};
  double worst = 0.0;
  for (std::size_t p = 0; p < masked["series"].size(); ++p) {
    const Json& s = masked["series"][p];
    const std::string id = s["policy_id"];
    for (std::size_t a = 0; a < axes.size(); ++a) {
      double sum = 0.0;
      for (Tier t : no_hard) {
        double cell = 0.0;
        for (int tid = 1; tid <= 3; ++tid) cell += draws.at({id, TaskKey{axes[a], t, tid}}) / 10.0;
        sum += cell / 3.0;
      }
      worst = std::max(worst, std::abs(s["values"][a].get<double>() - sum / 2.0));
    }
  }
  o.Check(worst < 1e-12, "radar axis values off by " + Fmt(worst));
  if (o.pass) o.detail = "mean 0.6, std 0.1 in all 18 cells; 6 axes; tier mask matches";
  return o;
}

// Criterion 10.
Outcome CheckDeterminism() {
  Outcome o;
  TempDir dir;
  const std::string cli = testing::CliPath();
  for (const char* run : {"a", "b"}) {
    const fs::path root = dir / run;
    const std::string gen = cli +
                            " gen --family Control Language --tier Easy --n 2 --seed 5 --out " +
                            (root / "data").string() + " 2>/dev/null";
    const std::string cap = cli +
                            " run-capability --policy expert --family Control Perception "
                            "--tier Easy --n 2 --seed 5 --record --out " +
                            (root / "cap").string() + " 2>/dev/null";
    o.Check(testing::RunCommand(gen).exit_code == 0, std::string("gen failed in run ") + run);
    o.Check(testing::RunCommand(cap).exit_code == 0,
            std::string("run-capability failed in run ") + run);
  }
  std::map<std::string, std::string> a, b;
  auto collect = [](const fs::path& root, std::map<std::string, std::string>& out) {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file() || e.path().filename() == "run_meta.json") continue;
      out[fs::relative(e.path(), root).string()] = testing::ReadFile(e.path());
    }
  };
  collect(dir / "a", a);
  collect(dir / "b", b);
  int shards = 0;
  for (const auto& [name, bytes] : a) shards += name.ends_with(".shard") ? 1 : 0;
  o.Check(!a.empty() && shards >= 2, "expected shard outputs");
  o.Check(a.size() == b.size(), "different file sets");
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    o.Check(it != b.end() && it->second == bytes, name + " differs between runs");
  }
  if (o.pass) {
    o.detail = std::to_string(a.size()) + " files (" + std::to_string(shards) +
               " shards) byte-identical across two runs";
  }
  return o;
}

struct Criterion {
  const char* name;
  double budget_s;
  Outcome (*check)();
};

}  // namespace
}  // namespace nebula

int main() {
  using nebula::Criterion;
  const Criterion criteria[] = {
      {"stability", 1.0, nebula::CheckStability},
      {"timing", 180.0, nebula::CheckTiming},
      {"adaptability", 120.0, nebula::CheckAdaptability},
      {"capability", 300.0, nebula::CheckCapability},
      {"isolation", 300.0, nebula::CheckIsolation},
      {"controlled-variable", 300.0, nebula::CheckControlledVariable},
      {"storage", 120.0, nebula::CheckStorage},
      {"query-split", 60.0, nebula::CheckQuerySplit},
      {"aggregation", 60.0, nebula::CheckAggregation},
      {"determinism", 300.0, nebula::CheckDeterminism},
  };
  int failures = 0;
  int n = 0;
  for (const Criterion& c : criteria) {
    ++n;
    const auto start = std::chrono::steady_clock::now();
    nebula::Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("threw: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= c.budget_s) {
      out.pass = false;
      out.detail += "; took " + nebula::Fmt(secs) + " s, budget " + nebula::Fmt(c.budget_s) + " s";
    }
    failures += out.pass ? 0 : 1;
    std::printf("%s %2d %-20s %7.2fs  %s\n", out.pass ? "PASS" : "FAIL", n, c.name, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
