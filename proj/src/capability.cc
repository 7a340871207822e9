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

#include "nebula/capability.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>

#include "nebula/error.h"
#include "nebula/json_io.h"
#include "nebula/success.h"

namespace nebula {
namespace {

// Runs job(i) for i in [0, count) on up to `workers` threads. The first
// exception thrown by a job is rethrown after all threads have joined.
void ParallelFor(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Hands items to a sink in index order as they complete out of order.
template <typename T>
class OrderedSink {
 public:
  explicit OrderedSink(std::function<void(const T&)> sink) : sink_(std::move(sink)) {}

  void Put(std::size_t index, T item) {
    std::lock_guard<std::mutex> lock(mu_);
    pending_.emplace(index, std::move(item));
    for (auto it = pending_.find(next_); it != pending_.end(); it = pending_.find(next_)) {
      sink_(it->second);
      pending_.erase(it);
      ++next_;
    }
  }

 private:
  std::function<void(const T&)> sink_;
  std::mutex mu_;
  std::map<std::size_t, T> pending_;
  std::size_t next_ = 0;
};

Json TaskKeyJson(const TaskKey& k) {
  return {{"family", FamilyName(k.family)},
          {"tier", TierName(k.tier)},
          {"template_id", k.template_id}};
}

TaskKey TaskKeyFromJson(const Json& j) {
  return {FamilyFromJson(j.at("family")), TierFromJson(j.at("tier")),
          j.at("template_id").get<int>()};
}

}  // namespace

std::string EpisodeId(const TaskSpec& spec) {
  return std::string(FamilyName(spec.family)) + "-" + std::string(TierName(spec.tier)) + "-" +
         std::to_string(spec.template_id) + "-s" + std::to_string(spec.seed) + "-" +
         spec.meta().variant_tag;
}

EpisodeResult RunEpisode(PolicyHandle& policy, const GeneratedTask& task,
                         const EpisodeOptions& options) {
  const TaskSpec& spec = task.spec;
  const int max_steps = options.max_steps > 0 ? options.max_steps : spec.max_steps;
  ObservationOptions obs_options;
  obs_options.render = options.record;
  obs_options.image_size = options.image_size;
  obs_options.camera_mask = options.camera_mask;

  EpisodeResult result;
  std::optional<Episode> record;
  if (options.record) {
    record.emplace();
    record->episode_id = EpisodeId(spec);
    record->instruction = spec.instruction;
    record->embodiment = task.scene.embodiment;
    record->task_meta = spec.meta();
  }

  SuccessTracker tracker(spec);
  SceneState scene = task.scene;
  bool success = tracker.Observe(scene);
  if (options.keep_trajectory) result.trajectory.push_back(scene);
  std::string instruction = scene.active_instruction;

  try {
    policy.Reset(instruction, scene.embodiment);
    // Bridge policies only know whether they want pixels after the handshake.
    obs_options.render = options.record || policy.policy().needs_images();
    for (int k = 0; k < max_steps; ++k) {
      if (success && scene.event_queue.empty()) break;
      policy.OnPrivilegedState(scene);
      if (scene.active_instruction != instruction) {
        instruction = scene.active_instruction;
        policy.OnInstruction(instruction);
      }
      Observation obs = MakeObservation(scene, obs_options);
      Action action = policy.Act(obs);
      scene = StepScene(scene, action);
      success = tracker.Observe(scene);
      ++result.steps;
      if (options.keep_trajectory) {
        result.trajectory.push_back(scene);
        result.actions.push_back(action);
      }
      if (record) {
        Step step;
        step.index = k;
        step.observation = std::move(obs);
        step.action = std::move(action);
        step.success = success ? 1 : 0;
        record->steps.push_back(std::move(step));
      }
    }
  } catch (const Error& e) {
    result.failure_cause = e.what();
    success = false;
    spdlog::warn("episode {} failed: {}", EpisodeId(spec), e.what());
    if (record) {
      // Close the record with a failed terminal step at the current state.
      Step step;
      step.index = static_cast<std::int64_t>(record->steps.size());
      step.observation = MakeObservation(scene, obs_options);
      step.action.values.assign(scene.q.size() + 1, 0.0);  // joints plus gripper
      step.success = 0;
      record->steps.push_back(std::move(step));
    }
  }

  result.success = success;
  if (record) {
    if (record->steps.empty()) {
      // Solved before acting: keep one no-op step so the record is valid.
      Step step;
      step.observation = MakeObservation(scene, obs_options);
      step.action.values.assign(scene.q.size() + 1, 0.0);  // joints plus gripper
      step.success = success ? 1 : 0;
      record->steps.push_back(std::move(step));
    }
    record->final_success = record->steps.back().success;
    result.episode = std::move(record);
  }
  return result;
}

std::vector<TaskKey> CapabilityReport::catalog() const {
  std::vector<TaskKey> keys;
  for (const auto& t : templates) keys.push_back(t.key);
  return keys;
}

std::optional<double> CapabilityReport::FamilyTierMean(Family f, Tier t) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : templates) {
    if (r.key.family == f && r.key.tier == t) {
      sum += r.rate();
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

const TemplateResult* CapabilityReport::Find(const TaskKey& k) const {
  for (const auto& t : templates) {
    if (t.key == k) return &t;
  }
  return nullptr;
}

CapabilityReport RunCapabilitySuite(const PolicyFactory& factory,
                                    const CapabilityOptions& options) {
  if (options.episodes_per_task < 1) {
    throw Error(ErrorCode::kInvalidArgument, "episodes_per_task must be >= 1");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = static_cast<std::size_t>(options.episodes_per_task);
  const std::size_t jobs = options.tasks.size() * n;

  struct Outcome {
    bool success = false;
    std::string cause;
  };
  std::vector<Outcome> outcomes(jobs);
  std::optional<OrderedSink<Episode>> sink;
  if (options.episode.record && options.on_record) sink.emplace(options.on_record);

  CapabilityReport report;
  report.seed = options.seed;
  report.episodes_per_task = options.episodes_per_task;
  report.entangled = options.entangled;
  {
    auto probe = factory();
    report.policy_id = probe->id();
  }

  ParallelFor(jobs, options.workers, [&](std::size_t i) {
    const TaskKey& key = options.tasks[i / n];
    const std::uint64_t seed = options.seed + i % n;
    TaskOptions task_options = options.task_options;
    task_options.probe_variant.reset();
    task_options.entangled = options.entangled && key.family == Family::kPerception;
    const GeneratedTask task = GenerateTask(key, seed, task_options);
    PolicyHandle handle(factory());
    EpisodeResult r = RunEpisode(handle, task, options.episode);
    outcomes[i] = {r.success, r.failure_cause};
    if (sink) sink->Put(i, std::move(*r.episode));
  });

  for (std::size_t t = 0; t < options.tasks.size(); ++t) {
    TemplateResult tr;
    tr.key = options.tasks[t];
    for (std::size_t s = 0; s < n; ++s) {
      const Outcome& o = outcomes[t * n + s];
      ++tr.episodes;
      tr.successes += o.success ? 1 : 0;
      if (!o.cause.empty()) tr.errors.emplace_back(options.seed + s, o.cause);
    }
    report.templates.push_back(std::move(tr));
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

int AblationReport::implication_violations() const {
  int total = 0;
  for (const auto& r : rows) total += r.implication_violations;
  return total;
}

AblationReport RunIsolationAblation(const PolicyFactory& factory, const std::set<Tier>& tiers,
                                    int episodes_per_task, std::uint64_t seed, int workers) {
  if (episodes_per_task < 1) {
    throw Error(ErrorCode::kInvalidArgument, "episodes_per_task must be >= 1");
  }
  const std::vector<TaskKey> keys = ListTasks(std::set<Family>{Family::kPerception}, tiers);
  const std::size_t n = static_cast<std::size_t>(episodes_per_task);

  struct Outcome {
    bool isolated = false;
    bool entangled = false;
    int violations = 0;
  };
  std::vector<Outcome> outcomes(keys.size() * n);

  AblationReport report;
  report.policy_id = factory()->id();
  report.seed = seed;
  report.episodes_per_task = episodes_per_task;

  ParallelFor(outcomes.size(), workers, [&](std::size_t i) {
    const TaskKey& key = keys[i / n];
    const std::uint64_t s = seed + i % n;
    TaskOptions iso_options;
    TaskOptions ent_options;
    ent_options.entangled = true;
    const GeneratedTask iso = GenerateTask(key, s, iso_options);
    const GeneratedTask ent = GenerateTask(key, s, ent_options);
    EpisodeOptions eo;
    eo.keep_trajectory = true;

    Outcome out;
    for (const GeneratedTask* task : {&iso, &ent}) {
      PolicyHandle handle(factory());
      const EpisodeResult r = RunEpisode(handle, *task, eo);
      (task == &iso ? out.isolated : out.entangled) = r.success;
      // Score the same trajectory under both predicates.
      const bool iso_label = EvaluateSuccess(iso.spec, r.trajectory);
      const bool ent_label = EvaluateSuccess(ent.spec, r.trajectory);
      if (ent_label && !iso_label) ++out.violations;
    }
    outcomes[i] = out;
  });

  for (std::size_t t = 0; t < keys.size(); ++t) {
    AblationRow row;
    row.key = keys[t];
    for (std::size_t s = 0; s < n; ++s) {
      const Outcome& o = outcomes[t * n + s];
      ++row.episodes;
      row.isolated_successes += o.isolated ? 1 : 0;
      row.entangled_successes += o.entangled ? 1 : 0;
      row.implication_violations += o.violations;
    }
    report.rows.push_back(row);
  }
  return report;
}

Json CapabilityReportToJson(const CapabilityReport& r) {
  Json templates = Json::array();
  for (const auto& t : r.templates) {
    Json row = TaskKeyJson(t.key);
    row["episodes"] = t.episodes;
    row["successes"] = t.successes;
    row["success_rate"] = t.rate();
    Json errors = Json::array();
    for (const auto& [seed, cause] : t.errors) errors.push_back({{"seed", seed}, {"cause", cause}});
    row["errors"] = std::move(errors);
    templates.push_back(std::move(row));
  }
  Json family_tier = Json::array();
  for (Family f : kAllFamilies) {
    for (Tier t : kAllTiers) {
      const auto mean = r.FamilyTierMean(f, t);
      if (!mean) continue;
      family_tier.push_back({{"family", FamilyName(f)}, {"tier", TierName(t)}, {"mean", *mean}});
    }
  }
  return {{"policy_id", r.policy_id},
          {"seed", r.seed},
          {"episodes_per_task", r.episodes_per_task},
          {"entangled", r.entangled},
          {"templates", std::move(templates)},
          {"family_tier", std::move(family_tier)}};
}

CapabilityReport CapabilityReportFromJson(const Json& j) {
  try {
    CapabilityReport r;
    r.policy_id = j.at("policy_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.episodes_per_task = j.at("episodes_per_task").get<int>();
    r.entangled = j.value("entangled", false);
    for (const Json& row : j.at("templates")) {
      TemplateResult t;
      t.key = TaskKeyFromJson(row);
      t.episodes = row.at("episodes").get<int>();
      t.successes = row.at("successes").get<int>();
      if (t.episodes < 0 || t.successes < 0 || t.successes > t.episodes) {
        throw Error(ErrorCode::kInvalidArgument,
                    "inconsistent counts for " + TaskKeyName(t.key));
      }
      for (const Json& e : row.value("errors", Json::array())) {
        t.errors.emplace_back(e.at("seed").get<std::uint64_t>(), e.at("cause").get<std::string>());
      }
      r.templates.push_back(std::move(t));
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad capability report: ") + e.what());
  }
}

Json AblationReportToJson(const AblationReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json j = TaskKeyJson(row.key);
    j["episodes"] = row.episodes;
    j["isolated_successes"] = row.isolated_successes;
    j["entangled_successes"] = row.entangled_successes;
    j["isolated_rate"] = static_cast<double>(row.isolated_successes) / row.episodes;
    j["entangled_rate"] = static_cast<double>(row.entangled_successes) / row.episodes;
    j["implication_violations"] = row.implication_violations;
    rows.push_back(std::move(j));
  }
  return {{"policy_id", r.policy_id},
          {"seed", r.seed},
          {"episodes_per_task", r.episodes_per_task},
          {"rows", std::move(rows)},
          {"implication_violations", r.implication_violations()}};
}

}  // namespace nebula
