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

#include "nebula/query.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "nebula/error.h"
#include "nebula/rng.h"

namespace nebula {
namespace {

bool IsNonNegativeInteger(const Json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void Malformed(const std::string& why) {
  throw Error(ErrorCode::kMalformedQuery, why);
}

template <typename T, typename Parse>
std::set<T> ParseSet(const Json& v, Parse parse, const char* what) {
  std::set<T> out;
  auto one = [&](const Json& x) {
    if (!x.is_string()) Malformed(std::string(what) + " must be a string");
    auto p = parse(x.template get<std::string>());
    if (!p) Malformed(std::string("unknown ") + what + " " + x.dump());
    out.insert(*p);
  };
  if (v.is_array()) {
    for (const auto& x : v) one(x);
  } else {
    one(v);
  }
  return out;
}

}  // namespace

bool QueryExpr::Matches(const EpisodeSummary& e) const {
  if (families && !families->contains(e.task_meta.family)) return false;
  if (tiers && !tiers->contains(e.task_meta.tier)) return false;
  if (final_success && (e.final_success == 1) != *final_success) return false;
  if (step_count &&
      (e.step_count < step_count->first || e.step_count > step_count->second)) {
    return false;
  }
  if (template_ids && !template_ids->contains(e.task_meta.template_id)) return false;
  if (instruction_contains &&
      Lower(e.instruction).find(Lower(*instruction_contains)) == std::string::npos) {
    return false;
  }
  return true;
}

void QueryExpr::Check() const {
  if (step_count && step_count->first > step_count->second) {
    Malformed("step_count range has lo > hi");
  }
}

Query& Query::Family(nebula::Family f) {
  if (!expr_.families) expr_.families.emplace();
  expr_.families->insert(f);
  return *this;
}
Query& Query::Tier(nebula::Tier t) {
  if (!expr_.tiers) expr_.tiers.emplace();
  expr_.tiers->insert(t);
  return *this;
}
Query& Query::Success(bool s) {
  expr_.final_success = s;
  return *this;
}
Query& Query::Steps(std::uint64_t lo, std::uint64_t hi) {
  expr_.step_count = {lo, hi};
  return *this;
}
Query& Query::InstructionContains(std::string text) {
  expr_.instruction_contains = std::move(text);
  return *this;
}
Query& Query::Template(int template_id) {
  if (!expr_.template_ids) expr_.template_ids.emplace();
  expr_.template_ids->insert(template_id);
  return *this;
}

QueryExpr ParseQuery(const Json& j) {
  if (!j.is_object()) Malformed("query must be a JSON object");
  QueryExpr q;
  for (const auto& [key, v] : j.items()) {
    if (key == "family") {
      q.families = ParseSet<Family>(v, ParseFamily, "family");
    } else if (key == "tier") {
      q.tiers = ParseSet<Tier>(v, ParseTier, "tier");
    } else if (key == "final_success") {
      if (v.is_boolean()) {
        q.final_success = v.get<bool>();
      } else if (v.is_number_integer() && (v == 0 || v == 1)) {
        q.final_success = v.get<int>() == 1;
      } else {
        Malformed("final_success must be 0, 1, true or false");
      }
    } else if (key == "step_count") {
      if (!v.is_array() || v.size() != 2 || !IsNonNegativeInteger(v[0]) ||
          !IsNonNegativeInteger(v[1])) {
        Malformed("step_count must be [lo, hi] of nonnegative integers");
      }
      q.step_count = {v[0].get<std::uint64_t>(), v[1].get<std::uint64_t>()};
    } else if (key == "instruction_contains") {
      if (!v.is_string()) Malformed("instruction_contains must be a string");
      q.instruction_contains = v.get<std::string>();
    } else if (key == "template_id") {
      std::set<int> ids;
      auto one = [&](const Json& x) {
        if (!x.is_number_integer()) Malformed("template_id must be an integer");
        ids.insert(x.get<int>());
      };
      if (v.is_array()) {
        for (const auto& x : v) one(x);
      } else {
        one(v);
      }
      q.template_ids = std::move(ids);
    } else {
      Malformed("unknown query key '" + key + "'");
    }
  }
  q.Check();
  return q;
}

Json QueryToJson(const QueryExpr& q) {
  Json j = Json::object();
  if (q.families) {
    Json a = Json::array();
    for (Family f : *q.families) a.push_back(FamilyName(f));
    j["family"] = a;
  }
  if (q.tiers) {
    Json a = Json::array();
    for (Tier t : *q.tiers) a.push_back(TierName(t));
    j["tier"] = a;
  }
  if (q.final_success) j["final_success"] = *q.final_success ? 1 : 0;
  if (q.step_count) j["step_count"] = {q.step_count->first, q.step_count->second};
  if (q.instruction_contains) j["instruction_contains"] = *q.instruction_contains;
  if (q.template_ids) j["template_id"] = *q.template_ids;
  return j;
}

const EpisodeSummary& Lookup(const Manifest& m, const EpisodeRef& ref) {
  if (ref.shard >= m.shards.size() || ref.index >= m.shards[ref.shard].episodes.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "episode ref outside manifest");
  }
  return m.shards[ref.shard].episodes[ref.index];
}

std::vector<EpisodeRef> Filter(const Manifest& dataset, const QueryExpr& q) {
  q.Check();
  std::vector<EpisodeRef> out;
  for (std::uint32_t s = 0; s < dataset.shards.size(); ++s) {
    const auto& eps = dataset.shards[s].episodes;
    for (std::uint64_t i = 0; i < eps.size(); ++i) {
      if (q.Matches(eps[i])) out.push_back({s, i});
    }
  }
  return out;
}

Split StratifiedSplit(const Manifest& dataset, const SplitSpec& spec) {
  if (!(spec.train_ratio >= 0.0 && spec.train_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_ratio must lie in [0, 1]");
  }
  std::map<std::pair<Family, int>, std::vector<EpisodeRef>> strata;
  for (const EpisodeRef& ref : Filter(dataset, QueryExpr{})) {
    const TaskMeta& m = Lookup(dataset, ref).task_meta;
    const int tier = spec.strata_key == StrataKey::kFamilyTier
                         ? static_cast<int>(m.tier)
                         : -1;
    strata[{m.family, tier}].push_back(ref);
  }
  if (strata.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no episodes");

  Split split;
  for (auto& [key, refs] : strata) {
    if (spec.holdout_robustness && key.first == Family::kRobustness) {
      split.test.insert(split.test.end(), refs.begin(), refs.end());
      continue;
    }
    // Each stratum gets its own stream so adding a family elsewhere does
    // not reshuffle this one.
    const std::uint64_t stratum_seed =
        Mix64(spec.seed ^ Mix64((static_cast<std::uint64_t>(key.first) << 8) |
                                static_cast<std::uint64_t>(key.second + 1)));
    Rng rng(stratum_seed);
    std::vector<EpisodeRef> shuffled = refs;
    rng.Shuffle(shuffled);
    const auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(refs.size()) * spec.train_ratio + 0.5));
    split.train.insert(split.train.end(), shuffled.begin(),
                       shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(),
                      shuffled.begin() + static_cast<std::ptrdiff_t>(n_train),
                      shuffled.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace nebula
