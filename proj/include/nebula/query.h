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

#ifndef NEBULA_QUERY_H_
#define NEBULA_QUERY_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nebula/json_io.h"
#include "nebula/storage.h"

namespace nebula {

// Conjunction of optional atoms; an empty query matches everything.
struct QueryExpr {
  std::optional<std::set<Family>> families;
  std::optional<std::set<Tier>> tiers;
  std::optional<bool> final_success;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> step_count;  // [lo, hi]
  std::optional<std::string> instruction_contains;  // case-insensitive
  std::optional<std::set<int>> template_ids;

  bool Matches(const EpisodeSummary& e) const;
  // Fails with kMalformedQuery if lo > hi.
  void Check() const;
};

// Fluent construction: Query().Family(Family::kControl).Success(true)...
class Query {
 public:
  Query& Family(nebula::Family f);
  Query& Tier(nebula::Tier t);
  Query& Success(bool s);
  Query& Steps(std::uint64_t lo, std::uint64_t hi);
  Query& InstructionContains(std::string text);
  Query& Template(int template_id);

  const QueryExpr& expr() const { return expr_; }
  operator const QueryExpr&() const { return expr_; }  // NOLINT

 private:
  QueryExpr expr_;
};

// {"family": "Control" | [...], "tier": ..., "final_success": 0|1|bool,
//  "step_count": [lo, hi], "instruction_contains": "...",
//  "template_id": 1 | [...]}. Unknown keys and bad values are kMalformedQuery.
QueryExpr ParseQuery(const Json& j);
Json QueryToJson(const QueryExpr& q);

struct EpisodeRef {
  std::uint32_t shard = 0;
  std::uint64_t index = 0;

  auto operator<=>(const EpisodeRef&) const = default;
};

const EpisodeSummary& Lookup(const Manifest& m, const EpisodeRef& ref);

// Matching refs in (shard, index) manifest order.
std::vector<EpisodeRef> Filter(const Manifest& dataset, const QueryExpr& q);

enum class StrataKey { kFamily, kFamilyTier };

struct SplitSpec {
  double train_ratio = 0.8;
  StrataKey strata_key = StrataKey::kFamily;
  std::uint64_t seed = 0;
  // Sends every Robustness episode to test; that family is evaluation-only.
  bool holdout_robustness = false;
};

struct Split {
  std::vector<EpisodeRef> train;  // manifest order
  std::vector<EpisodeRef> test;
};

// Per stratum of size n, round-half-up(n * ratio) episodes go to train,
// picked by a seeded Fisher-Yates shuffle of the stratum's refs.
Split StratifiedSplit(const Manifest& dataset, const SplitSpec& spec);

}  // namespace nebula

#endif  // NEBULA_QUERY_H_
