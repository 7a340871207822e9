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

// Cross-policy aggregation of capability reports and stress records, and
// their json / csv / radar_json exports.
//
// Each (family, tier) cell holds the mean and population standard
// deviation (divisor N) of the per-policy family-tier means. A policy with
// no run episodes in a cell is listed as missing for it and left out of
// the statistics; nothing is imputed.

#ifndef NEBULA_REPORT_H_
#define NEBULA_REPORT_H_

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nebula/capability.h"
#include "nebula/stress.h"

namespace nebula {

// Radar axis order.
inline constexpr std::array<Family, 6> kRadarAxes = {
    Family::kPerception,       Family::kControl,          Family::kLanguage,
    Family::kSpatialReasoning, Family::kDynamicAdaptation, Family::kRobustness,
};
std::string_view RadarAxisName(Family f);  // "Perception", ..., "Dynamic", ...

struct AggregateCell {
  Family family = Family::kControl;
  Tier tier = Tier::kEasy;
  int count = 0;  // contributing policies
  std::optional<double> mean;
  std::optional<double> std;
  std::vector<std::string> missing_policies;

  bool missing() const { return count == 0; }
  bool operator==(const AggregateCell&) const = default;
};

struct EvalReport {
  std::vector<TaskKey> catalog;
  std::vector<CapabilityReport> policies;  // sorted by policy_id
  std::vector<MetricRecord> metrics;       // input order
  std::vector<AggregateCell> cells;        // all 18, family then tier order
};

// Throws kCatalogMismatch when the reports cover different templates or
// share a policy_id.
EvalReport Aggregate(std::vector<CapabilityReport> reports,
                     std::vector<MetricRecord> metrics = {});

const AggregateCell& CellOf(const EvalReport& r, Family f, Tier t);

// Family-tier mean of one policy; nullopt when it ran no episodes there.
std::optional<double> PolicyCellMean(const CapabilityReport& r, Family f, Tier t);

enum class ExportFormat : std::uint8_t { kJson, kCsv, kRadarJson };
// Throws kUnknownFormat.
ExportFormat ParseExportFormat(std::string_view name);

// `tiers` masks the radar view; json and csv ignore it.
std::string Export(const EvalReport& r, ExportFormat format,
                   const std::set<Tier>& tiers = {Tier::kEasy, Tier::kMedium, Tier::kHard});
std::string Export(const EvalReport& r, std::string_view format,
                   const std::set<Tier>& tiers = {Tier::kEasy, Tier::kMedium, Tier::kHard});

Json EvalReportToJson(const EvalReport& r);
Json RadarJson(const EvalReport& r, const std::set<Tier>& tiers);
// Inverse of the json export.
EvalReport EvalReportFromJson(const Json& j);

bool SameEvalReport(const EvalReport& a, const EvalReport& b);

}  // namespace nebula

#endif  // NEBULA_REPORT_H_
