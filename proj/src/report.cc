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

#include "nebula/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "nebula/error.h"
#include "nebula/json_io.h"

namespace nebula {
namespace {

struct Stats {
  int count = 0;
  double mean = 0.0;
  double std = 0.0;
};

Stats MeanStd(const std::vector<double>& xs) {
  Stats s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / xs.size());
  return s;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// RFC 4180 quoting for fields holding separators or quotes.
std::string CsvField(const std::string& v) {
  if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json OptionalJson(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> OptionalFromJson(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

// Unweighted mean of a policy's family-tier means over the masked tiers.
std::optional<double> AxisValue(const CapabilityReport& r, Family f, const std::set<Tier>& tiers) {
  std::vector<double> xs;
  for (Tier t : tiers) {
    if (auto m = PolicyCellMean(r, f, t)) xs.push_back(*m);
  }
  if (xs.empty()) return std::nullopt;
  return MeanStd(xs).mean;
}

}  // namespace

std::string_view RadarAxisName(Family f) {
  switch (f) {
    case Family::kDynamicAdaptation: return "Dynamic";
    case Family::kSpatialReasoning: return "Spatial";
    default: return FamilyName(f);
  }
}

std::optional<double> PolicyCellMean(const CapabilityReport& r, Family f, Tier t) {
  std::vector<double> rates;
  for (const auto& tr : r.templates) {
    if (tr.key.family == f && tr.key.tier == t && tr.episodes > 0) rates.push_back(tr.rate());
  }
  if (rates.empty()) return std::nullopt;
  return MeanStd(rates).mean;
}

EvalReport Aggregate(std::vector<CapabilityReport> reports, std::vector<MetricRecord> metrics) {
  EvalReport out;
  std::sort(reports.begin(), reports.end(),
            [](const CapabilityReport& a, const CapabilityReport& b) {
              return a.policy_id < b.policy_id;
            });
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].policy_id == reports[i - 1].policy_id) {
      throw Error(ErrorCode::kCatalogMismatch,
                  "policy '" + reports[i].policy_id + "' appears more than once");
    }
  }
  if (!reports.empty()) {
    out.catalog = reports.front().catalog();
    std::sort(out.catalog.begin(), out.catalog.end());
    for (const auto& r : reports) {
      std::vector<TaskKey> keys = r.catalog();
      std::sort(keys.begin(), keys.end());
      if (keys != out.catalog) {
        throw Error(ErrorCode::kCatalogMismatch, "report of '" + r.policy_id + "' covers " +
                                                     std::to_string(keys.size()) +
                                                     " templates that differ from '" +
                                                     reports.front().policy_id + "'");
      }
    }
  }
  for (Family f : kAllFamilies) {
    for (Tier t : kAllTiers) {
      AggregateCell cell;
      cell.family = f;
      cell.tier = t;
      std::vector<double> xs;
      for (const auto& r : reports) {
        if (auto m = PolicyCellMean(r, f, t)) {
          xs.push_back(*m);
        } else {
          cell.missing_policies.push_back(r.policy_id);
        }
      }
      if (!xs.empty()) {
        const Stats s = MeanStd(xs);
        cell.count = s.count;
        cell.mean = s.mean;
        cell.std = s.std;
      }
      out.cells.push_back(std::move(cell));
    }
  }
  out.policies = std::move(reports);
  out.metrics = std::move(metrics);
  return out;
}

const AggregateCell& CellOf(const EvalReport& r, Family f, Tier t) {
  for (const auto& c : r.cells) {
    if (c.family == f && c.tier == t) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "report has no cell for the family and tier");
}

ExportFormat ParseExportFormat(std::string_view name) {
  if (name == "json") return ExportFormat::kJson;
  if (name == "csv") return ExportFormat::kCsv;
  if (name == "radar_json") return ExportFormat::kRadarJson;
  throw Error(ErrorCode::kUnknownFormat, "unknown export format '" + std::string(name) + "'");
}

Json EvalReportToJson(const EvalReport& r) {
  Json catalog = Json::array();
  for (const auto& k : r.catalog) catalog.push_back(TaskKeyName(k));
  Json policies = Json::array();
  for (const auto& p : r.policies) policies.push_back(CapabilityReportToJson(p));
  Json metrics = Json::array();
  for (const auto& m : r.metrics) metrics.push_back(MetricRecordToJson(m));
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"family", FamilyName(c.family)},
                     {"tier", TierName(c.tier)},
                     {"count", c.count},
                     {"mean", OptionalJson(c.mean)},
                     {"std", OptionalJson(c.std)},
                     {"missing", c.missing()},
                     {"missing_policies", c.missing_policies}});
  }
  return {{"std_divisor", "N"},
          {"catalog", std::move(catalog)},
          {"policies", std::move(policies)},
          {"metrics", std::move(metrics)},
          {"aggregate", std::move(cells)}};
}

EvalReport EvalReportFromJson(const Json& j) {
  try {
    EvalReport r;
    for (const Json& p : j.at("policies")) r.policies.push_back(CapabilityReportFromJson(p));
    for (const Json& m : j.at("metrics")) r.metrics.push_back(MetricRecordFromJson(m));
    if (!r.policies.empty()) {
      r.catalog = r.policies.front().catalog();
      std::sort(r.catalog.begin(), r.catalog.end());
    }
    for (const Json& c : j.at("aggregate")) {
      AggregateCell cell;
      cell.family = FamilyFromJson(c.at("family"));
      cell.tier = TierFromJson(c.at("tier"));
      cell.count = c.at("count").get<int>();
      cell.mean = OptionalFromJson(c.at("mean"));
      cell.std = OptionalFromJson(c.at("std"));
      cell.missing_policies = c.at("missing_policies").get<std::vector<std::string>>();
      r.cells.push_back(std::move(cell));
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad evaluation report: ") + e.what());
  }
}

Json RadarJson(const EvalReport& r, const std::set<Tier>& tiers) {
  Json axes = Json::array();
  for (Family f : kRadarAxes) axes.push_back(RadarAxisName(f));
  Json tier_names = Json::array();
  for (Tier t : tiers) tier_names.push_back(TierName(t));

  Json series = Json::array();
  std::array<std::vector<double>, kRadarAxes.size()> per_axis;
  for (const auto& p : r.policies) {
    Json values = Json::array();
    for (std::size_t a = 0; a < kRadarAxes.size(); ++a) {
      const auto v = AxisValue(p, kRadarAxes[a], tiers);
      if (v) per_axis[a].push_back(*v);
      values.push_back(OptionalJson(v));
    }
    Json by_tier = Json::object();
    for (Tier t : tiers) {
      Json tv = Json::array();
      for (Family f : kRadarAxes) tv.push_back(OptionalJson(PolicyCellMean(p, f, t)));
      by_tier[std::string(TierName(t))] = std::move(tv);
    }
    series.push_back(
        {{"policy_id", p.policy_id}, {"values", std::move(values)}, {"by_tier", std::move(by_tier)}});
  }
  Json mean = Json::array(), std = Json::array(), count = Json::array();
  for (const auto& xs : per_axis) {
    const Stats s = MeanStd(xs);
    mean.push_back(xs.empty() ? Json(nullptr) : Json(s.mean));
    std.push_back(xs.empty() ? Json(nullptr) : Json(s.std));
    count.push_back(s.count);
  }
  return {{"version", 1},
          {"axes", std::move(axes)},
          {"tiers", std::move(tier_names)},
          {"series", std::move(series)},
          {"aggregate", {{"mean", std::move(mean)}, {"std", std::move(std)}, {"count", std::move(count)}}}};
}

std::string Export(const EvalReport& r, ExportFormat format, const std::set<Tier>& tiers) {
  switch (format) {
    case ExportFormat::kJson:
      return EvalReportToJson(r).dump(2) + "\n";
    case ExportFormat::kRadarJson:
      return RadarJson(r, tiers).dump(2) + "\n";
    case ExportFormat::kCsv: {
      std::string out = "policy_id,family,tier,template_id,episodes,successes,rate\n";
      for (const auto& p : r.policies) {
        for (const auto& t : p.templates) {
          out += CsvField(p.policy_id);
          out += ',';
          out += FamilyName(t.key.family);
          out += ',';
          out += TierName(t.key.tier);
          out += ',' + std::to_string(t.key.template_id) + ',' + std::to_string(t.episodes) + ',' +
                 std::to_string(t.successes) + ',' + FormatDouble(t.rate()) + '\n';
        }
      }
      return out;
    }
  }
  throw Error(ErrorCode::kUnknownFormat, "unknown export format");
}

std::string Export(const EvalReport& r, std::string_view format, const std::set<Tier>& tiers) {
  return Export(r, ParseExportFormat(format), tiers);
}

bool SameEvalReport(const EvalReport& a, const EvalReport& b) {
  return EvalReportToJson(a) == EvalReportToJson(b);
}

}  // namespace nebula
