#include "in2test/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "in2test/error.hpp"

namespace in2test {

std::string_view to_string(Phase phase) {
  return phase == Phase::inspection ? "inspection" : "test";
}

Phase parse_phase(std::string_view text) {
  const std::string label = normalize_label(text);
  if (label == "inspection") return Phase::inspection;
  if (label == "test") return Phase::test;
  throw InputError("unknown phase '" + std::string(text) + "' (expected inspection or test)");
}

std::string_view to_string(Derivation derivation) {
  switch (derivation) {
    case Derivation::analytic:
      return "analytic";
    case Derivation::empirical_adapted:
      return "empirical_adapted";
    case Derivation::empirical_observed:
      return "empirical_observed";
  }
  return "analytic";
}

Derivation parse_derivation(std::string_view text) {
  const std::string label = normalize_label(text);
  if (label == "analytic") return Derivation::analytic;
  if (label == "empirical_adapted") return Derivation::empirical_adapted;
  if (label == "empirical_observed") return Derivation::empirical_observed;
  throw InputError("unknown assumption derivation '" + std::string(text) + "'");
}

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return std::string(text);
}

std::string normalize_label(std::string_view label) {
  std::string out = trim(label);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = std::fabs(value) * scale;
  // Nudge by a few ulps so that decimal ties stored slightly below the tie
  // (0.665 is 0.66499999...) still round up.
  const double rounded = std::floor(scaled * (1.0 + 4 * 2.220446049250313e-16) + 0.5) / scale;
  return std::copysign(rounded, value);
}

std::string format_fixed2(double value) {
  char buf[64];
  double r = round_half_up(value, 2);
  if (r == 0.0) r = 0.0;  // no "-0.00"
  std::snprintf(buf, sizeof buf, "%.2f", r);
  return buf;
}

std::optional<double> PartStats::metric(const std::string& name) const {
  auto it = metrics.find(name);
  if (it == metrics.end()) return std::nullopt;
  return it->second;
}

StatsTable compute_part_stats(std::span<const DefectRecord> defects,
                              std::span<const PartMetrics> metrics,
                              std::span<const HistoryRecord> history) {
  StatsTable table;
  auto row = [&table](const std::string& raw_id) -> PartStats& {
    std::string id = trim(raw_id);
    if (id.empty()) throw InputError("empty part_id");
    auto [it, inserted] = table.try_emplace(id);
    if (inserted) it->second.part_id = id;
    return it->second;
  };

  std::set<std::string> seen_metrics;
  for (const PartMetrics& m : metrics) {
    PartStats& stats = row(m.part_id);
    if (!seen_metrics.insert(stats.part_id).second) {
      throw InputError("duplicate metrics for part '" + stats.part_id + "'");
    }
    for (const auto& [name, value] : m.entries) {
      if (!std::isfinite(value)) {
        throw InputError("metric '" + name + "' of part '" + stats.part_id + "' is not finite");
      }
      if (name == "loc" && value <= 0) {
        throw InputError("loc of part '" + stats.part_id + "' must be positive");
      }
    }
    stats.metrics = m.entries;
  }

  for (const DefectRecord& d : defects) {
    PartStats& stats = row(d.part_id);
    const std::string type = normalize_label(d.defect_type);
    if (d.phase == Phase::inspection) {
      ++stats.inspection_defect_content;
      const std::string severity = normalize_label(d.severity);
      if (!severity.empty()) ++stats.severity_counts[severity];
      if (!type.empty()) ++stats.inspection_type_counts[type];
    } else {
      ++stats.test_defect_content;
      if (!type.empty()) ++stats.test_type_counts[type];
    }
  }

  std::set<std::string, std::greater<>> releases;
  std::map<std::string, std::map<std::string, long long>> per_part;
  for (const HistoryRecord& h : history) {
    PartStats& stats = row(h.part_id);
    if (h.defect_count < 0) {
      throw InputError("negative defect_count for part '" + stats.part_id + "'");
    }
    const std::string release = trim(h.release_id);
    if (release.empty()) throw InputError("empty release_id for part '" + stats.part_id + "'");
    auto [it, inserted] = per_part[stats.part_id].emplace(release, h.defect_count);
    if (!inserted) {
      throw InputError("duplicate history row for part '" + stats.part_id + "', release '" +
                       release + "'");
    }
    releases.insert(release);
  }

  for (auto& [id, stats] : table) {
    if (auto loc = stats.metric("loc")) {
      stats.defect_density = static_cast<double>(stats.inspection_defect_content) / *loc;
    }
    auto it = per_part.find(id);
    if (it == per_part.end()) continue;
    long long sum = 0;
    int depth = 0;
    for (const std::string& release : releases) {  // most recent first
      auto hit = it->second.find(release);
      if (hit != it->second.end()) sum += hit->second;
      stats.history_defects[++depth] = sum;
    }
  }
  return table;
}

}  // namespace in2test
