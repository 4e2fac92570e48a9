#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace in2test {

enum class Phase { inspection, test };

std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view text);

/// One observed defect.
struct DefectRecord {
  std::string part_id;
  Phase phase = Phase::inspection;
  std::string defect_type;  // empty when unclassified
  std::string severity;     // empty when unrated

  bool operator==(const DefectRecord&) const = default;
};

/// Named numeric metrics for one part. `loc` and `mean_method_length` are
/// understood by the rule language; other names are reachable via metric("...").
struct PartMetrics {
  std::string part_id;
  std::map<std::string, double> entries;

  bool operator==(const PartMetrics&) const = default;
};

struct HistoryRecord {
  std::string part_id;
  std::string release_id;
  long long defect_count = 0;

  bool operator==(const HistoryRecord&) const = default;
};

using CountMap = std::map<std::string, std::size_t>;

struct PartStats {
  std::string part_id;
  std::size_t inspection_defect_content = 0;
  std::size_t test_defect_content = 0;
  CountMap severity_counts;         // inspection phase only
  CountMap inspection_type_counts;
  CountMap test_type_counts;
  std::optional<double> defect_density;  // inspection defects per LoC, only when loc is known
  std::map<std::string, double> metrics;
  // lookback depth (number of most recent releases) -> summed defect count
  std::map<int, long long> history_defects;

  std::optional<double> metric(const std::string& name) const;

  bool operator==(const PartStats&) const = default;
};

/// Per-part statistics, keyed and ordered by part id.
using StatsTable = std::map<std::string, PartStats>;

/// Context factors (e.g. inspector_experience -> low).
struct ContextProfile {
  std::map<std::string, std::string> factors;

  bool operator==(const ContextProfile&) const = default;
};

enum class Derivation { analytic, empirical_adapted, empirical_observed };

std::string_view to_string(Derivation derivation);
Derivation parse_derivation(std::string_view text);

struct Assumption {
  std::string id;
  std::string statement;
  Derivation derivation = Derivation::analytic;

  bool operator==(const Assumption&) const = default;
};

/// Lower-cases and trims a severity or defect-type label.
std::string normalize_label(std::string_view label);

/// Trims ASCII whitespace.
std::string trim(std::string_view text);

/// Rounds half away from zero to `decimals` places, tolerating binary
/// representation error (0.125 -> 0.13, 0.665 -> 0.67).
double round_half_up(double value, int decimals = 2);

/// Fixed 2-decimal rendering after half-up rounding.
std::string format_fixed2(double value);

/// Derives per-part statistics from raw records.
///
/// Every part mentioned in any input gets one row. Throws InputError on
/// duplicate PartMetrics rows, non-finite metric values, non-positive `loc`,
/// negative history counts, duplicate (part, release) history rows or empty
/// part ids.
StatsTable compute_part_stats(std::span<const DefectRecord> defects,
                              std::span<const PartMetrics> metrics,
                              std::span<const HistoryRecord> history);

}  // namespace in2test
