#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "in2test/core_model.hpp"

namespace in2test {

struct Bounds {
  double min = 0;
  double max = 0;

  bool operator==(const Bounds&) const = default;
};

enum class ThresholdSource { historical, literature };

std::string_view to_string(ThresholdSource source);

/// Thresholds for the inspection-profile gate. Every field is optional; an
/// absent field disables the corresponding check.
struct MonitorConfig {
  std::optional<std::size_t> min_total_inspection_defects;
  std::optional<Bounds> reading_rate_bounds;      // LoC per hour
  std::optional<Bounds> defects_per_kloc_bounds;  // inspection defects per 1000 LoC
  ThresholdSource source = ThresholdSource::historical;

  /// Throws InputError when a bound has min > max or a non-finite end.
  void validate() const;
};

struct InspectionMeta {
  double inspected_loc = 0;
  double inspection_hours = 0;
};

enum class Level { pass, warn, fail };

std::string_view to_string(Level level);

struct Finding {
  std::string check;
  std::optional<double> observed;
  std::string bound;
  Level level = Level::pass;
  std::string note;
};

struct MonitorReport {
  Level verdict = Level::pass;
  std::vector<Finding> findings;
};

/// Runs every configured check once. A check whose inputs are absent yields a
/// "not evaluable" warning; a total below the minimum fails; rate bound
/// violations warn.
MonitorReport check_profile(const StatsTable& stats, const std::optional<InspectionMeta>& meta,
                            const MonitorConfig& config);

}  // namespace in2test
