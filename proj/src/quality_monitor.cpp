#include "in2test/quality_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "in2test/error.hpp"

namespace in2test {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string format_bounds(const Bounds& b) {
  return "[" + format_number(b.min) + ", " + format_number(b.max) + "]";
}

Finding bounded_finding(std::string check, double observed, const Bounds& bounds) {
  Finding f{std::move(check), observed, format_bounds(bounds), Level::pass, {}};
  if (observed < bounds.min) {
    f.level = Level::warn;
    f.note = "below lower bound";
  } else if (observed > bounds.max) {
    f.level = Level::warn;
    f.note = "above upper bound";
  }
  return f;
}

Finding not_evaluable(std::string check, const Bounds& bounds, std::string why) {
  return {std::move(check), std::nullopt, format_bounds(bounds), Level::warn,
          "not evaluable: " + std::move(why)};
}

}  // namespace

std::string_view to_string(ThresholdSource source) {
  return source == ThresholdSource::historical ? "historical" : "literature";
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::pass:
      return "pass";
    case Level::warn:
      return "warn";
    case Level::fail:
      return "fail";
  }
  return "pass";
}

void MonitorConfig::validate() const {
  auto check = [](const std::optional<Bounds>& b, const char* name) {
    if (!b) return;
    if (!std::isfinite(b->min) || !std::isfinite(b->max)) {
      throw InputError(std::string(name) + " must be finite");
    }
    if (b->min > b->max) throw InputError(std::string(name) + " has min > max");
  };
  check(reading_rate_bounds, "reading_rate_bounds");
  check(defects_per_kloc_bounds, "defects_per_kloc_bounds");
}

MonitorReport check_profile(const StatsTable& stats, const std::optional<InspectionMeta>& meta,
                            const MonitorConfig& config) {
  MonitorReport report;

  std::size_t total = 0;
  double total_loc = 0;
  bool all_loc_known = !stats.empty();
  for (const auto& [id, part] : stats) {
    total += part.inspection_defect_content;
    if (auto loc = part.metric("loc")) {
      total_loc += *loc;
    } else {
      all_loc_known = false;
    }
  }

  if (config.min_total_inspection_defects) {
    const std::size_t minimum = *config.min_total_inspection_defects;
    Finding f{"total_defects", static_cast<double>(total), ">=" + std::to_string(minimum),
              Level::pass, {}};
    if (total < minimum) {
      f.level = Level::fail;
      f.note = "too few inspection defects to prioritize on";
    }
    report.findings.push_back(std::move(f));
  }

  if (config.reading_rate_bounds) {
    if (!meta) {
      report.findings.push_back(
          not_evaluable("reading_rate", *config.reading_rate_bounds, "no inspection meta data"));
    } else if (meta->inspection_hours <= 0) {
      report.findings.push_back(not_evaluable("reading_rate", *config.reading_rate_bounds,
                                              "inspection_hours must be positive"));
    } else {
      report.findings.push_back(bounded_finding(
          "reading_rate", meta->inspected_loc / meta->inspection_hours, *config.reading_rate_bounds));
    }
  }

  if (config.defects_per_kloc_bounds) {
    if (!all_loc_known || total_loc <= 0) {
      report.findings.push_back(not_evaluable("defects_per_kloc", *config.defects_per_kloc_bounds,
                                              "loc missing for some part"));
    } else {
      report.findings.push_back(bounded_finding("defects_per_kloc",
                                                1000.0 * static_cast<double>(total) / total_loc,
                                                *config.defects_per_kloc_bounds));
    }
  }

  for (const Finding& f : report.findings) {
    report.verdict = std::max(report.verdict, f.level);
  }
  return report;
}

}  // namespace in2test
