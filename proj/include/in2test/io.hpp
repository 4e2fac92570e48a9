#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "in2test/core_model.hpp"
#include "in2test/evaluator.hpp"
#include "in2test/prioritizer.hpp"
#include "in2test/quality_monitor.hpp"
#include "in2test/rule_dsl.hpp"

namespace in2test {

// CSV schemas (comma separated, header line first, no quoting):
//   defects.csv  part_id,phase,defect_type,severity
//   metrics.csv  part_id,metric,value
//   history.csv  part_id,release_id,defect_count
std::vector<DefectRecord> read_defects_csv(std::istream& in, const std::string& origin = "defects");
std::vector<PartMetrics> read_metrics_csv(std::istream& in, const std::string& origin = "metrics");
std::vector<HistoryRecord> read_history_csv(std::istream& in, const std::string& origin = "history");

std::vector<DefectRecord> load_defects(const std::filesystem::path& path);
std::vector<PartMetrics> load_metrics(const std::filesystem::path& path);
std::vector<HistoryRecord> load_history(const std::filesystem::path& path);

/// One entry of rules.json.
struct RuleEntry {
  SelectionRule rule;
  ContextProfile context;
};

/// rules.json: [{"id", "assumption_id", "rule": "<rule text>", "context": {...}}].
/// Throws ParseError for bad rule text (message prefixed with the rule id)
/// and InputError for schema problems or duplicate ids.
std::vector<RuleEntry> parse_rules_json(const nlohmann::json& j);
std::vector<RuleEntry> load_rules(const std::filesystem::path& path);

ContextProfile parse_context_json(const nlohmann::json& j);
ContextProfile load_context(const std::filesystem::path& path);

/// monitor.json: {"min_total_inspection_defects": n, "reading_rate_bounds": [lo, hi],
/// "defects_per_kloc_bounds": [lo, hi], "source": "historical"|"literature",
/// "inspection": {"inspected_loc": x, "inspection_hours": y}}; all keys optional.
struct MonitorInput {
  MonitorConfig config;
  std::optional<InspectionMeta> meta;
};
MonitorInput parse_monitor_json(const nlohmann::json& j);
MonitorInput load_monitor_config(const std::filesystem::path& path);

nlohmann::json load_json(const std::filesystem::path& path);

nlohmann::json to_json(const MonitorReport& report);
nlohmann::json to_json(const PrioritizationPlan& plan);
PrioritizationPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RedirectDecision& decision);

/// CSV mirroring the case-study evaluation table:
/// rule_id,selection,category,precision,recall,f_measure
/// Selections join part ids with ';'. Numbers use 2-decimal half-up rounding.
std::string render_evaluation_csv(const std::vector<RuleEvaluation>& evaluations);

/// Exclusive advisory lock on `<path>.lock`, held for the object's lifetime.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace in2test
