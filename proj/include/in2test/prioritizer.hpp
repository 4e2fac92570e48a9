#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "in2test/core_model.hpp"
#include "in2test/rule_dsl.hpp"

namespace in2test {

enum class Ordering { by_defect_content, by_density, by_id };
enum class EffortStrategy { top_only, weighted };

std::string_view to_string(Ordering ordering);
std::string_view to_string(EffortStrategy strategy);
Ordering parse_ordering(std::string_view text);
EffortStrategy parse_strategy(std::string_view text);

inline constexpr std::string_view kNoEffortReduction = "no_effort_reduction";
inline constexpr std::string_view kEmptyPrioritization = "empty_prioritization";

struct PrioritizationPlan {
  std::string rule_id;
  std::vector<std::string> prioritized_parts;
  // Two-stage: ranked defect types per selected part.
  std::optional<std::map<std::string, std::vector<std::string>>> part_types;
  // One-stage on defect types: one global ranking.
  std::optional<std::vector<std::string>> global_types;
  EffortStrategy strategy = EffortStrategy::top_only;
  std::optional<std::map<std::string, double>> allocations;
  std::vector<std::string> flags;

  bool has_flag(std::string_view flag) const;
};

enum class RedirectVerdict { keep, redirect };

struct RedirectDecision {
  RedirectVerdict verdict = RedirectVerdict::keep;
  std::string reason;
  std::optional<std::string> replacement_rule_id;
};

/// One-stage plan. For part rules the selected parts are ordered by the key
/// descending (by_id: ascending), ties by part id; for defect_types rules the
/// selected types are ranked by inspection count.
PrioritizationPlan prioritize(const SelectionRule& rule, const StatsTable& stats,
                              Ordering ordering = Ordering::by_defect_content);

/// Defect types ranked by inspection-phase count within `within_parts` (all
/// parts when absent), descending with ties by name, truncated to top_k.
std::vector<std::string> prioritize_defect_types(const StatsTable& stats,
                                                 const std::optional<std::set<std::string>>& within_parts,
                                                 std::size_t top_k);

/// Parts from prioritize(), then a per-part top_k type ranking.
PrioritizationPlan two_stage(const SelectionRule& rule, const StatsTable& stats, std::size_t top_k,
                             Ordering ordering = Ordering::by_defect_content);

/// Splits `budget` across all parts. top_only gives everything to the
/// prioritized parts in equal shares; weighted gives `weighted_share` of it
/// to them and spreads the rest equally over the others. Allocations always
/// sum to the budget.
PrioritizationPlan allocate_effort(PrioritizationPlan plan, double budget, EffortStrategy strategy,
                                   const std::set<std::string>& all_parts,
                                   double weighted_share = 0.8);

/// Keeps the plan when every interim test defect falls inside a prioritized
/// part, otherwise recommends the first alternative whose selection covers
/// all of those parts.
RedirectDecision redirect(const PrioritizationPlan& plan,
                          std::span<const DefectRecord> interim_test_defects,
                          std::span<const SelectionRule> alternatives, const StatsTable& stats);

}  // namespace in2test
