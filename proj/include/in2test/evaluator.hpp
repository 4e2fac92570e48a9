#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "in2test/core_model.hpp"
#include "in2test/rule_dsl.hpp"

namespace in2test {

/// Tolerance 0 is the strong evaluation rule (no test defect may be missed);
/// a positive tolerance is the weak rule.
struct EvaluationConfig {
  std::size_t missed_defect_tolerance = 0;
};

/// Four-scale retrospective grade of a selection rule.
///   I    all defects covered, nothing extra selected
///   II   all defects covered, extra parts selected
///   III  defects missed, some defect-prone part selected
///   IV   defects missed, no defect-prone part selected
/// NoReduction marks a rule that selects every part.
enum class QualityCategory { I, II, III, IV, NoReduction };

std::string_view to_string(QualityCategory category);

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
  double f_measure = 0;
};

struct RuleEvaluation {
  std::string rule_id;
  std::set<std::string> selected;
  std::set<std::string> defect_prone;
  QualityCategory category = QualityCategory::IV;
  double precision = 0;
  double recall = 0;
  double f_measure = 0;
  std::size_t missed_defects = 0;
  // Set when the rule could not be evaluated; the other fields are then unset.
  std::optional<std::string> error;

  bool evaluable() const { return !error.has_value(); }
};

/// Parts in which testing found at least one defect.
std::set<std::string> defect_prone_parts(const StatsTable& stats);

PrecisionRecall precision_recall_f(const std::set<std::string>& selected,
                                   const std::set<std::string>& defect_prone);

/// Grades a selection. `test_defects` maps part id to the number of test
/// defects found there; parts absent from it have none.
QualityCategory classify_rule(const std::set<std::string>& selected, const CountMap& test_defects,
                              const std::set<std::string>& all_parts,
                              const EvaluationConfig& config);

/// Grades a selection given only the defect-prone set, counting one test
/// defect per defect-prone part.
QualityCategory classify_rule(const std::set<std::string>& selected,
                              const std::set<std::string>& defect_prone,
                              const std::set<std::string>& all_parts,
                              const EvaluationConfig& config);

/// One evaluation per rule in input order. A rule whose data is missing is
/// recorded with `error` set and does not affect the others.
std::vector<RuleEvaluation> evaluate_ruleset(std::span<const SelectionRule> rules,
                                             const StatsTable& stats,
                                             const EvaluationConfig& config);

/// Indices of the evaluable results ordered by F-measure descending (ties keep
/// input order): the most promising rules first.
std::vector<std::size_t> rank_by_f_measure(std::span<const RuleEvaluation> evaluations);

}  // namespace in2test
