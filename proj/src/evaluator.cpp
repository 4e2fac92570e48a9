#include "in2test/evaluator.hpp"

#include <algorithm>
#include <numeric>

#include "in2test/error.hpp"

namespace in2test {

std::string_view to_string(QualityCategory category) {
  switch (category) {
    case QualityCategory::I:
      return "I";
    case QualityCategory::II:
      return "II";
    case QualityCategory::III:
      return "III";
    case QualityCategory::IV:
      return "IV";
    case QualityCategory::NoReduction:
      return "NoReduction";
  }
  return "IV";
}

std::set<std::string> defect_prone_parts(const StatsTable& stats) {
  std::set<std::string> prone;
  for (const auto& [id, part] : stats) {
    if (part.test_defect_content >= 1) prone.insert(id);
  }
  return prone;
}

namespace {

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
  return static_cast<std::size_t>(std::count_if(
      a.begin(), a.end(), [&b](const std::string& id) { return b.contains(id); }));
}

}  // namespace

PrecisionRecall precision_recall_f(const std::set<std::string>& selected,
                                   const std::set<std::string>& defect_prone) {
  const auto hits = static_cast<double>(intersection_size(selected, defect_prone));
  PrecisionRecall pr;
  pr.precision = selected.empty() ? 0.0 : hits / static_cast<double>(selected.size());
  pr.recall = defect_prone.empty() ? 1.0 : hits / static_cast<double>(defect_prone.size());
  const double denom = pr.precision + pr.recall;
  pr.f_measure = denom == 0.0 ? 0.0 : 2.0 * pr.precision * pr.recall / denom;
  return pr;
}

QualityCategory classify_rule(const std::set<std::string>& selected, const CountMap& test_defects,
                              const std::set<std::string>& all_parts,
                              const EvaluationConfig& config) {
  if (!all_parts.empty() && selected == all_parts) return QualityCategory::NoReduction;

  std::size_t missed = 0;
  bool extras = false;
  bool any_hit = false;
  for (const auto& [id, count] : test_defects) {
    if (count > 0 && !selected.contains(id)) missed += count;
  }
  for (const std::string& id : selected) {
    auto it = test_defects.find(id);
    const bool prone = it != test_defects.end() && it->second > 0;
    extras = extras || !prone;
    any_hit = any_hit || prone;
  }

  if (missed <= config.missed_defect_tolerance) {
    return extras ? QualityCategory::II : QualityCategory::I;
  }
  return any_hit ? QualityCategory::III : QualityCategory::IV;
}

QualityCategory classify_rule(const std::set<std::string>& selected,
                              const std::set<std::string>& defect_prone,
                              const std::set<std::string>& all_parts,
                              const EvaluationConfig& config) {
  CountMap counts;
  for (const std::string& id : defect_prone) counts[id] = 1;
  return classify_rule(selected, counts, all_parts, config);
}

std::vector<RuleEvaluation> evaluate_ruleset(std::span<const SelectionRule> rules,
                                             const StatsTable& stats,
                                             const EvaluationConfig& config) {
  const std::set<std::string> prone = defect_prone_parts(stats);
  std::set<std::string> all_parts;
  CountMap test_defects;
  for (const auto& [id, part] : stats) {
    all_parts.insert(id);
    test_defects[id] = part.test_defect_content;
  }

  std::vector<RuleEvaluation> out;
  out.reserve(rules.size());
  for (const SelectionRule& rule : rules) {
    RuleEvaluation ev;
    ev.rule_id = rule.id;
    ev.defect_prone = prone;
    if (rule.scope != RuleScope::parts) {
      ev.error = "only parts rules can be evaluated against test defects";
      out.push_back(std::move(ev));
      continue;
    }
    try {
      ev.selected = evaluate_rule(rule, stats);
    } catch (const MissingMetricError& e) {
      ev.error = e.what();
      out.push_back(std::move(ev));
      continue;
    }
    const PrecisionRecall pr = precision_recall_f(ev.selected, prone);
    ev.precision = pr.precision;
    ev.recall = pr.recall;
    ev.f_measure = pr.f_measure;
    for (const auto& [id, count] : test_defects) {
      if (!ev.selected.contains(id)) ev.missed_defects += count;
    }
    ev.category = classify_rule(ev.selected, test_defects, all_parts, config);
    out.push_back(std::move(ev));
  }
  return out;
}

std::vector<std::size_t> rank_by_f_measure(std::span<const RuleEvaluation> evaluations) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < evaluations.size(); ++i) {
    if (evaluations[i].evaluable()) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return evaluations[a].f_measure > evaluations[b].f_measure;
  });
  return order;
}

}  // namespace in2test
