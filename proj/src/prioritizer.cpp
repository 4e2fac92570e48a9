#include "in2test/prioritizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "in2test/error.hpp"

namespace in2test {

std::string_view to_string(Ordering ordering) {
  switch (ordering) {
    case Ordering::by_defect_content:
      return "by_defect_content";
    case Ordering::by_density:
      return "by_density";
    case Ordering::by_id:
      return "by_id";
  }
  return "by_defect_content";
}

std::string_view to_string(EffortStrategy strategy) {
  return strategy == EffortStrategy::top_only ? "top_only" : "weighted";
}

Ordering parse_ordering(std::string_view text) {
  if (text == "by_defect_content") return Ordering::by_defect_content;
  if (text == "by_density") return Ordering::by_density;
  if (text == "by_id") return Ordering::by_id;
  throw InputError("unknown ordering '" + std::string(text) + "'");
}

EffortStrategy parse_strategy(std::string_view text) {
  if (text == "top" || text == "top_only") return EffortStrategy::top_only;
  if (text == "weighted") return EffortStrategy::weighted;
  throw InputError("unknown strategy '" + std::string(text) + "' (expected top or weighted)");
}

bool PrioritizationPlan::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

std::vector<std::string> rank_counts(const CountMap& counts, std::size_t top_k) {
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (const auto& [type, count] : ranked) {
    if (out.size() == top_k) break;
    if (count > 0) out.push_back(type);
  }
  return out;
}

}  // namespace

PrioritizationPlan prioritize(const SelectionRule& rule, const StatsTable& stats,
                              Ordering ordering) {
  PrioritizationPlan plan;
  plan.rule_id = rule.id;
  const std::set<std::string> selected = evaluate_rule(rule, stats);

  if (rule.scope == RuleScope::defect_types) {
    CountMap counts;
    for (const auto& [id, part] : stats) {
      for (const auto& [type, count] : part.inspection_type_counts) {
        if (selected.contains(type)) counts[type] += count;
      }
    }
    plan.global_types = rank_counts(counts, counts.size());
    return plan;
  }

  // std::set iteration already yields ascending ids; a stable sort on the key
  // keeps that as the tie-break.
  plan.prioritized_parts.assign(selected.begin(), selected.end());
  auto key = [&](const std::string& id) -> double {
    const PartStats& part = stats.at(id);
    if (ordering == Ordering::by_density) {
      return resolve_metric(MetricRef::of(MetricKind::defect_density), part);
    }
    return static_cast<double>(part.inspection_defect_content);
  };
  if (ordering != Ordering::by_id) {
    std::vector<std::pair<double, std::string>> keyed;
    for (const std::string& id : plan.prioritized_parts) keyed.emplace_back(key(id), id);
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < keyed.size(); ++i) plan.prioritized_parts[i] = keyed[i].second;
  }
  return plan;
}

std::vector<std::string> prioritize_defect_types(
    const StatsTable& stats, const std::optional<std::set<std::string>>& within_parts,
    std::size_t top_k) {
  if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");
  CountMap counts;
  for (const auto& [id, part] : stats) {
    if (within_parts && !within_parts->contains(id)) continue;
    for (const auto& [type, count] : part.inspection_type_counts) counts[type] += count;
  }
  return rank_counts(counts, top_k);
}

PrioritizationPlan two_stage(const SelectionRule& rule, const StatsTable& stats, std::size_t top_k,
                             Ordering ordering) {
  if (rule.scope != RuleScope::parts) {
    throw std::invalid_argument("two-stage prioritization needs a parts rule");
  }
  PrioritizationPlan plan = prioritize(rule, stats, ordering);
  std::map<std::string, std::vector<std::string>> types;
  for (const std::string& id : plan.prioritized_parts) {
    types[id] = prioritize_defect_types(stats, std::set<std::string>{id}, top_k);
  }
  plan.part_types = std::move(types);
  return plan;
}

PrioritizationPlan allocate_effort(PrioritizationPlan plan, double budget, EffortStrategy strategy,
                                   const std::set<std::string>& all_parts, double weighted_share) {
  if (!(budget > 0) || !std::isfinite(budget)) {
    throw std::invalid_argument("budget must be positive and finite");
  }
  if (!(weighted_share > 0 && weighted_share <= 1)) {
    throw std::invalid_argument("weighted share must lie in (0, 1]");
  }
  const std::set<std::string> top(plan.prioritized_parts.begin(), plan.prioritized_parts.end());
  for (const std::string& id : top) {
    if (!all_parts.contains(id)) {
      throw std::invalid_argument("prioritized part '" + id + "' is not a known part");
    }
  }
  if (all_parts.empty()) throw std::invalid_argument("no parts to allocate effort to");

  std::map<std::string, double> alloc;
  for (const std::string& id : all_parts) alloc[id] = 0.0;
  const std::size_t rest = all_parts.size() - top.size();

  auto spread = [&alloc](const auto& ids, std::size_t n, double amount) {
    for (const std::string& id : ids) alloc[id] = amount / static_cast<double>(n);
  };

  plan.strategy = strategy;
  if (top.empty()) {
    if (strategy == EffortStrategy::top_only) {
      throw std::invalid_argument("top_only allocation needs at least one prioritized part");
    }
    spread(all_parts, all_parts.size(), budget);
    plan.flags.emplace_back(kEmptyPrioritization);
  } else if (rest == 0 || strategy == EffortStrategy::top_only) {
    spread(top, top.size(), budget);
    if (rest == 0) plan.flags.emplace_back(kNoEffortReduction);
  } else {
    const double top_amount = weighted_share * budget;
    spread(top, top.size(), top_amount);
    std::vector<std::string> others;
    for (const std::string& id : all_parts) {
      if (!top.contains(id)) others.push_back(id);
    }
    spread(others, rest, budget - top_amount);
  }

  // Push the rounding residue onto the largest share.
  double sum = 0;
  for (const auto& [id, v] : alloc) sum += v;
  auto largest = std::max_element(alloc.begin(), alloc.end(),
                                   [](const auto& a, const auto& b) { return a.second < b.second; });
  largest->second += budget - sum;

  plan.allocations = std::move(alloc);
  return plan;
}

RedirectDecision redirect(const PrioritizationPlan& plan,
                          std::span<const DefectRecord> interim_test_defects,
                          std::span<const SelectionRule> alternatives, const StatsTable& stats) {
  std::set<std::string> hit;
  for (const DefectRecord& d : interim_test_defects) {
    if (d.phase != Phase::test) {
      throw std::invalid_argument("interim defects must come from testing (part '" + d.part_id +
                                  "')");
    }
    hit.insert(trim(d.part_id));
  }
  const std::set<std::string> prioritized(plan.prioritized_parts.begin(),
                                          plan.prioritized_parts.end());
  std::vector<std::string> outside;
  std::set_difference(hit.begin(), hit.end(), prioritized.begin(), prioritized.end(),
                      std::back_inserter(outside));
  if (outside.empty()) {
    return {RedirectVerdict::keep, "all interim test defects lie in prioritized parts",
            std::nullopt};
  }

  std::string reason = "interim test defects outside the prioritized parts:";
  for (const std::string& id : outside) reason += " " + id;

  for (const SelectionRule& alt : alternatives) {
    if (alt.scope != RuleScope::parts) continue;
    std::set<std::string> selection;
    try {
      selection = evaluate_rule(alt, stats);
    } catch (const MissingMetricError&) {
      continue;
    }
    if (std::includes(selection.begin(), selection.end(), hit.begin(), hit.end())) {
      return {RedirectVerdict::redirect, reason + "; rule " + alt.id + " covers them", alt.id};
    }
  }
  return {RedirectVerdict::redirect, reason + "; no alternative rule covers them", std::nullopt};
}

}  // namespace in2test
