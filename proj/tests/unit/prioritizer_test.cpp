#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "in2test/error.hpp"
#include "in2test/prioritizer.hpp"
#include "test_support.hpp"

namespace in2test {
namespace {

using Parts = std::vector<std::string>;

const std::set<std::string> kAllParts = {"I", "II", "III", "IV"};

StatsTable typed_stats() {
  auto defects = testing::case_study_defects();
  // Part III: logic x5, interface x3, documentation x1, remaining 30 untyped.
  int logic = 5, interface = 3, documentation = 1;
  for (DefectRecord& d : defects) {
    if (d.part_id != "III" || d.phase != Phase::inspection) continue;
    if (logic-- > 0) {
      d.defect_type = "logic";
    } else if (interface-- > 0) {
      d.defect_type = "interface";
    } else if (documentation-- > 0) {
      d.defect_type = "documentation";
    }
  }
  const auto metrics = testing::case_study_metrics();
  return compute_part_stats(defects, metrics, {});
}

TEST(Prioritize, ByDefectContent) {
  const auto rules = testing::case_study_rules();
  const PrioritizationPlan plan = prioritize(rules[0], testing::case_study_stats());
  EXPECT_EQ(plan.rule_id, "A1.01");
  EXPECT_EQ(plan.prioritized_parts, (Parts{"II", "III"}));
  EXPECT_FALSE(plan.allocations.has_value());
}

TEST(Prioritize, ById) {
  const auto rules = testing::case_study_rules();
  EXPECT_EQ(prioritize(rules[1], testing::case_study_stats(), Ordering::by_id).prioritized_parts,
            (Parts{"I", "III", "IV"}));
}

TEST(Prioritize, ByDensity) {
  const auto rules = testing::case_study_rules();
  // IV 0.0609, I 0.0606, III 0.0556
  EXPECT_EQ(prioritize(rules[1], testing::case_study_stats(), Ordering::by_density).prioritized_parts,
            (Parts{"IV", "I", "III"}));
}

TEST(Prioritize, EmptySelection) {
  const PrioritizationPlan plan =
      prioritize(parse_rule("focus parts where defect_content > 1000"), testing::case_study_stats());
  EXPECT_TRUE(plan.prioritized_parts.empty());
}

TEST(Prioritize, TiesBreakById) {
  const std::vector<DefectRecord> defects = {{"b", Phase::inspection, "", ""},
                                             {"a", Phase::inspection, "", ""},
                                             {"c", Phase::inspection, "", ""},
                                             {"c", Phase::inspection, "", ""}};
  const StatsTable stats = compute_part_stats(defects, {}, {});
  EXPECT_EQ(prioritize(parse_rule("focus parts where defect_content > 0"), stats).prioritized_parts,
            (Parts{"c", "a", "b"}));
}

TEST(Prioritize, DefectTypeRuleGivesGlobalRanking) {
  const PrioritizationPlan plan =
      prioritize(parse_rule("focus defect_types where defect_content >= 3"), typed_stats());
  ASSERT_TRUE(plan.global_types);
  EXPECT_EQ(*plan.global_types, (Parts{"logic", "interface"}));
  EXPECT_TRUE(plan.prioritized_parts.empty());
}

TEST(Prioritize, OrderingNeverChangesMembership) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const StatsTable stats = testing::random_stats(rng);
    const SelectionRule rule = testing::random_rule(rng, 2);
    const auto selected = evaluate_rule(rule, stats);
    for (Ordering o : {Ordering::by_defect_content, Ordering::by_density, Ordering::by_id}) {
      const auto parts = prioritize(rule, stats, o).prioritized_parts;
      ASSERT_EQ(std::set<std::string>(parts.begin(), parts.end()), selected);
      ASSERT_EQ(parts.size(), selected.size());
    }
  }
}

TEST(PrioritizeDefectTypes, RanksByCount) {
  const StatsTable stats = typed_stats();
  EXPECT_EQ(prioritize_defect_types(stats, std::set<std::string>{"III"}, 1), (Parts{"logic"}));
  EXPECT_EQ(prioritize_defect_types(stats, std::set<std::string>{"III"}, 3),
            (Parts{"logic", "interface", "documentation"}));
  EXPECT_EQ(prioritize_defect_types(stats, std::nullopt, 10),
            (Parts{"logic", "interface", "documentation"}));
}

TEST(PrioritizeDefectTypes, UntypedDataGivesEmptyList) {
  EXPECT_TRUE(prioritize_defect_types(testing::case_study_stats(), std::nullopt, 3).empty());
  EXPECT_THROW(prioritize_defect_types(testing::case_study_stats(), std::nullopt, 0),
               std::invalid_argument);
}

TEST(PrioritizeDefectTypes, TiesByName) {
  const std::vector<DefectRecord> defects = {{"a", Phase::inspection, "zeta", ""},
                                             {"a", Phase::inspection, "alpha", ""},
                                             {"a", Phase::test, "omega", ""}};
  EXPECT_EQ(prioritize_defect_types(compute_part_stats(defects, {}, {}), std::nullopt, 5),
            (Parts{"alpha", "zeta"}));
}

TEST(TwoStage, PartsThenTypes) {
  const auto rules = testing::case_study_rules();
  const PrioritizationPlan plan = two_stage(rules[2], typed_stats(), 3);
  EXPECT_EQ(plan.prioritized_parts, (Parts{"III"}));
  ASSERT_TRUE(plan.part_types);
  EXPECT_EQ(plan.part_types->at("III"), (Parts{"logic", "interface", "documentation"}));
}

TEST(TwoStage, EmptySelection) {
  const PrioritizationPlan plan =
      two_stage(parse_rule("focus parts where loc > 1e9"), typed_stats(), 3);
  EXPECT_TRUE(plan.prioritized_parts.empty());
  EXPECT_TRUE(plan.part_types->empty());
}

TEST(TwoStage, UntypedPartHasEmptyRanking) {
  const auto rules = testing::case_study_rules();
  const PrioritizationPlan plan = two_stage(rules[2], testing::case_study_stats(), 3);
  EXPECT_EQ(plan.prioritized_parts, (Parts{"III"}));
  EXPECT_TRUE(plan.part_types->at("III").empty());
}

TEST(TwoStage, UnboundedTopKListsEveryInspectedType) {
  const StatsTable stats = typed_stats();
  const PrioritizationPlan plan =
      two_stage(parse_rule("focus parts where defect_content > 0"), stats, SIZE_MAX);
  for (const std::string& id : plan.prioritized_parts) {
    EXPECT_EQ(plan.part_types->at(id).size(), stats.at(id).inspection_type_counts.size());
  }
}

TEST(AllocateEffort, TopOnly) {
  PrioritizationPlan plan;
  plan.prioritized_parts = {"III"};
  const PrioritizationPlan out = allocate_effort(plan, 100, EffortStrategy::top_only, kAllParts);
  const std::map<std::string, double> expected = {{"I", 0}, {"II", 0}, {"III", 100}, {"IV", 0}};
  EXPECT_EQ(*out.allocations, expected);
}

TEST(AllocateEffort, Weighted) {
  PrioritizationPlan plan;
  plan.prioritized_parts = {"II", "III"};
  const auto alloc = *allocate_effort(plan, 100, EffortStrategy::weighted, kAllParts, 0.8).allocations;
  EXPECT_NEAR(alloc.at("II"), 40, 1e-9);
  EXPECT_NEAR(alloc.at("III"), 40, 1e-9);
  EXPECT_EQ(alloc.at("I"), 10.0);
  EXPECT_NEAR(alloc.at("IV"), 10, 1e-9);
}

TEST(AllocateEffort, AllPartsFlagsNoReduction) {
  PrioritizationPlan plan;
  plan.prioritized_parts = {"I", "II", "III", "IV"};
  const PrioritizationPlan out = allocate_effort(plan, 100, EffortStrategy::weighted, kAllParts);
  EXPECT_TRUE(out.has_flag(kNoEffortReduction));
  for (const auto& [id, v] : *out.allocations) EXPECT_NEAR(v, 25, 1e-9);
}

TEST(AllocateEffort, EmptyPlan) {
  PrioritizationPlan plan;
  EXPECT_THROW(allocate_effort(plan, 100, EffortStrategy::top_only, kAllParts), std::invalid_argument);
  const PrioritizationPlan out = allocate_effort(plan, 100, EffortStrategy::weighted, kAllParts);
  EXPECT_TRUE(out.has_flag(kEmptyPrioritization));
  for (const auto& [id, v] : *out.allocations) EXPECT_NEAR(v, 25, 1e-9);
}

TEST(AllocateEffort, RejectsBadArguments) {
  PrioritizationPlan plan;
  plan.prioritized_parts = {"III"};
  EXPECT_THROW(allocate_effort(plan, 0, EffortStrategy::top_only, kAllParts), std::invalid_argument);
  EXPECT_THROW(allocate_effort(plan, 10, EffortStrategy::weighted, kAllParts, 0), std::invalid_argument);
  plan.prioritized_parts = {"V"};
  EXPECT_THROW(allocate_effort(plan, 10, EffortStrategy::top_only, kAllParts), std::invalid_argument);
}

TEST(AllocateEffort, ConservesBudget) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    std::set<std::string> all;
    PrioritizationPlan plan;
    for (std::size_t p = 0; p < n; ++p) {
      all.insert("p" + std::to_string(p));
      if (std::bernoulli_distribution(0.4)(rng)) plan.prioritized_parts.push_back("p" + std::to_string(p));
    }
    const double budget = std::uniform_real_distribution<double>(0.001, 10000)(rng);
    const double share = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    const auto strategy = plan.prioritized_parts.empty() || std::bernoulli_distribution(0.5)(rng)
                              ? EffortStrategy::weighted
                              : EffortStrategy::top_only;
    const auto alloc = *allocate_effort(plan, budget, strategy, all, share).allocations;
    double sum = 0;
    for (const auto& [id, v] : alloc) {
      ASSERT_GE(v, 0.0);
      sum += v;
    }
    ASSERT_NEAR(sum, budget, 1e-9);
    ASSERT_EQ(alloc.size(), all.size());
  }
}

TEST(Redirect, KeepWhenDefectsInsidePlan) {
  PrioritizationPlan plan;
  plan.prioritized_parts = {"III"};
  const std::vector<DefectRecord> interim = {{"III", Phase::test, "", ""}, {"III", Phase::test, "", ""}};
  const RedirectDecision d = redirect(plan, interim, {}, testing::case_study_stats());
  EXPECT_EQ(d.verdict, RedirectVerdict::keep);
  EXPECT_FALSE(d.replacement_rule_id);
}

TEST(Redirect, PicksFirstCoveringAlternative) {
  PrioritizationPlan plan;
  plan.prioritized_parts = {"II"};
  const std::vector<DefectRecord> interim = {{"III", Phase::test, "", ""}};
  const auto rules = testing::case_study_rules();
  const std::vector<SelectionRule> alternatives = {rules[3], rules[2], rules[1]};
  const RedirectDecision d = redirect(plan, interim, alternatives, testing::case_study_stats());
  EXPECT_EQ(d.verdict, RedirectVerdict::redirect);
  EXPECT_FALSE(d.reason.empty());
  EXPECT_EQ(d.replacement_rule_id, "A2.01");
}

TEST(Redirect, EmptyPlanWithoutAlternatives) {
  PrioritizationPlan plan;
  const std::vector<DefectRecord> interim = {{"I", Phase::test, "", ""}};
  const RedirectDecision d = redirect(plan, interim, {}, testing::case_study_stats());
  EXPECT_EQ(d.verdict, RedirectVerdict::redirect);
  EXPECT_FALSE(d.replacement_rule_id);
  EXPECT_FALSE(d.reason.empty());
}

TEST(Redirect, RejectsInspectionDefects) {
  PrioritizationPlan plan;
  const std::vector<DefectRecord> interim = {{"I", Phase::inspection, "", ""}};
  EXPECT_THROW(redirect(plan, interim, {}, testing::case_study_stats()), std::invalid_argument);
}

TEST(Redirect, KeepIffDefectPartsInsidePlan) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> ids = {"I", "II", "III", "IV"};
  for (int i = 0; i < 500; ++i) {
    PrioritizationPlan plan;
    std::set<std::string> planned, hit;
    std::vector<DefectRecord> interim;
    for (const std::string& id : ids) {
      if (std::bernoulli_distribution(0.5)(rng)) {
        plan.prioritized_parts.push_back(id);
        planned.insert(id);
      }
      if (std::bernoulli_distribution(0.3)(rng)) {
        interim.push_back({id, Phase::test, "", ""});
        hit.insert(id);
      }
    }
    const bool subset = std::includes(planned.begin(), planned.end(), hit.begin(), hit.end());
    const auto d = redirect(plan, interim, testing::case_study_rules(), testing::case_study_stats());
    ASSERT_EQ(d.verdict == RedirectVerdict::keep, subset);
  }
}

}  // namespace
}  // namespace in2test
