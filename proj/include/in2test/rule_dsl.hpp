#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "in2test/core_model.hpp"

namespace in2test {

enum class RuleScope { parts, defect_types };

std::string_view to_string(RuleScope scope);

enum class MetricKind {
  defect_content,           // optional severity qualifier
  defect_density,           // inspection defects per LoC
  defect_density_kloc,      // inspection defects per 1000 LoC
  loc,
  mean_method_length,
  named,                    // metric("name")
  history_defects,          // history_defects(last=N)
};

/// A quantity a predicate compares against its threshold.
struct MetricRef {
  MetricKind kind = MetricKind::defect_content;
  std::string argument;  // severity label (defect_content) or metric name (named)
  int last = 0;          // lookback depth (history_defects)

  static MetricRef defect_content() { return {}; }
  static MetricRef defect_content_with_severity(std::string severity) {
    return {MetricKind::defect_content, std::move(severity), 0};
  }
  static MetricRef of(MetricKind kind) { return {kind, {}, 0}; }
  static MetricRef named(std::string name) { return {MetricKind::named, std::move(name), 0}; }
  static MetricRef history(int last) { return {MetricKind::history_defects, {}, last}; }

  bool operator==(const MetricRef&) const = default;
};

enum class CompareOp { greater, greater_equal, less, less_equal, equal };

std::string_view to_string(CompareOp op);
bool compare(double lhs, CompareOp op, double rhs);

struct Predicate {
  MetricRef metric;
  CompareOp op = CompareOp::greater;
  double threshold = 0;

  bool operator==(const Predicate&) const = default;
};

/// Operational form of an assumption: "focus <scope> where p1 & p2 & ...".
struct SelectionRule {
  std::string id;
  std::string assumption_id;
  RuleScope scope = RuleScope::parts;
  std::vector<Predicate> predicates;
  std::string source_text;

  /// Structural equality: scope and predicates only.
  bool same_structure(const SelectionRule& other) const {
    return scope == other.scope && predicates == other.predicates;
  }
};

/// Parses rule text.
///
///   rule   := "focus" ("parts" | "defect_types") "where" pred { "&" pred }
///   pred   := metric op number
///   op     := ">" | ">=" | "<" | "<=" | "=="
///   metric := "defect_content" [ "(" "severity" "=" label ")" ]
///           | "defect_density" | "defect_density_kloc" | "loc" | "mean_method_length"
///           | "metric" "(" quoted-name ")"
///           | "history_defects" "(" "last" "=" integer ")"
///
/// Throws ParseError (with a character offset) on malformed text, unknown
/// metrics, bad qualifiers, or a defect_types rule using anything other than
/// plain defect_content.
SelectionRule parse_rule(std::string_view text);

/// Canonical text of a rule; parse_rule(render_rule(r)) is structurally equal to r.
std::string render_rule(const SelectionRule& rule);
std::string render_metric(const MetricRef& metric);

/// Value of `metric` for one part; throws MissingMetricError when absent.
double resolve_metric(const MetricRef& metric, const PartStats& part);

/// Parts (scope parts) or defect types (scope defect_types) that satisfy
/// every predicate at full precision. Missing data is an error, never false.
std::set<std::string> evaluate_rule(const SelectionRule& rule, const StatsTable& stats);

/// fraction x max(values); the "80% of the worst part" threshold heuristic.
double derive_threshold(std::span<const double> values, double fraction = 0.8);

}  // namespace in2test
