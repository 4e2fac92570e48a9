#include "in2test/rule_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "in2test/error.hpp"

namespace in2test {

std::string_view to_string(RuleScope scope) {
  return scope == RuleScope::parts ? "parts" : "defect_types";
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::greater:
      return ">";
    case CompareOp::greater_equal:
      return ">=";
    case CompareOp::less:
      return "<";
    case CompareOp::less_equal:
      return "<=";
    case CompareOp::equal:
      return "==";
  }
  return ">";
}

bool compare(double lhs, CompareOp op, double rhs) {
  switch (op) {
    case CompareOp::greater:
      return lhs > rhs;
    case CompareOp::greater_equal:
      return lhs >= rhs;
    case CompareOp::less:
      return lhs < rhs;
    case CompareOp::less_equal:
      return lhs <= rhs;
    case CompareOp::equal:
      return lhs == rhs;
  }
  return false;
}

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_label_char(char c) { return is_ident_char(c) || c == '-' || c == '.'; }

class RuleParser {
 public:
  explicit RuleParser(std::string_view text) : text_(text) {}

  SelectionRule parse() {
    SelectionRule rule;
    rule.source_text = std::string(text_);
    expect_word("focus");
    const std::size_t scope_pos = skip_ws();
    const std::string scope = identifier("rule scope");
    if (scope == "parts") {
      rule.scope = RuleScope::parts;
    } else if (scope == "defect_types") {
      rule.scope = RuleScope::defect_types;
    } else {
      throw ParseError("unknown rule scope '" + scope + "' (expected parts or defect_types)",
                       scope_pos);
    }
    expect_word("where");
    while (true) {
      const std::size_t pred_pos = skip_ws();
      Predicate p = predicate();
      if (rule.scope == RuleScope::defect_types &&
          !(p.metric.kind == MetricKind::defect_content && p.metric.argument.empty())) {
        throw ParseError("defect_types rules may only use plain defect_content", pred_pos);
      }
      rule.predicates.push_back(std::move(p));
      skip_ws();
      if (at_end()) break;
      expect_char('&');
    }
    return rule;
  }

 private:
  std::size_t skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  std::string describe_here() const {
    if (at_end()) return "end of input";
    return "'" + std::string(1, text_[pos_]) + "'";
  }

  std::string identifier(const char* what) {
    skip_ws();
    if (at_end() || !is_ident_start(text_[pos_])) {
      fail(std::string("expected ") + what + ", found " + describe_here());
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect_word(std::string_view word) {
    const std::size_t start = skip_ws();
    const std::string got = identifier(std::string("'" + std::string(word) + "'").c_str());
    if (got != word) {
      throw ParseError("expected '" + std::string(word) + "', found '" + got + "'", start);
    }
  }

  void expect_char(char c) {
    skip_ws();
    if (at_end() || text_[pos_] != c) {
      fail("expected '" + std::string(1, c) + "', found " + describe_here());
    }
    ++pos_;
  }

  bool accept_char(char c) {
    skip_ws();
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Predicate predicate() {
    Predicate p;
    p.metric = metric();
    p.op = comparison();
    p.threshold = number();
    return p;
  }

  MetricRef metric() {
    const std::size_t start = skip_ws();
    const std::string name = identifier("metric name");
    if (name == "defect_content") {
      if (!accept_char('(')) return MetricRef::defect_content();
      qualifier_key("severity");
      skip_ws();
      const std::size_t label_start = pos_;
      while (pos_ < text_.size() && is_label_char(text_[pos_])) ++pos_;
      std::string label = normalize_label(text_.substr(label_start, pos_ - label_start));
      if (label.empty()) throw ParseError("severity label must not be empty", label_start);
      expect_char(')');
      return MetricRef::defect_content_with_severity(std::move(label));
    }
    if (name == "defect_density") return MetricRef::of(MetricKind::defect_density);
    if (name == "defect_density_kloc") return MetricRef::of(MetricKind::defect_density_kloc);
    if (name == "loc") return MetricRef::of(MetricKind::loc);
    if (name == "mean_method_length") return MetricRef::of(MetricKind::mean_method_length);
    if (name == "metric") {
      expect_char('(');
      skip_ws();
      if (at_end() || text_[pos_] != '"') fail("expected quoted metric name");
      const std::size_t name_start = ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\') fail("escapes are not allowed in metric names");
        ++pos_;
      }
      if (at_end()) throw ParseError("unterminated metric name", name_start - 1);
      std::string metric_name(text_.substr(name_start, pos_ - name_start));
      ++pos_;
      if (trim(metric_name).empty() || trim(metric_name) != metric_name) {
        throw ParseError("metric name must be non-empty without surrounding blanks", name_start);
      }
      expect_char(')');
      return MetricRef::named(std::move(metric_name));
    }
    if (name == "history_defects") {
      expect_char('(');
      qualifier_key("last");
      const std::size_t value_pos = skip_ws();
      const std::size_t digits_start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      int last = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + digits_start, text_.data() + pos_, last);
      if (ec != std::errc{} || pos_ == digits_start || last < 1) {
        throw ParseError("history_defects qualifier 'last' must be an integer >= 1", value_pos);
      }
      expect_char(')');
      return MetricRef::history(last);
    }
    throw ParseError("unknown metric '" + name + "'", start);
  }

  void qualifier_key(std::string_view key) {
    const std::size_t start = skip_ws();
    const std::string got = identifier("qualifier");
    if (got != key) {
      throw ParseError("malformed qualifier '" + got + "' (expected " + std::string(key) + "=...)",
                       start);
    }
    expect_char('=');
  }

  CompareOp comparison() {
    skip_ws();
    auto next_is = [this](std::string_view op) { return text_.substr(pos_, op.size()) == op; };
    if (next_is(">=")) return pos_ += 2, CompareOp::greater_equal;
    if (next_is("<=")) return pos_ += 2, CompareOp::less_equal;
    if (next_is("==")) return pos_ += 2, CompareOp::equal;
    if (next_is(">")) return pos_ += 1, CompareOp::greater;
    if (next_is("<")) return pos_ += 1, CompareOp::less;
    fail("expected comparison operator, found " + describe_here());
  }

  double number() {
    const std::size_t start = skip_ws();
    std::size_t end = start;
    auto digits = [&] {
      const std::size_t from = end;
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
      return end - from;
    };
    if (end < text_.size() && (text_[end] == '+' || text_[end] == '-')) ++end;
    std::size_t mantissa = digits();
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      mantissa += digits();
    }
    if (mantissa == 0) fail("expected number, found " + describe_here());
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp_start = end++;
      if (end < text_.size() && (text_[end] == '+' || text_[end] == '-')) ++end;
      if (digits() == 0) throw ParseError("malformed exponent", exp_start);
    }
    // from_chars rejects a leading '+'.
    const std::size_t parse_from = text_[start] == '+' ? start + 1 : start;
    double value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + parse_from, text_.data() + end, value);
    if (ec != std::errc{} || ptr != text_.data() + end || !std::isfinite(value)) {
      throw ParseError("threshold is not a finite number", start);
    }
    pos_ = end;
    if (!at_end() && (is_ident_char(text_[pos_]) || text_[pos_] == '.')) {
      fail("unexpected " + describe_here() + " after number");
    }
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string render_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace

SelectionRule parse_rule(std::string_view text) { return RuleParser(text).parse(); }

std::string render_metric(const MetricRef& metric) {
  switch (metric.kind) {
    case MetricKind::defect_content:
      return metric.argument.empty() ? "defect_content"
                                     : "defect_content(severity=" + metric.argument + ")";
    case MetricKind::defect_density:
      return "defect_density";
    case MetricKind::defect_density_kloc:
      return "defect_density_kloc";
    case MetricKind::loc:
      return "loc";
    case MetricKind::mean_method_length:
      return "mean_method_length";
    case MetricKind::named:
      return "metric(\"" + metric.argument + "\")";
    case MetricKind::history_defects:
      return "history_defects(last=" + std::to_string(metric.last) + ")";
  }
  return {};
}

std::string render_rule(const SelectionRule& rule) {
  std::string out = "focus ";
  out += to_string(rule.scope);
  out += " where ";
  for (std::size_t i = 0; i < rule.predicates.size(); ++i) {
    const Predicate& p = rule.predicates[i];
    if (i > 0) out += " & ";
    out += render_metric(p.metric);
    out += ' ';
    out += to_string(p.op);
    out += ' ';
    out += render_number(p.threshold);
  }
  return out;
}

double resolve_metric(const MetricRef& metric, const PartStats& part) {
  auto require = [&](std::optional<double> v) {
    if (!v) throw MissingMetricError(part.part_id, render_metric(metric));
    return *v;
  };
  switch (metric.kind) {
    case MetricKind::defect_content: {
      if (metric.argument.empty()) return static_cast<double>(part.inspection_defect_content);
      auto it = part.severity_counts.find(metric.argument);
      return it == part.severity_counts.end() ? 0.0 : static_cast<double>(it->second);
    }
    case MetricKind::defect_density:
      return require(part.defect_density);
    case MetricKind::defect_density_kloc:
      return 1000.0 * require(part.defect_density);
    case MetricKind::loc:
      return require(part.metric("loc"));
    case MetricKind::mean_method_length:
      return require(part.metric("mean_method_length"));
    case MetricKind::named:
      return require(part.metric(metric.argument));
    case MetricKind::history_defects: {
      auto it = part.history_defects.find(metric.last);
      if (it == part.history_defects.end()) return require(std::nullopt);
      return static_cast<double>(it->second);
    }
  }
  return require(std::nullopt);
}

std::set<std::string> evaluate_rule(const SelectionRule& rule, const StatsTable& stats) {
  std::set<std::string> selected;
  auto satisfies_all = [&rule](auto&& value_of) {
    return std::all_of(rule.predicates.begin(), rule.predicates.end(), [&](const Predicate& p) {
      return compare(value_of(p.metric), p.op, p.threshold);
    });
  };

  if (rule.scope == RuleScope::parts) {
    for (const auto& [id, part] : stats) {
      // Resolve every predicate before deciding so that missing data is
      // reported even when an earlier predicate already failed.
      bool keep = true;
      for (const Predicate& p : rule.predicates) {
        keep = compare(resolve_metric(p.metric, part), p.op, p.threshold) && keep;
      }
      if (keep) selected.insert(id);
    }
    return selected;
  }

  CountMap totals;
  for (const auto& [id, part] : stats) {
    for (const auto& [type, count] : part.inspection_type_counts) totals[type] += count;
  }
  for (const auto& [type, count] : totals) {
    if (satisfies_all([&](const MetricRef&) { return static_cast<double>(count); })) {
      selected.insert(type);
    }
  }
  return selected;
}

double derive_threshold(std::span<const double> values, double fraction) {
  if (values.empty()) throw std::invalid_argument("derive_threshold needs at least one value");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("derive_threshold fraction must lie in (0, 1]");
  }
  return fraction * *std::max_element(values.begin(), values.end());
}

}  // namespace in2test
