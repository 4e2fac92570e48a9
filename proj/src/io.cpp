#include "in2test/io.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "in2test/error.hpp"

namespace in2test {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

// Rows after the header, each with exactly `header.size()` cells.
std::vector<std::vector<std::string>> read_table(std::istream& in, const std::string& origin,
                                                 const std::vector<std::string>& header) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::string>> rows;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split(line);
    if (!saw_header) {
      if (cells != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw InputError(origin + ":" + std::to_string(line_no) + ": expected header '" +
                         expected + "'");
      }
      saw_header = true;
      continue;
    }
    if (cells.size() != header.size()) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " columns, found " +
                       std::to_string(cells.size()));
    }
    rows.push_back(std::move(cells));
  }
  if (!saw_header) throw InputError(origin + ": missing header line");
  return rows;
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError(where + ": '" + text + "' is not a number");
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<DefectRecord> read_defects_csv(std::istream& in, const std::string& origin) {
  std::vector<DefectRecord> out;
  std::size_t row = 1;
  for (auto& cells : read_table(in, origin, {"part_id", "phase", "defect_type", "severity"})) {
    ++row;
    if (cells[0].empty()) throw InputError(origin + ": row " + std::to_string(row) + ": empty part_id");
    out.push_back({cells[0], parse_phase(cells[1]), cells[2], cells[3]});
  }
  return out;
}

std::vector<PartMetrics> read_metrics_csv(std::istream& in, const std::string& origin) {
  std::map<std::string, PartMetrics> grouped;
  for (auto& cells : read_table(in, origin, {"part_id", "metric", "value"})) {
    const std::string where = origin + " (" + cells[0] + ", " + cells[1] + ")";
    if (cells[0].empty() || cells[1].empty()) throw InputError(where + ": empty part_id or metric");
    PartMetrics& m = grouped[cells[0]];
    m.part_id = cells[0];
    if (!m.entries.emplace(cells[1], parse_number<double>(cells[2], where)).second) {
      throw InputError(where + ": duplicate metric");
    }
  }
  std::vector<PartMetrics> out;
  for (auto& [id, m] : grouped) out.push_back(std::move(m));
  return out;
}

std::vector<HistoryRecord> read_history_csv(std::istream& in, const std::string& origin) {
  std::vector<HistoryRecord> out;
  for (auto& cells : read_table(in, origin, {"part_id", "release_id", "defect_count"})) {
    const std::string where = origin + " (" + cells[0] + ", " + cells[1] + ")";
    out.push_back({cells[0], cells[1], parse_number<long long>(cells[2], where)});
  }
  return out;
}

std::vector<DefectRecord> load_defects(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_defects_csv(in, path.string());
}

std::vector<PartMetrics> load_metrics(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_metrics_csv(in, path.string());
}

std::vector<HistoryRecord> load_history(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_history_csv(in, path.string());
}

json load_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

ContextProfile parse_context_json(const json& j) {
  if (!j.is_object()) throw InputError("context must be an object of factor -> value");
  ContextProfile ctx;
  for (const auto& [factor, value] : j.items()) {
    if (!value.is_string()) throw InputError("context factor '" + factor + "' must be a string");
    ctx.factors[factor] = value.get<std::string>();
  }
  return ctx;
}

ContextProfile load_context(const std::filesystem::path& path) {
  return parse_context_json(load_json(path));
}

std::vector<RuleEntry> parse_rules_json(const json& j) {
  if (!j.is_array()) throw InputError("rules document must be a list");
  std::vector<RuleEntry> out;
  std::set<std::string> ids;
  for (const json& item : j) {
    if (!item.is_object() || !item.contains("id") || !item.contains("rule") ||
        !item["id"].is_string() || !item["rule"].is_string()) {
      throw InputError("each rule needs string fields 'id' and 'rule'");
    }
    const std::string id = item["id"].get<std::string>();
    if (!ids.insert(id).second) throw InputError("duplicate rule id '" + id + "'");
    RuleEntry entry;
    try {
      entry.rule = parse_rule(item["rule"].get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError("rule " + id + ": " + e.what(), e.position());
    }
    entry.rule.id = id;
    entry.rule.assumption_id = item.value("assumption_id", "");
    if (item.contains("context")) entry.context = parse_context_json(item["context"]);
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<RuleEntry> load_rules(const std::filesystem::path& path) {
  return parse_rules_json(load_json(path));
}

MonitorInput parse_monitor_json(const json& j) {
  if (!j.is_object()) throw InputError("monitor config must be an object");
  MonitorInput input;
  auto bounds = [&j](const char* key) -> std::optional<Bounds> {
    if (!j.contains(key)) return std::nullopt;
    const json& b = j[key];
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
      throw InputError(std::string(key) + " must be [min, max]");
    }
    return Bounds{b[0].get<double>(), b[1].get<double>()};
  };
  if (j.contains("min_total_inspection_defects")) {
    const json& v = j["min_total_inspection_defects"];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw InputError("min_total_inspection_defects must be a non-negative integer");
    }
    input.config.min_total_inspection_defects = v.get<std::size_t>();
  }
  input.config.reading_rate_bounds = bounds("reading_rate_bounds");
  input.config.defects_per_kloc_bounds = bounds("defects_per_kloc_bounds");
  const std::string source = j.value("source", "historical");
  if (source == "historical") {
    input.config.source = ThresholdSource::historical;
  } else if (source == "literature") {
    input.config.source = ThresholdSource::literature;
  } else {
    throw InputError("monitor source must be historical or literature");
  }
  if (j.contains("inspection")) {
    const json& m = j["inspection"];
    if (!m.is_object() || !m.contains("inspected_loc") || !m.contains("inspection_hours")) {
      throw InputError("inspection needs inspected_loc and inspection_hours");
    }
    input.meta = InspectionMeta{m["inspected_loc"].get<double>(), m["inspection_hours"].get<double>()};
  }
  input.config.validate();
  return input;
}

MonitorInput load_monitor_config(const std::filesystem::path& path) {
  return parse_monitor_json(load_json(path));
}

json to_json(const MonitorReport& report) {
  json findings = json::array();
  for (const Finding& f : report.findings) {
    json item = {{"check", f.check}, {"bound", f.bound}, {"level", std::string(to_string(f.level))}};
    item["observed"] = f.observed ? json(*f.observed) : json(nullptr);
    if (!f.note.empty()) item["note"] = f.note;
    findings.push_back(std::move(item));
  }
  return {{"verdict", std::string(to_string(report.verdict))}, {"findings", std::move(findings)}};
}

json to_json(const PrioritizationPlan& plan) {
  json j = {{"rule_id", plan.rule_id},
            {"strategy", std::string(to_string(plan.strategy))},
            {"prioritized_parts", plan.prioritized_parts},
            {"flags", plan.flags}};
  if (plan.part_types) j["prioritized_types"] = *plan.part_types;
  if (plan.global_types) j["prioritized_types"] = *plan.global_types;
  if (plan.allocations) j["allocations"] = *plan.allocations;
  return j;
}

PrioritizationPlan plan_from_json(const json& j) {
  if (!j.is_object() || !j.contains("prioritized_parts")) {
    throw InputError("plan needs a prioritized_parts list");
  }
  PrioritizationPlan plan;
  try {
    plan.rule_id = j.value("rule_id", "");
    plan.prioritized_parts = j.at("prioritized_parts").get<std::vector<std::string>>();
    if (j.contains("strategy")) plan.strategy = parse_strategy(j["strategy"].get<std::string>());
    if (j.contains("prioritized_types")) {
      const json& t = j["prioritized_types"];
      if (t.is_object()) {
        plan.part_types = t.get<std::map<std::string, std::vector<std::string>>>();
      } else {
        plan.global_types = t.get<std::vector<std::string>>();
      }
    }
    if (j.contains("allocations")) plan.allocations = j["allocations"].get<std::map<std::string, double>>();
    if (j.contains("flags")) plan.flags = j["flags"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed plan: ") + e.what());
  }
  return plan;
}

json to_json(const RedirectDecision& decision) {
  json j = {{"verdict", decision.verdict == RedirectVerdict::keep ? "keep" : "redirect"},
            {"reason", decision.reason}};
  j["replacement_rule_id"] =
      decision.replacement_rule_id ? json(*decision.replacement_rule_id) : json(nullptr);
  return j;
}

std::string render_evaluation_csv(const std::vector<RuleEvaluation>& evaluations) {
  std::ostringstream out;
  out << "rule_id,selection,category,precision,recall,f_measure\n";
  for (const RuleEvaluation& ev : evaluations) {
    out << ev.rule_id << ',';
    if (!ev.evaluable()) {
      out << ",unevaluable,,,\n";
      continue;
    }
    bool first = true;
    for (const std::string& id : ev.selected) {
      out << (first ? "" : ";") << id;
      first = false;
    }
    out << ',' << to_string(ev.category) << ',' << format_fixed2(ev.precision) << ','
        << format_fixed2(ev.recall) << ',' << format_fixed2(ev.f_measure) << '\n';
  }
  return out.str();
}

FileLock::FileLock(const std::filesystem::path& path) {
  const std::string lock_path = path.string() + ".lock";
  fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw InputError("cannot open lock file " + lock_path + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX) != 0) {
    const int err = errno;
    ::close(fd_);
    throw InputError("cannot lock " + lock_path + ": " + std::strerror(err));
  }
}

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace in2test
