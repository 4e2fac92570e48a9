#include "in2test/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "in2test/error.hpp"
#include "in2test/evaluator.hpp"
#include "in2test/experience_db.hpp"
#include "in2test/io.hpp"
#include "in2test/prioritizer.hpp"
#include "in2test/quality_monitor.hpp"
#include "in2test/rule_dsl.hpp"

namespace in2test {

namespace {

struct DataArgs {
  std::string defects;
  std::string metrics;
  std::string history;
};

struct Options {
  DataArgs data;
  std::string rules;
  std::string rule_id;
  std::string context;
  std::string monitor_config;
  std::string db;
  std::string out;
  std::optional<double> budget;
  std::string strategy = "top";
  double share = 0.8;
  std::size_t top_k = 3;
  bool two_stage = false;
  std::size_t tolerance = 0;
  std::string ordering = "by_defect_content";
  bool skip_monitor = false;

  // edb record
  std::string element;
  std::string outcome;
  std::string project;
  std::string category;
  std::string timestamp;
  std::string replacement;
  bool succeeded = false;

  // redirect
  std::string plan;
  std::string interim;
};

void add_data_flags(CLI::App* cmd, DataArgs& data, bool required = true) {
  auto* d = cmd->add_option("--defects", data.defects, "defects.csv (part_id,phase,defect_type,severity)");
  auto* m = cmd->add_option("--metrics", data.metrics, "metrics.csv (part_id,metric,value)");
  if (required) {
    d->required();
    m->required();
  }
  cmd->add_option("--history", data.history, "history.csv (part_id,release_id,defect_count)");
}

StatsTable load_stats(const DataArgs& data) {
  const auto defects = load_defects(data.defects);
  const auto metrics = load_metrics(data.metrics);
  std::vector<HistoryRecord> history;
  if (!data.history.empty()) history = load_history(data.history);
  return compute_part_stats(defects, metrics, history);
}

MonitorReport run_monitor(const StatsTable& stats, const std::string& config_path) {
  MonitorInput input;
  if (!config_path.empty()) input = load_monitor_config(config_path);
  return check_profile(stats, input.meta, input.config);
}

std::string current_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw InputError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

const RuleEntry& choose_rule(const std::vector<RuleEntry>& rules, const Options& opt,
                             const std::optional<ContextProfile>& context) {
  if (rules.empty()) throw InputError("rules file contains no rules");
  for (const RuleEntry& entry : rules) {
    if (!opt.rule_id.empty()) {
      if (entry.rule.id == opt.rule_id) return entry;
    } else if (!context || match_context(*context, entry.context)) {
      return entry;
    }
  }
  if (!opt.rule_id.empty()) throw InputError("no rule with id '" + opt.rule_id + "'");
  throw InputError("no rule matches the given context");
}

int cmd_monitor(const Options& opt, std::ostream& out, std::ostream& err) {
  const StatsTable stats = load_stats(opt.data);
  const MonitorReport report = run_monitor(stats, opt.monitor_config);
  Output sink(opt.out, out);
  sink.stream() << to_json(report).dump(2) << '\n';
  if (report.verdict == Level::warn) err << "quality monitor: warnings present\n";
  if (report.verdict == Level::fail) {
    err << "quality monitor: inspection profile failed the gate\n";
    return kExitMonitorFailed;
  }
  return kExitOk;
}

int cmd_prioritize(const Options& opt, std::ostream& out, std::ostream& err) {
  const StatsTable stats = load_stats(opt.data);
  const auto rules = load_rules(opt.rules);
  std::optional<ContextProfile> context;
  if (!opt.context.empty()) context = load_context(opt.context);
  const RuleEntry& chosen = choose_rule(rules, opt, context);
  const Ordering ordering = parse_ordering(opt.ordering);
  const EffortStrategy strategy = parse_strategy(opt.strategy);

  std::optional<MonitorReport> report;
  if (!opt.skip_monitor) {
    report = run_monitor(stats, opt.monitor_config);
    if (report->verdict == Level::fail) {
      out << to_json(*report).dump(2) << '\n';
      err << "quality monitor: inspection profile failed the gate (use --skip-monitor to override)\n";
      return kExitMonitorFailed;
    }
    if (report->verdict == Level::warn) err << "quality monitor: warnings present\n";
  }

  PrioritizationPlan plan;
  try {
    plan = opt.two_stage ? two_stage(chosen.rule, stats, opt.top_k, ordering)
                         : prioritize(chosen.rule, stats, ordering);
    if (opt.budget) {
      std::set<std::string> all_parts;
      for (const auto& [id, part] : stats) all_parts.insert(id);
      plan = allocate_effort(std::move(plan), *opt.budget, strategy, all_parts, opt.share);
    } else {
      plan.strategy = strategy;
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  for (const std::string& flag : plan.flags) err << "note: " << flag << '\n';

  nlohmann::json j = to_json(plan);
  if (report) j["monitor"] = to_json(*report);
  Output sink(opt.out, out);
  sink.stream() << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_evaluate(const Options& opt, std::ostream& out, std::ostream& err) {
  const StatsTable stats = load_stats(opt.data);
  const auto entries = load_rules(opt.rules);
  std::vector<SelectionRule> rules;
  for (const RuleEntry& e : entries) rules.push_back(e.rule);
  const auto evaluations = evaluate_ruleset(rules, stats, {opt.tolerance});

  for (const RuleEvaluation& ev : evaluations) {
    if (!ev.evaluable()) err << "rule " << ev.rule_id << " unevaluable: " << *ev.error << '\n';
  }
  const auto ranking = rank_by_f_measure(evaluations);
  if (!ranking.empty()) {
    err << "ranked by F-measure:";
    for (std::size_t i : ranking) err << ' ' << evaluations[i].rule_id;
    err << '\n';
  }
  Output sink(opt.out, out);
  sink.stream() << render_evaluation_csv(evaluations);
  return kExitOk;
}

int cmd_redirect(const Options& opt, std::ostream& out, std::ostream&) {
  const StatsTable stats = load_stats(opt.data);
  const PrioritizationPlan plan = plan_from_json(load_json(opt.plan));
  const auto interim = load_defects(opt.interim);
  std::vector<SelectionRule> alternatives;
  if (!opt.rules.empty()) {
    for (const RuleEntry& e : load_rules(opt.rules)) {
      if (e.rule.id != plan.rule_id) alternatives.push_back(e.rule);
    }
  }
  RedirectDecision decision;
  try {
    decision = redirect(plan, interim, alternatives, stats);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  Output sink(opt.out, out);
  sink.stream() << to_json(decision).dump(2) << '\n';
  return kExitOk;
}

int cmd_edb_record(const Options& opt, std::ostream& out, std::ostream&) {
  FileLock lock(opt.db);
  ExperienceDb db = load_edb(opt.db);
  const OutcomeKind kind = parse_outcome(opt.outcome);
  Outcome outcome;
  outcome.kind = kind;
  if (kind == OutcomeKind::context_mismatch) {
    if (opt.context.empty()) throw InputError("context_mismatch needs --context (the actual context)");
    outcome.actual_context = load_context(opt.context);
    outcome.succeeded = opt.succeeded;
  }
  RecordOptions record;
  record.project_id = opt.project;
  record.category = opt.category;
  record.timestamp = opt.timestamp.empty() ? current_timestamp() : opt.timestamp;
  if (!opt.replacement.empty()) record.replacement = element_from_json(load_json(opt.replacement));

  db = record_outcome(std::move(db), opt.element, outcome, record);
  save_edb(opt.db, db);
  const ExperienceElement* updated = db.find(opt.element);
  out << opt.element << ": significance " << updated->significance
      << (updated->retired ? " (retired)" : "") << '\n';
  return kExitOk;
}

int cmd_edb_list(const Options& opt, std::ostream& out, std::ostream&) {
  if (!std::filesystem::exists(opt.db)) throw InputError("no experience database at " + opt.db);
  Output sink(opt.out, out);
  sink.stream() << dump_edb(load_edb(opt.db));
  return kExitOk;
}

int cmd_edb_suggest(const Options& opt, std::ostream& out, std::ostream&) {
  if (!std::filesystem::exists(opt.db)) throw InputError("no experience database at " + opt.db);
  const ExperienceDb db = load_edb(opt.db);
  const ContextProfile context = opt.context.empty() ? ContextProfile{} : load_context(opt.context);
  nlohmann::json j = nlohmann::json::array();
  for (const ExperienceElement& e : select_candidates(db, context)) j.push_back(to_json(e));
  Output sink(opt.out, out);
  sink.stream() << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Inspection-driven test prioritization", "in2test"};
  app.require_subcommand(1);

  auto* monitor = app.add_subcommand("monitor", "Check whether the inspection defect profile is usable");
  add_data_flags(monitor, opt.data);
  monitor->add_option("--monitor-config", opt.monitor_config, "monitor.json");
  monitor->add_option("--out", opt.out, "Write the report here instead of stdout");

  auto* prio = app.add_subcommand("prioritize", "Build a test prioritization plan from a selection rule");
  add_data_flags(prio, opt.data);
  prio->add_option("--rules", opt.rules, "rules.json")->required();
  prio->add_option("--rule-id", opt.rule_id, "Rule to apply (default: first matching rule)");
  prio->add_option("--context", opt.context, "context.json; picks the first rule whose context matches");
  prio->add_option("--monitor-config", opt.monitor_config, "monitor.json");
  prio->add_flag("--skip-monitor", opt.skip_monitor, "Do not run the quality monitor first");
  prio->add_option("--budget", opt.budget, "Test effort to allocate")->check(CLI::PositiveNumber);
  prio->add_option("--strategy", opt.strategy, "top or weighted")->check(CLI::IsMember({"top", "weighted"}));
  prio->add_option("--share", opt.share, "Share of the budget for prioritized parts (weighted)")
      ->check(CLI::Range(0.0, 1.0));
  prio->add_option("--top-k", opt.top_k, "Defect types per part (two-stage)")->check(CLI::PositiveNumber);
  prio->add_flag("--two-stage", opt.two_stage, "Rank defect types inside each selected part");
  prio->add_option("--ordering", opt.ordering, "by_defect_content, by_density or by_id")
      ->check(CLI::IsMember({"by_defect_content", "by_density", "by_id"}));
  prio->add_option("--out", opt.out, "Write the plan here instead of stdout");

  auto* eval = app.add_subcommand("evaluate", "Score selection rules against test defect data");
  add_data_flags(eval, opt.data);
  eval->add_option("--rules", opt.rules, "rules.json")->required();
  eval->add_option("--tolerance", opt.tolerance, "Missed test defects allowed (0 = strong rule)");
  eval->add_option("--out", opt.out, "Write the CSV here instead of stdout");

  auto* redir = app.add_subcommand("redirect", "Decide whether interim test results invalidate a plan");
  add_data_flags(redir, opt.data);
  redir->add_option("--plan", opt.plan, "Plan JSON written by prioritize")->required();
  redir->add_option("--interim", opt.interim, "Interim test defects (defects.csv schema)")->required();
  redir->add_option("--rules", opt.rules, "rules.json with alternative rules");
  redir->add_option("--out", opt.out, "Write the decision here instead of stdout");

  auto* edb = app.add_subcommand("edb", "Maintain the experience database");
  edb->require_subcommand(1);
  auto* record = edb->add_subcommand("record", "Record the outcome of applying an element");
  record->add_option("--db", opt.db, "edb.json")->required();
  record->add_option("--element", opt.element, "Element id")->required();
  record->add_option("--outcome", opt.outcome, "correct, incorrect or context_mismatch")
      ->required()
      ->check(CLI::IsMember({"correct", "incorrect", "context_mismatch"}));
  record->add_option("--project", opt.project, "Project id")->required();
  record->add_option("--category", opt.category, "Quality category of this run");
  record->add_option("--timestamp", opt.timestamp, "ISO-8601 time (default: now, UTC)");
  record->add_option("--replacement", opt.replacement, "JSON element replacing an incorrect one");
  record->add_option("--context", opt.context, "Actual context (context_mismatch)");
  record->add_flag("--succeeded", opt.succeeded, "Rule was correct under the actual context");
  auto* list = edb->add_subcommand("list", "Print every element");
  list->add_option("--db", opt.db, "edb.json")->required();
  list->add_option("--out", opt.out, "Write here instead of stdout");
  auto* suggest = edb->add_subcommand("suggest", "Candidate elements for a context");
  suggest->add_option("--db", opt.db, "edb.json")->required();
  suggest->add_option("--context", opt.context, "context.json");
  suggest->add_option("--out", opt.out, "Write here instead of stdout");

  std::vector<std::string> storage{"in2test"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*monitor) return cmd_monitor(opt, out, err);
    if (*prio) return cmd_prioritize(opt, out, err);
    if (*eval) return cmd_evaluate(opt, out, err);
    if (*redir) return cmd_redirect(opt, out, err);
    if (*record) return cmd_edb_record(opt, out, err);
    if (*list) return cmd_edb_list(opt, out, err);
    if (*suggest) return cmd_edb_suggest(opt, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace in2test
