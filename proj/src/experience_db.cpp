#include "in2test/experience_db.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "in2test/error.hpp"
#include "in2test/rule_dsl.hpp"

namespace in2test {

using nlohmann::json;

const ExperienceElement* ExperienceDb::find(std::string_view element_id) const {
  auto it = std::find_if(elements.begin(), elements.end(),
                         [&](const ExperienceElement& e) { return e.element_id == element_id; });
  return it == elements.end() ? nullptr : &*it;
}

ExperienceElement* ExperienceDb::find(std::string_view element_id) {
  return const_cast<ExperienceElement*>(std::as_const(*this).find(element_id));
}

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::correct:
      return "correct";
    case OutcomeKind::incorrect:
      return "incorrect";
    case OutcomeKind::context_mismatch:
      return "context_mismatch";
  }
  return "correct";
}

OutcomeKind parse_outcome(std::string_view text) {
  if (text == "correct") return OutcomeKind::correct;
  if (text == "incorrect") return OutcomeKind::incorrect;
  if (text == "context_mismatch") return OutcomeKind::context_mismatch;
  throw InputError("unknown outcome '" + std::string(text) + "'");
}

bool match_context(const ContextProfile& query, const ContextProfile& stored) {
  return std::all_of(stored.factors.begin(), stored.factors.end(), [&](const auto& factor) {
    auto it = query.factors.find(factor.first);
    return it != query.factors.end() && it->second == factor.second;
  });
}

namespace {

void insert_new(ExperienceDb& db, ExperienceElement element, const HistoryEntry& entry) {
  if (element.element_id.empty()) throw InputError("replacement element needs an element_id");
  if (db.find(element.element_id)) {
    throw InputError("element '" + element.element_id + "' already exists");
  }
  parse_rule(element.rule);
  element.significance = 1;
  element.retired = false;
  element.history.push_back(entry);
  db.elements.push_back(std::move(element));
}

std::string fresh_context_id(const ExperienceDb& db, const std::string& base) {
  for (std::size_t n = 1;; ++n) {
    std::string id = base + ".ctx" + std::to_string(n);
    if (!db.find(id)) return id;
  }
}

}  // namespace

ExperienceDb record_outcome(ExperienceDb db, std::string_view element_id, const Outcome& outcome,
                            const RecordOptions& options) {
  ExperienceElement* element = db.find(element_id);
  if (!element) throw InputError("unknown element '" + std::string(element_id) + "'");
  if (element->retired) throw InputError("element '" + std::string(element_id) + "' is retired");

  const HistoryEntry entry{options.project_id, std::string(to_string(outcome.kind)),
                           options.category, options.timestamp};
  const HistoryEntry adopted{options.project_id, "adopted", options.category, options.timestamp};

  switch (outcome.kind) {
    case OutcomeKind::correct:
      element->significance += 1;
      element->history.push_back(entry);
      break;

    case OutcomeKind::incorrect: {
      if (!options.replacement) {
        throw InputError("an incorrect outcome needs a replacement rule and assumption");
      }
      element->retired = true;
      element->history.push_back(entry);
      ExperienceElement replacement = *options.replacement;
      if (replacement.context.factors.empty()) replacement.context = element->context;
      insert_new(db, std::move(replacement), adopted);
      break;
    }

    case OutcomeKind::context_mismatch: {
      // The original stays as is: it was never tested under its own context.
      const std::string rule = element->rule;
      ExperienceElement* existing = nullptr;
      for (ExperienceElement& other : db.elements) {
        if (other.retired || other.element_id == element_id || other.rule != rule) continue;
        if (match_context(outcome.actual_context, other.context)) {
          existing = &other;
          break;
        }
      }
      if (existing && outcome.succeeded) {
        existing->significance += 1;
        existing->history.push_back(
            {options.project_id, "correct", options.category, options.timestamp});
        break;
      }
      ExperienceElement created;
      if (options.replacement) {
        created = *options.replacement;
      } else {
        created = *element;
        created.element_id = fresh_context_id(db, element->element_id);
        created.history.clear();
      }
      created.context = outcome.actual_context;
      insert_new(db, std::move(created), adopted);
      break;
    }
  }
  return db;
}

std::vector<ExperienceElement> select_candidates(const ExperienceDb& db,
                                                 const ContextProfile& context) {
  std::vector<ExperienceElement> out;
  for (const ExperienceElement& e : db.elements) {
    if (!e.retired && match_context(context, e.context)) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const ExperienceElement& a, const ExperienceElement& b) {
    if (a.significance != b.significance) return a.significance > b.significance;
    return a.element_id < b.element_id;
  });
  return out;
}

namespace {

const std::set<std::string> kElementKeys = {"element_id", "rule",    "assumption", "context",
                                            "significance", "retired", "history"};

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("edb element is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("edb field '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const ExperienceElement& element) {
  json j = element.extra.is_object() ? element.extra : json::object();
  j["element_id"] = element.element_id;
  j["rule"] = element.rule;
  j["assumption"] = {{"id", element.assumption.id},
                     {"statement", element.assumption.statement},
                     {"derivation", std::string(to_string(element.assumption.derivation))}};
  j["context"] = element.context.factors;
  j["significance"] = element.significance;
  j["retired"] = element.retired;
  json history = json::array();
  for (const HistoryEntry& h : element.history) {
    history.push_back({{"project_id", h.project_id},
                       {"outcome", h.outcome},
                       {"category", h.category},
                       {"timestamp", h.timestamp}});
  }
  j["history"] = std::move(history);
  return j;
}

ExperienceElement element_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("edb element must be an object");
  ExperienceElement e;
  e.element_id = required<std::string>(j, "element_id");
  if (e.element_id.empty()) throw InputError("edb element_id must not be empty");
  e.rule = required<std::string>(j, "rule");
  parse_rule(e.rule);

  const json assumption = required<json>(j, "assumption");
  e.assumption.id = required<std::string>(assumption, "id");
  e.assumption.statement = assumption.value("statement", "");
  e.assumption.derivation = parse_derivation(assumption.value("derivation", "analytic"));

  if (j.contains("context")) {
    e.context.factors = required<std::map<std::string, std::string>>(j, "context");
  }
  const auto significance = required<long long>(j, "significance");
  if (significance < 0) throw InputError("edb significance must be non-negative");
  e.significance = static_cast<std::size_t>(significance);
  e.retired = j.value("retired", false);
  if (j.contains("history")) {
    for (const json& h : required<json>(j, "history")) {
      e.history.push_back({h.value("project_id", ""), h.value("outcome", ""),
                           h.value("category", ""), h.value("timestamp", "")});
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (!kElementKeys.contains(key)) e.extra[key] = value;
  }
  return e;
}

nlohmann::json to_json(const ExperienceDb& db) {
  json j = json::array();
  for (const ExperienceElement& e : db.elements) j.push_back(to_json(e));
  return j;
}

ExperienceDb edb_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("edb document must be a list of elements");
  ExperienceDb db;
  for (const json& item : j) {
    ExperienceElement e = element_from_json(item);
    if (db.find(e.element_id)) throw InputError("duplicate element '" + e.element_id + "'");
    db.elements.push_back(std::move(e));
  }
  return db;
}

std::string dump_edb(const ExperienceDb& db) { return to_json(db).dump(2) + "\n"; }

ExperienceDb load_edb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    if (!std::filesystem::exists(path)) return {};
    throw InputError("cannot read " + path.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return edb_from_json(j);
}

void save_edb(const std::filesystem::path& path, const ExperienceDb& db) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << dump_edb(db);
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace in2test
