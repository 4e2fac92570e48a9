#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "in2test/core_model.hpp"

namespace in2test {

struct HistoryEntry {
  std::string project_id;
  std::string outcome;   // correct | incorrect | context_mismatch | adopted
  std::string category;  // quality category of that run, may be empty
  std::string timestamp;  // ISO-8601

  bool operator==(const HistoryEntry&) const = default;
};

/// A selection rule with its assumption, the context it is trusted in and
/// the number of consecutive successful applications there (significance).
struct ExperienceElement {
  std::string element_id;
  std::string rule;  // rule DSL text
  Assumption assumption;
  ContextProfile context;
  std::size_t significance = 0;
  bool retired = false;
  std::vector<HistoryEntry> history;
  nlohmann::json extra = nlohmann::json::object();  // unknown fields, kept verbatim

  bool operator==(const ExperienceElement&) const = default;
};

struct ExperienceDb {
  std::vector<ExperienceElement> elements;

  const ExperienceElement* find(std::string_view element_id) const;
  ExperienceElement* find(std::string_view element_id);

  bool operator==(const ExperienceDb&) const = default;
};

enum class OutcomeKind { correct, incorrect, context_mismatch };

std::string_view to_string(OutcomeKind kind);
OutcomeKind parse_outcome(std::string_view text);

struct Outcome {
  OutcomeKind kind = OutcomeKind::correct;
  // context_mismatch only: the context the project actually had, and whether
  // the rule was correct under it.
  ContextProfile actual_context;
  bool succeeded = false;

  static Outcome correct() { return {}; }
  static Outcome incorrect() { return {OutcomeKind::incorrect, {}, false}; }
  static Outcome context_mismatch(ContextProfile actual, bool succeeded) {
    return {OutcomeKind::context_mismatch, std::move(actual), succeeded};
  }
};

/// True iff every factor of `stored` has the same value in `query`; factors
/// missing from `stored` match anything.
bool match_context(const ContextProfile& query, const ContextProfile& stored);

struct RecordOptions {
  std::string project_id;
  std::string timestamp;
  std::string category;
  std::optional<ExperienceElement> replacement;
};

/// Applies one retrospective outcome and returns the updated database.
///
///   correct           significance + 1
///   incorrect         element retired; `replacement` stored with significance 1
///   context_mismatch  element untouched; if a live element with the same rule
///                     already matches the actual context and the run
///                     succeeded, its significance + 1; otherwise a new
///                     element (the replacement if given, else a copy) is
///                     created under the actual context with significance 1
///
/// Throws InputError for an unknown or retired element, a missing replacement
/// on an incorrect outcome, or a replacement id that is already taken.
ExperienceDb record_outcome(ExperienceDb db, std::string_view element_id, const Outcome& outcome,
                            const RecordOptions& options);

/// Live elements whose context matches, by significance descending then id.
std::vector<ExperienceElement> select_candidates(const ExperienceDb& db,
                                                 const ContextProfile& context);

nlohmann::json to_json(const ExperienceElement& element);
ExperienceElement element_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperienceDb& db);
ExperienceDb edb_from_json(const nlohmann::json& j);

/// Canonical text form (sorted keys, two-space indent, trailing newline).
std::string dump_edb(const ExperienceDb& db);

/// A missing file loads as an empty database.
ExperienceDb load_edb(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void save_edb(const std::filesystem::path& path, const ExperienceDb& db);

}  // namespace in2test
