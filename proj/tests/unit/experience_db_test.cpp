#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "in2test/error.hpp"
#include "in2test/experience_db.hpp"
#include "in2test/io.hpp"
#include "test_support.hpp"

namespace in2test {
namespace {

ExperienceElement element(std::string id, std::size_t significance, ContextProfile ctx = {},
                          std::string rule = "focus parts where defect_content > 25") {
  ExperienceElement e;
  e.element_id = std::move(id);
  e.rule = std::move(rule);
  e.assumption = {"A1", "Pareto distribution of defects", Derivation::empirical_observed};
  e.context = std::move(ctx);
  e.significance = significance;
  return e;
}

RecordOptions opts(std::string project = "P1") {
  RecordOptions o;
  o.project_id = std::move(project);
  o.timestamp = "2026-01-01T00:00:00Z";
  return o;
}

const ContextProfile kLow{{{"inspector_experience", "low"}}};
const ContextProfile kHigh{{{"inspector_experience", "high"}}};

TEST(MatchContext, SubsetMatches) {
  EXPECT_TRUE(match_context({{{"inspector_experience", "low"}, {"team_size", "5"}}}, kLow));
}

TEST(MatchContext, DifferentValueFails) { EXPECT_FALSE(match_context(kHigh, kLow)); }

TEST(MatchContext, EmptyStoredIsWildcard) {
  EXPECT_TRUE(match_context(kHigh, {}));
  EXPECT_TRUE(match_context({}, {}));
  EXPECT_FALSE(match_context({}, kLow));
}

TEST(RecordOutcome, CorrectIncrements) {
  ExperienceDb db{{element("e1", 3, kLow)}};
  db = record_outcome(db, "e1", Outcome::correct(), opts());
  EXPECT_EQ(db.find("e1")->significance, 4u);
  ASSERT_EQ(db.find("e1")->history.size(), 1u);
  EXPECT_EQ(db.find("e1")->history[0].outcome, "correct");
}

TEST(RecordOutcome, IncorrectRetiresAndReplaces) {
  ExperienceDb db{{element("e1", 3, kLow)}};
  RecordOptions o = opts();
  o.replacement = element("e2", 9, {}, "focus parts where defect_density > 0.05 & loc > 500");
  db = record_outcome(db, "e1", Outcome::incorrect(), o);
  EXPECT_TRUE(db.find("e1")->retired);
  EXPECT_EQ(db.find("e1")->significance, 3u);
  const ExperienceElement* replacement = db.find("e2");
  ASSERT_NE(replacement, nullptr);
  EXPECT_EQ(replacement->significance, 1u);
  EXPECT_FALSE(replacement->retired);
  EXPECT_EQ(replacement->context, kLow);  // inherits the context it replaces
}

TEST(RecordOutcome, IncorrectNeedsReplacement) {
  ExperienceDb db{{element("e1", 3)}};
  EXPECT_THROW(record_outcome(db, "e1", Outcome::incorrect(), opts()), InputError);
}

TEST(RecordOutcome, UnknownOrRetiredElement) {
  ExperienceDb db{{element("e1", 3)}};
  EXPECT_THROW(record_outcome(db, "nope", Outcome::correct(), opts()), InputError);
  db.elements[0].retired = true;
  EXPECT_THROW(record_outcome(db, "e1", Outcome::correct(), opts()), InputError);
}

TEST(RecordOutcome, ContextMismatchIncrementsExistingElement) {
  ExperienceDb db{{element("low", 3, kLow), element("high", 5, kHigh)}};
  db = record_outcome(db, "low", Outcome::context_mismatch(kHigh, true), opts());
  EXPECT_EQ(db.find("low")->significance, 3u);
  EXPECT_TRUE(db.find("low")->history.empty());
  EXPECT_EQ(db.find("high")->significance, 6u);
  EXPECT_EQ(db.elements.size(), 2u);
}

TEST(RecordOutcome, ContextMismatchCreatesElementUnderActualContext) {
  ExperienceDb db{{element("low", 3, kLow)}};
  db = record_outcome(db, "low", Outcome::context_mismatch(kHigh, false), opts());
  EXPECT_EQ(db.find("low")->significance, 3u);
  const ExperienceElement* created = db.find("low.ctx1");
  ASSERT_NE(created, nullptr);
  EXPECT_EQ(created->significance, 1u);
  EXPECT_EQ(created->context, kHigh);
  EXPECT_EQ(created->rule, db.find("low")->rule);
}

TEST(RecordOutcome, ContextMismatchWithoutSuccessDoesNotIncrement) {
  ExperienceDb db{{element("low", 3, kLow), element("high", 5, kHigh)}};
  db = record_outcome(db, "low", Outcome::context_mismatch(kHigh, false), opts());
  EXPECT_EQ(db.find("high")->significance, 5u);
  EXPECT_EQ(db.find("low.ctx1")->significance, 1u);
}

TEST(SelectCandidates, OrdersBySignificance) {
  ExperienceDb db{{element("b", 1, kLow), element("a", 4), element("c", 9, kHigh)}};
  const auto out = select_candidates(db, kLow);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].element_id, "a");
  EXPECT_EQ(out[1].element_id, "b");
}

TEST(SelectCandidates, EmptyAndRetired) {
  EXPECT_TRUE(select_candidates({}, kLow).empty());
  ExperienceDb db{{element("a", 4)}};
  db.elements[0].retired = true;
  EXPECT_TRUE(select_candidates(db, kLow).empty());
}

TEST(SelectCandidates, TiesById) {
  ExperienceDb db{{element("z", 2), element("m", 2), element("a", 2)}};
  const auto out = select_candidates(db, {});
  EXPECT_EQ(out[0].element_id, "a");
  EXPECT_EQ(out[2].element_id, "z");
}

TEST(Persistence, RoundTripIsByteStable) {
  testing::TempDir dir;
  ExperienceDb db{{element("e1", 3, kLow)}};
  db.elements[0].extra["owner"] = "qa-team";
  db = record_outcome(db, "e1", Outcome::correct(), opts());
  save_edb(dir / "edb.json", db);
  const std::string first = testing::read_file(dir / "edb.json");
  const ExperienceDb loaded = load_edb(dir / "edb.json");
  EXPECT_EQ(loaded, db);
  save_edb(dir / "edb.json", loaded);
  EXPECT_EQ(testing::read_file(dir / "edb.json"), first);
  EXPECT_NE(first.find("\"owner\": \"qa-team\""), std::string::npos);
}

TEST(Persistence, MissingFileIsEmpty) {
  testing::TempDir dir;
  EXPECT_TRUE(load_edb(dir / "absent.json").elements.empty());
}

TEST(Persistence, RejectsInvalidDocuments) {
  EXPECT_THROW(edb_from_json(nlohmann::json::object()), InputError);
  nlohmann::json bad = to_json(ExperienceDb{{element("e1", 1)}});
  bad[0]["significance"] = -1;
  EXPECT_THROW(edb_from_json(bad), InputError);
  nlohmann::json dup = to_json(ExperienceDb{{element("e1", 1), element("e1", 2)}});
  EXPECT_THROW(edb_from_json(dup), InputError);
  nlohmann::json badrule = to_json(ExperienceDb{{element("e1", 1)}});
  badrule[0]["rule"] = "focus parts where nonsense > 1";
  EXPECT_THROW(edb_from_json(badrule), ParseError);
}

// Random outcome sequences: invariants hold, persistence round-trips, and
// replaying the same events reproduces the same database.
TEST(RecordOutcome, RandomSequencesKeepInvariants) {
  const std::vector<ContextProfile> contexts = {kLow, kHigh, {}, {{{"team", "small"}}}};
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    struct Event {
      std::string id;
      Outcome outcome;
      RecordOptions options;
    };
    std::vector<Event> events;
    ExperienceDb db{{element("root", 0, kLow)}};
    int fresh = 0;
    for (int step = 0; step < 40; ++step) {
      std::vector<std::string> live;
      for (const auto& e : db.elements) {
        if (!e.retired) live.push_back(e.element_id);
      }
      ASSERT_FALSE(live.empty());
      Event ev;
      ev.id = live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)];
      ev.options = opts("P" + std::to_string(step));
      switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0:
          ev.outcome = Outcome::correct();
          break;
        case 1:
          ev.outcome = Outcome::incorrect();
          ev.options.replacement = element("r" + std::to_string(++fresh), 0);
          break;
        default:
          ev.outcome = Outcome::context_mismatch(
              contexts[std::uniform_int_distribution<std::size_t>(0, 3)(rng)],
              std::bernoulli_distribution(0.5)(rng));
      }
      const ExperienceDb before = db;
      db = record_outcome(db, ev.id, ev.outcome, ev.options);
      for (const auto& old : before.elements) {
        const ExperienceElement* now = db.find(old.element_id);
        ASSERT_NE(now, nullptr);
        if (!now->retired) ASSERT_GE(now->significance, old.significance);
      }
      for (const auto& e : db.elements) {
        if (e.significance == 0 && !e.retired) ASSERT_TRUE(e.history.empty());
      }
      events.push_back(std::move(ev));
    }
    ASSERT_EQ(edb_from_json(nlohmann::json::parse(dump_edb(db))), db);

    ExperienceDb replay{{element("root", 0, kLow)}};
    for (const Event& ev : events) replay = record_outcome(replay, ev.id, ev.outcome, ev.options);
    ASSERT_EQ(dump_edb(replay), dump_edb(db));
  }
}

TEST(FileLock, SerializesWriters) {
  testing::TempDir dir;
  const auto path = dir / "edb.json";
  save_edb(path, ExperienceDb{{element("e1", 0)}});
  auto bump = [&] {
    for (int i = 0; i < 25; ++i) {
      FileLock lock(path);
      ExperienceDb db = load_edb(path);
      db = record_outcome(db, "e1", Outcome::correct(), opts());
      save_edb(path, db);
    }
  };
  std::thread a(bump), b(bump);
  a.join();
  b.join();
  EXPECT_EQ(load_edb(path).find("e1")->significance, 50u);
}

}  // namespace
}  // namespace in2test
