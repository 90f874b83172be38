#include "swb/session.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "swb/error.h"
#include "swb/ingest.h"
#include "synthetic.h"

namespace swb {
namespace {

using Ids = std::vector<std::string>;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

std::shared_ptr<const Schema> ddl(const std::string& text, const std::string& id) {
  return std::make_shared<const Schema>(parse_ddl(text, id).schema);
}

// Left: a five-column table and a two-column table. Right: two types.
struct Toy {
  std::shared_ptr<const Schema> left =
      ddl("CREATE TABLE All_Event_Vitals (DATE_BEGIN DATE, DATE_END DATE, LOCATION_CODE INT,"
          " REMARKS VARCHAR(80), SEVERITY INT);\n"
          "CREATE TABLE Person (LAST_NAME VARCHAR(40), FIRST_NAME VARCHAR(40));",
          "a");
  std::shared_ptr<const Schema> right =
      ddl("CREATE TABLE Event (BeginDate DATE, EndDate DATE, Location INT, Notes VARCHAR(9));\n"
          "CREATE TABLE Individual (Surname VARCHAR(40), GivenName VARCHAR(40));",
          "b");
  Session session{"toy"};

  Toy() {
    session.set_clock(testing::stepping_clock());
    session.add_schema(left, SchemaRef{"a.json", sha256_hex(write_canonical(*left))});
    session.add_schema(right, SchemaRef{"b.json", sha256_hex(write_canonical(*right))});
    session.add_matrix(std::make_shared<const MatchMatrix>(match(left, right, MatchConfig{})));
  }
};

TEST(AssignConceptTest, SubtreeBecomesConcept) {
  Toy t;
  const ConceptLabel& c = t.session.assign_concept(
      "a", "Event", element_ids(*t.left, subtree_elements(*t.left, "a:1")));
  EXPECT_EQ(c.id, "a/C1");
  EXPECT_EQ(c.member_element_ids, (Ids{"a:1", "a:2", "a:3", "a:4", "a:5", "a:6"}));
  const Summary s = t.session.summary("a");
  EXPECT_EQ(s.concepts.size(), 1u);
  EXPECT_EQ(s.unassigned_element_ids, (Ids{"a:7", "a:8", "a:9"}));
}

TEST(AssignConceptTest, ConflictNamesElement) {
  Toy t;
  t.session.assign_concept("a", "Event", {"a:1", "a:2"});
  try {
    t.session.assign_concept("a", "Person", {"a:2"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConflict);
    EXPECT_NE(std::string(e.what()).find("a:2"), std::string::npos);
  }
  EXPECT_EQ(t.session.events().size(), 1u);
}

TEST(AssignConceptTest, SameNameExtends) {
  Toy t;
  t.session.assign_concept("a", "Event", {"a:1"});
  const ConceptLabel& c = t.session.assign_concept("a", "Event", {"a:3", "a:2"});
  EXPECT_EQ(c.id, "a/C1");
  EXPECT_EQ(c.member_element_ids, (Ids{"a:1", "a:2", "a:3"}));
}

TEST(AssignConceptTest, UnknownElementAndEmptySet) {
  Toy t;
  EXPECT_EQ(kind_of([&] { t.session.assign_concept("a", "X", {"a:99"}); }), ErrorKind::kUnknownId);
  EXPECT_EQ(kind_of([&] { t.session.assign_concept("a", "X", {}); }), ErrorKind::kValidation);
  EXPECT_EQ(kind_of([&] { t.session.assign_concept("zz", "X", {"a:1"}); }), ErrorKind::kUnknownId);
}

TEST(SummaryTest, SyntheticFixtureConceptCounts) {
  auto left = testing::synthetic_left(1);
  auto right = testing::synthetic_right(1);
  Session s;
  s.add_schema(left);
  s.add_schema(right);
  for (const auto& sc : {left, right}) {
    for (const auto& sug : suggest_concepts(*sc)) s.assign_concept(sc->id(), sug.name, sug.member_element_ids);
  }
  const Summary a = s.summary("left");
  const Summary b = s.summary("right");
  EXPECT_EQ(a.concepts.size(), 140u);
  EXPECT_EQ(b.concepts.size(), 51u);
  for (const Summary* sum : {&a, &b}) {
    std::size_t assigned = 0;
    for (const auto& c : sum->concepts) assigned += c.member_element_ids.size();
    EXPECT_EQ(assigned + sum->unassigned_element_ids.size(), s.schema(sum->schema_id).element_count());
  }
}

TEST(SummaryTest, PartitionInvariantUnderRandomAssignments) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Session s = testing::random_session(seed);
    for (const auto& sid : s.schema_ids()) {
      const Summary sum = s.summary(sid);
      std::set<std::string> seen(sum.unassigned_element_ids.begin(), sum.unassigned_element_ids.end());
      std::size_t total = sum.unassigned_element_ids.size();
      for (const auto& c : sum.concepts) {
        seen.insert(c.member_element_ids.begin(), c.member_element_ids.end());
        total += c.member_element_ids.size();
      }
      EXPECT_EQ(total, s.schema(sid).element_count());
      EXPECT_EQ(seen.size(), total);
    }
  }
}

TEST(SuggestConceptsTest, RankedByDescendants) {
  Toy t;
  const auto sug = suggest_concepts(*t.left);
  ASSERT_EQ(sug.size(), 2u);
  EXPECT_EQ(sug[0].name, "All_Event_Vitals");
  EXPECT_EQ(sug[0].descendant_count, 5u);
  EXPECT_EQ(sug[0].member_element_ids.size(), 6u);
  EXPECT_EQ(sug[1].name, "Person");
  EXPECT_EQ(sug[1].descendant_count, 2u);
}

TEST(SuggestConceptsTest, FlatSchemaHasNone) {
  const Schema flat = Schema::from_tree("f", "f", SourceFormat::kCanonical,
                                        {SchemaNode{{}, "A", {}, {}, {}}, SchemaNode{{}, "B", {}, {}, {}}});
  EXPECT_TRUE(suggest_concepts(flat).empty());
}

TEST(SuggestConceptsTest, OnePerTableWithColumns) {
  auto s = ddl("CREATE TABLE A (x INT); CREATE VIEW B (y, z) AS SELECT x, x FROM A; CREATE TABLE C (q INT);", "s");
  EXPECT_EQ(suggest_concepts(*s).size(), 3u);
}

TEST(IncrementalMatchTest, HundredElementConceptAgainstRight) {
  std::string text = "CREATE TABLE Big (";
  for (int i = 0; i < 99; ++i) text += (i ? ", COL_" : "COL_") + std::to_string(i) + " INT";
  text += ");";
  auto left = ddl(text, "big");
  auto right = testing::synthetic_right(3);
  ASSERT_EQ(left->element_count(), 100u);
  ASSERT_EQ(right->element_count(), 784u);
  Session s;
  s.add_schema(left);
  s.add_schema(right);
  s.add_matrix(std::make_shared<const MatchMatrix>(match(left, right, MatchConfig{})));
  const ConceptLabel& c = s.assign_concept("big", "Big", element_ids(*left, all_elements(*left)));
  const IncrementalResult r = s.incremental_match(c.id);
  EXPECT_EQ(r.pairs_considered, 78'400u);
  for (const Link& l : r.links) EXPECT_GE(l.score, s.threshold());
}

TEST(IncrementalMatchTest, EmptyOpposingSchema) {
  auto left = ddl("CREATE TABLE T (A INT);", "l");
  auto empty = std::make_shared<const Schema>(Schema::from_tree("e", "e", SourceFormat::kCanonical, {}));
  Session s;
  s.add_schema(left);
  s.add_schema(empty);
  s.add_matrix(std::make_shared<const MatchMatrix>(match(left, empty, MatchConfig{})));
  const ConceptLabel& c = s.assign_concept("l", "T", {"l:1", "l:2"});
  const IncrementalResult r = s.incremental_match(c.id);
  EXPECT_EQ(r.pairs_considered, 0u);
  EXPECT_TRUE(r.links.empty());
}

TEST(IncrementalMatchTest, SingletonConceptOneLinkAboveThreshold) {
  // Identical long, documented names under identically named parents agree
  // on every voter; the parent table and Quux share no doc or children.
  auto left = ddl("CREATE TABLE Patient_Record (ADMISSION_DATE_TIME_STAMP DATE COMMENT"
                  " 'moment the patient was admitted to hospital care');",
                  "l");
  Session s;
  s.add_schema(left);
  auto three = std::make_shared<const Schema>(Schema::from_tree(
      "r", "r", SourceFormat::kCanonical,
      {SchemaNode{{}, "Patient_Record", {}, {},
                  {SchemaNode{{}, "ADMISSION_DATE_TIME_STAMP", "moment the patient was admitted to hospital care", {}, {}},
                   SchemaNode{{}, "Quux", {}, {}, {}}}}}));
  ASSERT_EQ(three->element_count(), 3u);
  s.add_schema(three);
  s.add_matrix(std::make_shared<const MatchMatrix>(match(left, three, MatchConfig{})));
  const ConceptLabel& c = s.assign_concept("l", "Admission", {"l:2"});
  const IncrementalResult r = s.incremental_match(c.id);
  EXPECT_EQ(r.pairs_considered, 3u);
  ASSERT_EQ(r.links.size(), 1u);
  EXPECT_EQ(r.links[0].left, 1u);
  EXPECT_EQ(r.links[0].right, 1u);
}

TEST(IncrementalMatchTest, UnknownConcept) {
  Toy t;
  EXPECT_EQ(kind_of([&] { t.session.incremental_match("a/C9"); }), ErrorKind::kUnknownId);
}

TEST(IncrementalMatchTest, RightSideConceptUsesColumns) {
  Toy t;
  const ConceptLabel& c = t.session.assign_concept("b", "Event", {"b:1", "b:2"});
  const IncrementalResult r = t.session.incremental_match(c.id, -1.0);
  EXPECT_EQ(r.pairs_considered, 2 * t.left->element_count());
  for (const Link& l : r.links) EXPECT_LE(l.right, 1u);
  EXPECT_EQ(r.links.size(), r.pairs_considered);
}

TEST(RecordDecisionTest, AcceptWithAnnotation) {
  Toy t;
  const MatchDecision& d = record_decision(t.session, "a:2", "b:2", DecisionStatus::kAccepted,
                                           Annotation::kEquivalent, "kim", "lee");
  EXPECT_EQ(d.status, DecisionStatus::kAccepted);
  EXPECT_EQ(d.annotation, Annotation::kEquivalent);
  EXPECT_EQ(d.author, "kim");
  EXPECT_EQ(d.assignee, "lee");
  EXPECT_EQ(t.session.events().size(), 1u);
}

TEST(RecordDecisionTest, AcceptThenRejectLogsBoth) {
  Toy t;
  record_decision(t.session, "a:2", "b:2", DecisionStatus::kAccepted);
  record_decision(t.session, "a:2", "b:2", DecisionStatus::kRejected);
  EXPECT_EQ(t.session.decision("a:2", "b:2")->status, DecisionStatus::kRejected);
  EXPECT_EQ(t.session.events().size(), 2u);
  EXPECT_EQ(t.session.decisions().size(), 1u);
}

TEST(RecordDecisionTest, ReversedOrientationIsSamePair) {
  Toy t;
  record_decision(t.session, "b:2", "a:2", DecisionStatus::kCandidate);
  const auto d = t.session.decision("a:2", "b:2");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->left_id, "a:2");
  EXPECT_EQ(d->right_id, "b:2");
}

TEST(RecordDecisionTest, Transitions) {
  Toy t;
  record_decision(t.session, "a:2", "b:2", DecisionStatus::kAccepted);
  EXPECT_EQ(kind_of([&] { record_decision(t.session, "a:2", "b:2", DecisionStatus::kCandidate); }),
            ErrorKind::kIllegalTransition);
  record_decision(t.session, "a:3", "b:3", DecisionStatus::kCandidate);
  record_decision(t.session, "a:3", "b:3", DecisionStatus::kRejected);
  record_decision(t.session, "a:3", "b:3", DecisionStatus::kAccepted);
  EXPECT_EQ(t.session.decision("a:3", "b:3")->status, DecisionStatus::kAccepted);
}

TEST(RecordDecisionTest, UnknownPair) {
  Toy t;
  EXPECT_EQ(kind_of([&] { record_decision(t.session, "a:2", "a:3", DecisionStatus::kAccepted); }),
            ErrorKind::kUnknownPair);
  EXPECT_EQ(kind_of([&] { record_decision(t.session, "a:2", "b:99", DecisionStatus::kAccepted); }),
            ErrorKind::kUnknownPair);
  EXPECT_TRUE(t.session.events().empty());
}

TEST(ConceptMatchTest, AllAcceptedIntoOneConcept) {
  Toy t;
  t.session.assign_concept("a", "Event", {"a:1", "a:2", "a:3", "a:4", "a:5", "a:6"});
  t.session.assign_concept("b", "Event", {"b:1", "b:2", "b:3", "b:4", "b:5"});
  for (auto [l, r] : {std::pair{"a:2", "b:2"}, {"a:3", "b:3"}, {"a:4", "b:4"}, {"a:5", "b:5"}}) {
    record_decision(t.session, l, r, DecisionStatus::kAccepted);
  }
  const auto m = derive_concept_matches(t.session);
  EXPECT_EQ(m, (std::vector<ConceptMatch>{{"a/C1", "b/C1", 4}}));
  EXPECT_EQ(t.session.concept_matches(), m);
}

TEST(ConceptMatchTest, TieEmitsNothing) {
  Toy t;
  t.session.assign_concept("a", "Event", {"a:1", "a:2", "a:3", "a:4", "a:5", "a:6"});
  t.session.assign_concept("b", "Event", {"b:1", "b:2", "b:3"});
  t.session.assign_concept("b", "Individual", {"b:6", "b:7", "b:8"});
  for (auto [l, r] : {std::pair{"a:2", "b:2"}, {"a:3", "b:3"}, {"a:4", "b:7"}, {"a:5", "b:8"}}) {
    record_decision(t.session, l, r, DecisionStatus::kAccepted);
  }
  EXPECT_TRUE(t.session.compute_concept_matches().empty());
  // A third accepted link into Event breaks the tie.
  record_decision(t.session, "a:6", "b:1", DecisionStatus::kAccepted);
  EXPECT_EQ(t.session.compute_concept_matches(),
            (std::vector<ConceptMatch>{{"a/C1", "b/C1", 3}}));
}

TEST(ConceptMatchTest, RejectedAndUnassignedIgnored) {
  Toy t;
  t.session.assign_concept("a", "Person", {"a:8", "a:9"});
  t.session.assign_concept("b", "Individual", {"b:7"});
  record_decision(t.session, "a:8", "b:7", DecisionStatus::kRejected);
  record_decision(t.session, "a:9", "b:8", DecisionStatus::kAccepted);
  EXPECT_TRUE(t.session.compute_concept_matches().empty());
}

TEST(ConceptMatchTest, ManyToOneAllowed) {
  Toy t;
  t.session.assign_concept("a", "Event", {"a:2"});
  t.session.assign_concept("a", "Person", {"a:8"});
  t.session.assign_concept("b", "Event", {"b:2", "b:3"});
  record_decision(t.session, "a:2", "b:2", DecisionStatus::kAccepted);
  record_decision(t.session, "a:8", "b:3", DecisionStatus::kAccepted);
  EXPECT_EQ(t.session.compute_concept_matches(),
            (std::vector<ConceptMatch>{{"a/C1", "b/C1", 1}, {"a/C2", "b/C1", 1}}));
}

TEST(PersistenceTest, RoundTrip) {
  Toy t;
  t.session.assign_concept("a", "Event", {"a:1", "a:2"});
  t.session.assign_concept("b", "Event", {"b:1", "b:2"});
  record_decision(t.session, "a:2", "b:2", DecisionStatus::kAccepted, Annotation::kIsA, "x", "y");
  derive_concept_matches(t.session);
  const std::string text = save_session(t.session);
  const Session back = load_session(text, testing::memory_environment({t.left, t.right}));
  EXPECT_EQ(back, t.session);
  EXPECT_EQ(back.events(), t.session.events());
  EXPECT_EQ(save_session(back), text);
}

TEST(PersistenceTest, TruncatedIsIntegrityError) {
  Toy t;
  record_decision(t.session, "a:2", "b:2", DecisionStatus::kAccepted);
  const std::string text = save_session(t.session);
  const auto env = testing::memory_environment({t.left, t.right});
  for (std::size_t cut : {std::size_t{0}, text.size() / 3, text.size() / 2, text.size() - 2}) {
    EXPECT_EQ(kind_of([&] { load_session(text.substr(0, cut), env); }), ErrorKind::kIntegrity) << cut;
  }
}

TEST(PersistenceTest, UnsupportedVersion) {
  Toy t;
  std::string text = save_session(t.session);
  const std::string key = "\"format_version\":";
  auto pos = text.find(key);
  ASSERT_NE(pos, std::string::npos);
  pos = text.find("\"1\"", pos + key.size());
  text.replace(pos, 3, "\"9\"");
  EXPECT_EQ(kind_of([&] { load_session(text, testing::memory_environment({t.left, t.right})); }),
            ErrorKind::kVersion);
}

TEST(PersistenceTest, EditedSchemaFailsHashCheck) {
  Toy t;
  const std::string text = save_session(t.session);
  auto edited = ddl("CREATE TABLE All_Event_Vitals (DATE_BEGIN DATE);", "a");
  EXPECT_EQ(kind_of([&] { load_session(text, testing::memory_environment({edited, t.right})); }),
            ErrorKind::kIntegrity);
}

TEST(PersistenceTest, ThousandDecisions) {
  auto left = testing::synthetic_left(4);
  std::mt19937_64 rng(4);
  auto right = std::make_shared<const Schema>(testing::random_schema(rng, "r", 60));
  MatchConfig config;
  config.threads = 1;
  Session s("big", config);
  s.set_clock(testing::stepping_clock());
  s.add_schema(left, SchemaRef{"left.json", sha256_hex(write_canonical(*left))});
  s.add_schema(right, SchemaRef{"r.json", sha256_hex(write_canonical(*right))});
  s.add_matrix(std::make_shared<const MatchMatrix>(match(left, right, config)));
  std::set<std::pair<std::size_t, std::size_t>> used;
  while (used.size() < 1000) {
    const std::size_t i = rng() % left->element_count();
    const std::size_t j = rng() % right->element_count();
    if (!used.insert({i, j}).second) continue;
    record_decision(s, left->element(i).id, right->element(j).id,
                    rng() % 2 ? DecisionStatus::kAccepted : DecisionStatus::kRejected);
  }
  const Session back = load_session(save_session(s), testing::memory_environment({left, right}));
  EXPECT_EQ(back.decisions().size(), 1000u);
  EXPECT_EQ(back.decisions(), s.decisions());
  EXPECT_EQ(back.compute_concept_matches(), s.compute_concept_matches());
}

TEST(PersistenceTest, FileRoundTripResolvesRelativePaths) {
  Toy t;
  const auto dir = std::filesystem::temp_directory_path() / "swb_session_test";
  std::filesystem::create_directories(dir);
  for (const auto& sc : {t.left, t.right}) {
    std::ofstream(dir / (sc->id() + ".json")) << write_canonical(*sc);
  }
  record_decision(t.session, "a:2", "b:2", DecisionStatus::kAccepted);
  const std::string path = (dir / "toy.session.json").string();
  save_session_file(t.session, path);
  EXPECT_EQ(load_session_file(path), t.session);
  std::filesystem::remove_all(dir);
}

TEST(ReplayTest, ReproducesRandomSessions) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Session s = testing::random_session(seed);
    EXPECT_EQ(s.replay(), s) << seed;
  }
}

TEST(TimestampTest, RoundTrip) {
  const Timestamp t{std::chrono::milliseconds(1'700'000'000'123)};
  EXPECT_EQ(format_timestamp(t), "2023-11-14T22:13:20.123Z");
  EXPECT_EQ(parse_timestamp(format_timestamp(t)), t);
  EXPECT_EQ(kind_of([] { parse_timestamp("yesterday"); }), ErrorKind::kIntegrity);
}

}  // namespace
}  // namespace swb
