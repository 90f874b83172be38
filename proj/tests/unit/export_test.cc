#include "swb/export.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "swb/ingest.h"
#include "synthetic.h"

namespace swb {
namespace {

std::vector<std::string> lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t count_type(const std::string& csv, std::string_view type) {
  std::size_t n = 0;
  for (const auto& l : lines(csv)) n += l.rfind(std::string(type) + ",", 0) == 0;
  return n;
}

std::size_t data_rows(const std::string& csv) { return lines(csv).size() - 1; }

Session session_over(std::shared_ptr<const Schema> a, std::shared_ptr<const Schema> b) {
  MatchConfig config;
  config.threads = 1;
  Session s("s", config);
  s.set_clock(testing::stepping_clock());
  s.add_schema(a);
  s.add_schema(b);
  s.add_matrix(std::make_shared<const MatchMatrix>(match(a, b, config)));
  return s;
}

void assign_suggestions(Session& s, const Schema& schema) {
  for (const auto& sug : suggest_concepts(schema)) s.assign_concept(schema.id(), sug.name, sug.member_element_ids);
}

// 140 one-column tables and 51 one-member types: the concept counts of the
// full fixture at a fraction of the matching cost.
Session concept_fixture(std::size_t matches) {
  auto left = std::make_shared<const Schema>(parse_ddl(testing::synthetic_ddl(5, 140, 280), "left").schema);
  auto right = std::make_shared<const Schema>(parse_xsd(testing::synthetic_xsd(6, 51, 102, 1), "right").schema);
  Session s = session_over(left, right);
  assign_suggestions(s, *left);
  assign_suggestions(s, *right);
  const auto lc = s.concepts("left");
  const auto rc = s.concepts("right");
  for (std::size_t k = 0; k < matches; ++k) {
    record_decision(s, lc[k].member_element_ids.front(), rc[k].member_element_ids.front(),
                    DecisionStatus::kAccepted);
  }
  return s;
}

TEST(ConceptSheetTest, OneToOneMatches) {
  const Session s = concept_fixture(24);
  ASSERT_EQ(s.concepts("left").size(), 140u);
  ASSERT_EQ(s.concepts("right").size(), 51u);
  ASSERT_EQ(s.compute_concept_matches().size(), 24u);
  const std::string csv = export_concept_sheet(s);
  EXPECT_EQ(data_rows(csv), 167u);
  EXPECT_EQ(count_type(csv, kMatched), 24u);
  EXPECT_EQ(count_type(csv, kLeftOnly), 116u);
  EXPECT_EQ(count_type(csv, kRightOnly), 27u);
  EXPECT_EQ(lines(csv)[0], "row_type,left_concept,left_member_count,right_concept,right_member_count,support");
}

TEST(ConceptSheetTest, NoMatches) {
  EXPECT_EQ(data_rows(export_concept_sheet(concept_fixture(0))), 191u);
}

TEST(ConceptSheetTest, HeaderOnly) {
  auto a = std::make_shared<const Schema>(parse_ddl("CREATE TABLE T (A INT);", "a").schema);
  auto b = std::make_shared<const Schema>(parse_ddl("CREATE TABLE U (B INT);", "b").schema);
  const Session s = session_over(a, b);
  EXPECT_EQ(data_rows(export_concept_sheet(s)), 0u);
  EXPECT_EQ(data_rows(export_concept_sheet(Session{})), 0u);
  EXPECT_EQ(data_rows(export_element_sheet(Session{})), 0u);
}

TEST(ConceptSheetTest, RowIdentityOnRandomOneToOneMatchings) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 40; ++round) {
    auto a = std::make_shared<const Schema>(testing::random_schema(rng, "a", 30));
    auto b = std::make_shared<const Schema>(testing::random_schema(rng, "b", 30));
    Session s = session_over(a, b);
    assign_suggestions(s, *a);
    assign_suggestions(s, *b);
    const auto lc = s.concepts("a");
    const auto rc = s.concepts("b");
    std::vector<std::size_t> perm(rc.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t m = std::min(lc.size(), rc.size()) == 0 ? 0 : rng() % (std::min(lc.size(), rc.size()) + 1);
    for (std::size_t k = 0; k < m; ++k) {
      record_decision(s, lc[k].member_element_ids.front(), rc[perm[k]].member_element_ids.front(),
                      DecisionStatus::kAccepted);
    }
    EXPECT_EQ(data_rows(export_concept_sheet(s)), lc.size() + rc.size() - m) << round;
  }
}

TEST(ElementSheetTest, ToyOuterJoin) {
  auto a = std::make_shared<const Schema>(Schema::from_tree(
      "a", "a", SourceFormat::kCanonical, {SchemaNode{{}, "Alpha", {}, {}, {}}, SchemaNode{{}, "Beta", {}, {}, {}}}));
  auto b = std::make_shared<const Schema>(Schema::from_tree(
      "b", "b", SourceFormat::kCanonical, {SchemaNode{{}, "Gamma", {}, {}, {}}, SchemaNode{{}, "Delta", {}, {}, {}}}));
  Session s = session_over(a, b);
  record_decision(s, "a:1", "b:2", DecisionStatus::kAccepted, Annotation::kRelated);
  record_decision(s, "a:2", "b:1", DecisionStatus::kRejected);
  const std::string score = format_score(s.matrices()[0]->score(0, 1));
  EXPECT_EQ(export_element_sheet(s),
            "row_type,left_concept,left_path,right_concept,right_path,score,status,annotation\n"
            "MATCHED,,Alpha,,Delta," + score + ",accepted,related\n"
            "LEFT_ONLY,,Beta,,,,,\n"
            "RIGHT_ONLY,,,,Gamma,,,\n");
}

TEST(ElementSheetTest, RightOnlyFixture) {
  std::string text = "CREATE TABLE Wide (";
  for (int i = 0; i < 299; ++i) text += (i ? ", C" : "C") + std::to_string(i) + " INT";
  text += ");";
  auto left = std::make_shared<const Schema>(parse_ddl(text, "left").schema);
  auto right = testing::synthetic_right(7);
  Session s = session_over(left, right);
  for (std::size_t j = 0; j < 267; ++j) {
    record_decision(s, left->element(j).id, right->element(j * 2).id, DecisionStatus::kAccepted);
  }
  const std::string csv = export_element_sheet(s);
  EXPECT_EQ(count_type(csv, kRightOnly), 517u);
  EXPECT_EQ(count_type(csv, kMatched), 267u);
  EXPECT_EQ(count_type(csv, kLeftOnly), 300u - 267u);

  const RenderedReport r = render_report(partition(s, "left", "right"));
  EXPECT_NE(r.text.find("\nRIGHT_ONLY: 517 (66%)\n"), std::string::npos);
  EXPECT_NE(r.text.find("\nCOMMON: 267 (34%)\n"), std::string::npos);
}

TEST(ElementSheetTest, RowIdentityOnRandomSessions) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Session s = testing::random_session(seed);
    const MatchMatrix& m = *s.matrices()[0];
    const auto accepted = s.accepted_pairs(m);
    std::vector<bool> l(m.rows(), false), r(m.cols(), false);
    for (auto [i, j] : accepted) l[i] = r[j] = true;
    const std::size_t expected = accepted.size() + std::count(l.begin(), l.end(), false) +
                                 std::count(r.begin(), r.end(), false);
    EXPECT_EQ(data_rows(export_element_sheet(s)), expected) << seed;
  }
}

TEST(ElementSheetTest, SortedByConceptThenPath) {
  auto a = std::make_shared<const Schema>(
      parse_ddl("CREATE TABLE Zed (B INT, A INT); CREATE TABLE Alpha (Q INT);", "a").schema);
  auto b = std::make_shared<const Schema>(parse_ddl("CREATE TABLE U (C INT);", "b").schema);
  Session s = session_over(a, b);
  s.assign_concept("a", "Zulu", {"a:1"});
  s.assign_concept("a", "Mike", {"a:2", "a:3"});
  const auto rows = lines(export_element_sheet(s));
  ASSERT_EQ(rows.size(), 1u + 5u + 2u);
  EXPECT_EQ(rows[1], "LEFT_ONLY,,Alpha,,,,,");
  EXPECT_EQ(rows[2], "LEFT_ONLY,,Alpha/Q,,,,,");
  EXPECT_EQ(rows[3], "LEFT_ONLY,Mike,Zed/A,,,,,");
  EXPECT_EQ(rows[4], "LEFT_ONLY,Mike,Zed/B,,,,,");
  EXPECT_EQ(rows[5], "LEFT_ONLY,Zulu,Zed,,,,,");
}

TEST(MatrixExportTest, Thresholds) {
  auto a = std::make_shared<const Schema>(Schema::from_tree(
      "a", "a", SourceFormat::kCanonical, {SchemaNode{{}, "Alpha", {}, {}, {}}, SchemaNode{{}, "Beta", {}, {}, {}}}));
  auto b = std::make_shared<const Schema>(Schema::from_tree(
      "b", "b", SourceFormat::kCanonical, {SchemaNode{{}, "Alpha", {}, {}, {}}, SchemaNode{{}, "Delta", {}, {}, {}}}));
  const MatchMatrix m = match(a, b, MatchConfig{});
  const std::string all = export_matrix(m, -1.0 + 1e-9);
  EXPECT_EQ(data_rows(all), 4u);
  EXPECT_EQ(lines(all)[0], "left_path,right_path,score,name_token,name_edit,doc_token,structure");
  const double top = *std::max_element(m.scores().begin(), m.scores().end());
  EXPECT_GE(data_rows(export_matrix(m, std::nextafter(top, -1.0))), 1u);
  EXPECT_EQ(data_rows(export_matrix(m, 1.0 - 1e-9)), 0u);
}

TEST(CsvTest, Quoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(csv_field(""), "");
  const std::string row[] = {"x", "y,z"};
  EXPECT_EQ(csv_row(row), "x,\"y,z\"\n");
}

TEST(RenderTest, EmptyCommon) {
  auto a = std::make_shared<const Schema>(parse_ddl("CREATE TABLE T (A INT);", "a").schema);
  auto b = std::make_shared<const Schema>(parse_ddl("CREATE TABLE U (B INT);", "b").schema);
  const Session s = session_over(a, b);
  const RenderedReport r = render_report(partition(s, "a", "b"));
  EXPECT_NE(r.text.find("COMMON: 0 (0%)"), std::string::npos);
  EXPECT_NE(r.text.find("LEFT_ONLY: 2 (100%)"), std::string::npos);
  EXPECT_NE(r.json.find("\"commonPercent\": 0"), std::string::npos);
}

TEST(RenderTest, ThreeSchemaVocabularyHasSevenSections) {
  std::mt19937_64 rng(2);
  Corpus c;
  for (const char* id : {"x", "y", "z"}) {
    c.schemas.push_back(std::make_shared<const Schema>(testing::random_schema(rng, id, 6)));
  }
  c.links = {PairwiseLinks{"x", "y", {{0, 0}}}, PairwiseLinks{"x", "z", {}}, PairwiseLinks{"y", "z", {}}};
  const std::string text = render_report(comprehensive_vocabulary(c)).text;
  std::size_t sections = 0;
  for (const auto& l : lines(text)) sections += l.rfind("CELL ", 0) == 0;
  EXPECT_EQ(sections, 7u);
  EXPECT_NE(text.find("CELL {x, y, z}: 0 terms"), std::string::npos);
}

TEST(RenderTest, ClusterAndSearch) {
  DistanceMatrix d;
  d.schema_ids = {"a", "b"};
  d.values = {0, 0.25, 0.25, 0};
  const RenderedReport c = render_report(cluster(d, 0.5), d, 0.5);
  EXPECT_NE(c.text.find("a"), std::string::npos);
  EXPECT_FALSE(c.json.empty());
  const SearchResult results[] = {{"r1", 1.0, 0.7, 3, 3}, {"r2", 0.0, -0.1, 0, 3}};
  const RenderedReport s = render_report(results, "q");
  EXPECT_LT(s.text.find("r1"), s.text.find("r2"));
}

TEST(DeterminismTest, ExportsAreByteStable) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Session s = testing::random_session(seed);
    std::vector<std::shared_ptr<const Schema>> schemas;
    for (const auto& id : s.schema_ids()) schemas.push_back(s.schema_ptr(id));
    const Session back = load_session(save_session(s), testing::memory_environment(schemas));
    EXPECT_EQ(export_concept_sheet(s), export_concept_sheet(back));
    EXPECT_EQ(export_element_sheet(s), export_element_sheet(back));
    EXPECT_EQ(export_matrix(*s.matrices()[0], -0.5), export_matrix(*back.matrices()[0], -0.5));
    EXPECT_EQ(render_report(partition(s, s.schema_ids()[0], s.schema_ids()[1])).json,
              render_report(partition(back, back.schema_ids()[0], back.schema_ids()[1])).json);
  }
}

}  // namespace
}  // namespace swb
