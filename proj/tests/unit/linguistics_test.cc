#include "swb/linguistics.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "swb/model.h"

namespace swb {
namespace {

using Tokens = std::vector<std::string>;

TEST(TokenizeTest, DropsNumericSuffix) {
  EXPECT_EQ(tokenize("DATE_BEGIN_156"), (Tokens{"date", "begin"}));
}

TEST(TokenizeTest, Empty) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("  _-_ 123 ").empty());
}

TEST(TokenizeTest, CaseTransitions) {
  EXPECT_EQ(tokenize("AllEventVitals"), (Tokens{"all", "event", "vitals"}));
  EXPECT_EQ(default_analyzer().term_bag("AllEventVitals", TermSource::kName).terms,
            (Tokens{"all", "event", "vital"}));
  EXPECT_EQ(tokenize("XMLFile"), (Tokens{"xml", "file"}));
  EXPECT_EQ(tokenize("route66Stops"), (Tokens{"route", "stops"}));
  EXPECT_EQ(tokenize("first-name, last.name"), (Tokens{"first", "name", "last", "name"}));
}

TEST(TermBagTest, DatetimeStem) {
  EXPECT_EQ(default_analyzer().term_bag("DATETIME_FIRST_INFO", TermSource::kName).terms,
            (Tokens{"datetim", "first", "info"}));
}

TEST(TokenizeTest, NeverEmitsStopwordsOrDigits) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "aAbBeEtThH_019 -.";
  const Analyzer& a = default_analyzer();
  for (int i = 0; i < 2000; ++i) {
    std::string s(rng() % 20, ' ');
    for (char& c : s) c = alphabet[rng() % alphabet.size()];
    for (const auto& t : a.tokenize(s)) {
      EXPECT_FALSE(t.empty());
      EXPECT_FALSE(std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }));
      EXPECT_FALSE(a.is_stopword(t)) << t;
    }
  }
}

TEST(StemTest, Examples) {
  EXPECT_EQ(stem("vitals"), "vital");
  EXPECT_EQ(stem("a"), "a");
  EXPECT_EQ(stem("date"), "date");
  EXPECT_EQ(stem("caresses"), "caress");
  EXPECT_EQ(stem("ponies"), "poni");
  EXPECT_EQ(stem("relational"), "relat");
  EXPECT_EQ(stem("hopping"), "hop");
  EXPECT_EQ(stem("generalizations"), "gener");
}

TEST(StemTest, Idempotent) {
  const Tokens sample = {"generalizations", "vitals", "relational", "conditional", "hopefulness",
                         "datetime", "locations", "identifiers", "organization", "operators",
                         "formalities", "sensitivity", "adjustable", "controlling", "agreed"};
  for (const auto& w : sample) EXPECT_EQ(stem(stem(w)), stem(w)) << w;
}

TEST(TermBagTest, NameBag) {
  SchemaElement e;
  e.name = "DATE_BEGIN_156";
  const TermBag bag = term_bag(e, TermSource::kName);
  EXPECT_EQ(bag.terms, (Tokens{"begin", "date"}));
  EXPECT_EQ(bag.source, TermSource::kName);
}

TEST(TermBagTest, DocumentationBag) {
  SchemaElement e;
  EXPECT_TRUE(term_bag(e, TermSource::kDocumentation).empty());
  e.documentation = "the begin date of the event";
  EXPECT_EQ(term_bag(e, TermSource::kDocumentation).terms, (Tokens{"begin", "date", "event"}));
}

TEST(TermBagTest, EqualNamesGiveEqualBags) {
  SchemaElement a, b;
  a.name = b.name = "Event_Location_Code";
  a.documentation = "x";
  EXPECT_EQ(term_bag(a, TermSource::kName), term_bag(b, TermSource::kName));
}

TEST(TermBagTest, KeepsMultiplicity) {
  EXPECT_EQ(default_analyzer().term_bag("name first name", TermSource::kName).terms,
            (Tokens{"first", "name", "name"}));
}

TEST(AnalyzerTest, CustomStopwords) {
  const Analyzer a = Analyzer::from_stopword_text("# comment\nevent\n\n  date \n");
  EXPECT_EQ(a.tokenize("EVENT_DATE_the_begin"), (Tokens{"the", "begin"}));
  EXPECT_TRUE(a.is_stopword("date"));
  EXPECT_FALSE(a.is_stopword("the"));
}

TEST(AnalyzerTest, DefaultListKeepsNegationsAndQuantifiers) {
  for (const char* w : {"all", "no", "not"}) EXPECT_FALSE(default_analyzer().is_stopword(w)) << w;
  for (const char* w : {"the", "of", "and", "a"}) EXPECT_TRUE(default_analyzer().is_stopword(w)) << w;
}

}  // namespace
}  // namespace swb
