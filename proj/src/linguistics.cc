#include "swb/linguistics.h"

#include <algorithm>
#include <cctype>

namespace swb {
namespace {

enum class CharClass { kLower, kUpper, kDigit, kOther, kSeparator };

CharClass classify(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (u >= 0x80) return CharClass::kOther;  // UTF-8 bytes stay inside words
  if (std::islower(u)) return CharClass::kLower;
  if (std::isupper(u)) return CharClass::kUpper;
  if (std::isdigit(u)) return CharClass::kDigit;
  return CharClass::kSeparator;
}

bool is_letter(CharClass c) {
  return c == CharClass::kLower || c == CharClass::kUpper || c == CharClass::kOther;
}

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

const std::vector<std::string>& default_stopwords() {
  // English function words only. Quantifiers and negations ("all", "no",
  // "not") stay: they carry meaning in element names.
  static const std::vector<std::string> kWords = {
      "a",     "an",    "the",   "of",    "in",    "on",    "at",    "to",
      "for",   "by",    "with",  "from",  "into",  "onto",  "upon",  "about",
      "and",   "or",    "nor",   "but",   "as",    "if",    "then",  "than",
      "is",    "are",   "was",   "were",  "be",    "been",  "being", "am",
      "it",    "its",   "this",  "that",  "these", "those", "which", "who",
      "whom",  "whose", "what",  "there", "their", "they",  "them",  "he",
      "she",   "his",   "her",   "we",    "our",   "you",   "your",  "i",
      "me",    "my",    "has",   "have",  "had",   "do",    "does",  "did",
      "so",    "such",  "via",   "per",   "will",  "shall", "would", "should",
      "can",   "could", "may",   "might", "must",  "also",  "each"};
  return kWords;
}

Analyzer::Analyzer()
    : stopwords_(default_stopwords().begin(), default_stopwords().end()) {}

Analyzer::Analyzer(std::unordered_set<std::string> stopwords)
    : stopwords_(std::move(stopwords)) {}

Analyzer Analyzer::from_stopword_text(std::string_view text) {
  std::unordered_set<std::string> words;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    line.erase(0, b);
    if (!line.empty() && line[0] != '#') {
      for (char& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      words.insert(std::move(line));
    }
    pos = end + 1;
  }
  return Analyzer(std::move(words));
}

bool Analyzer::is_stopword(std::string_view token) const {
  return stopwords_.contains(std::string(token));
}

std::vector<std::string> Analyzer::tokenize(std::string_view text) const {
  std::vector<std::string> raw;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) raw.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const CharClass c = classify(text[i]);
    if (c == CharClass::kSeparator) {
      flush();
      continue;
    }
    if (!current.empty()) {
      const CharClass prev = classify(text[i - 1]);
      const bool letter_digit = (is_letter(prev) && c == CharClass::kDigit) ||
                                (prev == CharClass::kDigit && is_letter(c));
      const bool lower_upper = prev == CharClass::kLower && c == CharClass::kUpper;
      // "XMLFile": split before the 'F' that starts a capitalized word.
      const bool acronym_end = prev == CharClass::kUpper && c == CharClass::kUpper &&
                               i + 1 < text.size() &&
                               classify(text[i + 1]) == CharClass::kLower;
      if (letter_digit || lower_upper || acronym_end) flush();
    }
    current.push_back(text[i]);
  }
  flush();

  std::vector<std::string> out;
  out.reserve(raw.size());
  for (std::string& t : raw) {
    for (char& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (all_digits(t) || is_stopword(t)) continue;
    out.push_back(std::move(t));
  }
  return out;
}

TermBag Analyzer::term_bag(std::string_view text, TermSource source) const {
  TermBag bag;
  bag.source = source;
  for (const std::string& t : tokenize(text)) {
    std::string s = stem(t);
    if (!s.empty() && !all_digits(s)) bag.terms.push_back(std::move(s));
  }
  std::sort(bag.terms.begin(), bag.terms.end());
  return bag;
}

TermBag Analyzer::term_bag(const SchemaElement& element, TermSource source) const {
  return term_bag(source == TermSource::kName ? std::string_view(element.name)
                                              : std::string_view(element.documentation),
                  source);
}

const Analyzer& default_analyzer() {
  static const Analyzer kAnalyzer;
  return kAnalyzer;
}

}  // namespace swb
