#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "swb/model.h"

namespace swb {

enum class TermSource { kName, kDocumentation };

// Stemmed, lowercase tokens kept sorted so bags compare by value.
struct TermBag {
  std::vector<std::string> terms;
  TermSource source = TermSource::kName;

  std::size_t size() const { return terms.size(); }
  bool empty() const { return terms.empty(); }
  friend bool operator==(const TermBag&, const TermBag&) = default;
};

// Porter suffix stripping, iterated to a fixed point so that
// stem(stem(x)) == stem(x). Tokens of length <= 2 are returned unchanged.
std::string stem(std::string_view token);

/// Tokenizer plus stopword list.
///
/// Splits on underscores, hyphens, whitespace and punctuation, on
/// lower-to-upper case transitions ("AllEvent" -> all, event), before the
/// last capital of an acronym run ("XMLFile" -> xml, file), and between
/// letters and digits. Tokens are lowercased; all-digit tokens and stopwords
/// are dropped.
class Analyzer {
 public:
  Analyzer();
  explicit Analyzer(std::unordered_set<std::string> stopwords);

  // One token per line; blank lines and lines starting with '#' ignored.
  static Analyzer from_stopword_text(std::string_view text);

  std::vector<std::string> tokenize(std::string_view text) const;
  TermBag term_bag(std::string_view text, TermSource source) const;
  TermBag term_bag(const SchemaElement& element, TermSource source) const;

  bool is_stopword(std::string_view token) const;
  const std::unordered_set<std::string>& stopwords() const { return stopwords_; }

 private:
  std::unordered_set<std::string> stopwords_;
};

const std::vector<std::string>& default_stopwords();
const Analyzer& default_analyzer();

inline std::vector<std::string> tokenize(std::string_view text) {
  return default_analyzer().tokenize(text);
}

inline TermBag term_bag(const SchemaElement& element, TermSource source) {
  return default_analyzer().term_bag(element, source);
}

}  // namespace swb
