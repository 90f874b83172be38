#include <algorithm>
#include <cctype>
#include <cmath>

#include "swb/error.h"
#include "swb/match.h"

namespace swb {
namespace {

constexpr std::size_t kPrefixCredit = 4;

std::vector<std::string> distinct(std::vector<std::string> terms) {
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

std::string_view prefix_key(std::string_view term) { return term.substr(0, kPrefixCredit); }

}  // namespace

std::string_view to_string(VoterId voter) {
  switch (voter) {
    case VoterId::kNameToken: return "name_token";
    case VoterId::kNameEdit: return "name_edit";
    case VoterId::kDocToken: return "doc_token";
    case VoterId::kStructure: return "structure";
  }
  return "name_token";
}

VoterId parse_voter(std::string_view name) {
  for (VoterId v : kAllVoters) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorKind::kUnknownVoter, "unknown voter '" + std::string(name) + "'");
}

double confidence(double similarity, double evidence_mass, double saturation) {
  if (evidence_mass <= 0.0) return 0.0;
  return (2.0 * similarity - 1.0) * evidence_mass / (evidence_mass + saturation);
}

double merge_confidences(std::span<const double> confidences) {
  double num = 0.0;
  double den = 0.0;
  for (double c : confidences) {
    num += c * std::fabs(c);
    den += std::fabs(c);
  }
  return den == 0.0 ? 0.0 : num / den;
}

double merge_votes(std::span<const VoterScore> scores) {
  double num = 0.0;
  double den = 0.0;
  for (const VoterScore& s : scores) {
    num += s.confidence * std::fabs(s.confidence);
    den += std::fabs(s.confidence);
  }
  return den == 0.0 ? 0.0 : num / den;
}

double jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t shared = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(uni);
}

double prefix_credit_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t shared = 0;
  // Tokens of each side not found on the other, in sorted order, so equal
  // four-character prefixes are contiguous.
  std::vector<std::string_view> rest_a, rest_b;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i] < b[j])) {
      rest_a.push_back(a[i++]);
    } else if (i == a.size() || b[j] < a[i]) {
      rest_b.push_back(b[j++]);
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  // Sharing a >= 4-char prefix is an equivalence among long tokens, so the
  // maximum one-to-one pairing is the per-prefix minimum of the two counts.
  std::size_t partial = 0;
  std::size_t p = 0, q = 0;
  while (p < rest_a.size() && q < rest_b.size()) {
    if (rest_a[p].size() < kPrefixCredit) {
      ++p;
      continue;
    }
    if (rest_b[q].size() < kPrefixCredit) {
      ++q;
      continue;
    }
    const std::string_view ka = prefix_key(rest_a[p]);
    const std::string_view kb = prefix_key(rest_b[q]);
    if (ka < kb) {
      ++p;
    } else if (kb < ka) {
      ++q;
    } else {
      std::size_t na = 0, nb = 0;
      while (p < rest_a.size() && rest_a[p].size() >= kPrefixCredit &&
             prefix_key(rest_a[p]) == ka) {
        ++na;
        ++p;
      }
      while (q < rest_b.size() && rest_b[q].size() >= kPrefixCredit &&
             prefix_key(rest_b[q]) == kb) {
        ++nb;
        ++q;
      }
      partial += std::min(na, nb);
    }
  }
  const double uni = static_cast<double>(a.size() + b.size() - shared);
  const double credit = 0.5 * static_cast<double>(partial);
  return (static_cast<double>(shared) + credit) / (uni - credit);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  thread_local std::vector<std::size_t> row;
  row.resize(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

double edit_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

ElementFeatures extract_features(const Schema& schema, ElementIndex element,
                                 const Analyzer& analyzer) {
  const SchemaElement& e = schema.element(element);
  ElementFeatures f;
  TermBag name = analyzer.term_bag(e, TermSource::kName);
  f.name_bag_size = name.size();
  f.name_terms = distinct(std::move(name.terms));
  f.lower_name = e.name;
  for (char& c : f.lower_name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  TermBag doc = analyzer.term_bag(e, TermSource::kDocumentation);
  f.doc_bag_size = doc.size();
  f.doc_terms = distinct(std::move(doc.terms));

  std::vector<std::string> neighbors;
  auto add = [&](ElementIndex n) {
    TermBag b = analyzer.term_bag(schema.element(n), TermSource::kName);
    neighbors.insert(neighbors.end(), b.terms.begin(), b.terms.end());
    ++f.neighbor_count;
  };
  if (e.parent) add(*e.parent);
  for (ElementIndex c : e.children) add(c);
  f.neighbor_terms = distinct(std::move(neighbors));
  return f;
}

std::vector<ElementFeatures> extract_features(const Schema& schema, const Analyzer& analyzer) {
  std::vector<ElementFeatures> out;
  out.reserve(schema.element_count());
  for (ElementIndex i = 0; i < schema.element_count(); ++i) {
    out.push_back(extract_features(schema, i, analyzer));
  }
  return out;
}

VoterScore vote(VoterId voter, const ElementFeatures& left, const ElementFeatures& right,
                double saturation) {
  VoterScore s;
  s.voter = voter;
  switch (voter) {
    case VoterId::kNameToken:
      s.similarity = prefix_credit_jaccard(left.name_terms, right.name_terms);
      s.evidence_mass = static_cast<double>(left.name_bag_size + right.name_bag_size);
      break;
    case VoterId::kNameEdit:
      s.similarity = edit_similarity(left.lower_name, right.lower_name);
      s.evidence_mass =
          static_cast<double>(std::min(left.lower_name.size(), right.lower_name.size())) / 4.0;
      break;
    case VoterId::kDocToken:
      s.similarity = jaccard(left.doc_terms, right.doc_terms);
      s.evidence_mass = static_cast<double>(std::min(left.doc_bag_size, right.doc_bag_size));
      break;
    case VoterId::kStructure:
      s.similarity = jaccard(left.neighbor_terms, right.neighbor_terms);
      s.evidence_mass = static_cast<double>(std::min(left.neighbor_count, right.neighbor_count));
      break;
  }
  s.confidence = confidence(s.similarity, s.evidence_mass, saturation);
  return s;
}

VoterScore vote(VoterId voter, const Schema& left, ElementIndex li, const Schema& right,
                ElementIndex ri, double saturation) {
  return vote(voter, extract_features(left, li), extract_features(right, ri), saturation);
}

VoterScore vote(std::string_view voter, const Schema& left, ElementIndex li,
                const Schema& right, ElementIndex ri, double saturation) {
  return vote(parse_voter(voter), left, li, right, ri, saturation);
}

}  // namespace swb
