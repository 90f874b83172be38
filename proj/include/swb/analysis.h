#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swb/match.h"
#include "swb/model.h"
#include "swb/session.h"

namespace swb {

// Validated: an element is common when it takes part in an accepted
// decision. Automatic: when it has a link scoring at least the threshold.
enum class PartitionMode { kValidated, kAutomatic };

std::string_view to_string(PartitionMode mode);

// round(100 * part / whole), 0 when whole is 0.
int rounded_percent(std::size_t part, std::size_t whole);

struct PartitionReport {
  std::string left_schema_id;
  std::string right_schema_id;
  PartitionMode mode = PartitionMode::kValidated;
  double threshold = 0.5;
  std::size_t left_total = 0;
  std::size_t right_total = 0;
  std::vector<std::string> left_only;   // document order
  std::vector<std::string> right_only;  // document order
  std::vector<std::pair<std::string, std::string>> common_pairs;
  std::size_t common_left = 0;   // distinct left elements in common pairs
  std::size_t common_right = 0;  // distinct right elements in common pairs
  int left_only_percent = 0;
  int right_only_percent = 0;
  int common_left_percent = 0;
  int common_right_percent = 0;
};

// Throws Error(kUnknownPair) when the session has no matrix for the pair.
PartitionReport partition(const Session& session, std::string_view left_schema,
                          std::string_view right_schema,
                          PartitionMode mode = PartitionMode::kValidated,
                          std::optional<double> threshold = std::nullopt);

// Element correspondences between two schemata of a corpus, in the
// orientation given by the schema ids.
struct PairwiseLinks {
  std::string left_schema_id;
  std::string right_schema_id;
  std::vector<std::pair<ElementIndex, ElementIndex>> pairs;
};

struct Corpus {
  std::vector<std::shared_ptr<const Schema>> schemas;
  std::vector<PairwiseLinks> links;
};

// Gathers schemata and correspondences from sessions; a schema id seen in
// several sessions must carry identical content.
Corpus corpus_from_sessions(std::span<const Session* const> sessions,
                            PartitionMode mode = PartitionMode::kValidated,
                            std::optional<double> threshold = std::nullopt);

struct TermMember {
  std::string schema_id;
  std::string element_id;
  std::string name;

  friend bool operator==(const TermMember&, const TermMember&) = default;
};

struct VocabularyTerm {
  std::string term_id;
  std::vector<TermMember> members;     // corpus schema order, then document order
  std::vector<std::string> signature;  // schema ids touched, corpus order
  std::string representative_name;     // shortest member name
};

struct VocabularyCell {
  std::vector<std::string> signature;
  std::vector<std::size_t> terms;  // indices into Vocabulary::terms
};

/// Cross-schema equivalence classes of a corpus.
///
/// Terms are the connected components of the correspondence graph; each
/// lands in the cell of the exact schema subset it touches. All 2^N - 1
/// cells are present, ordered by subset size and then by schema position.
struct Vocabulary {
  std::vector<std::string> schema_ids;
  std::vector<VocabularyTerm> terms;
  std::vector<VocabularyCell> cells;

  const VocabularyCell* find_cell(std::span<const std::string> signature) const;
  std::size_t schema_position(std::string_view schema_id) const;
};

inline constexpr std::size_t kMaxVocabularySchemata = 16;

// Throws Error(kMissingPair) listing every schema pair without links, and
// Error(kRange) for more than kMaxVocabularySchemata schemata.
Vocabulary comprehensive_vocabulary(const Corpus& corpus);

// 1 - |terms touching both| / |terms touching either|. Throws
// Error(kUnknownId) for a schema outside the vocabulary.
double overlap_distance(const Vocabulary& vocab, std::string_view schema_a,
                        std::string_view schema_b);

struct DistanceMatrix {
  std::vector<std::string> schema_ids;
  std::vector<double> values;  // row-major, symmetric, zero diagonal

  std::size_t size() const { return schema_ids.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * schema_ids.size() + j]; }
};

DistanceMatrix distance_matrix(const Vocabulary& vocab);

struct Merge {
  std::size_t first = 0;   // node ids: leaves 0..n-1, merges n, n+1, ...
  std::size_t second = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Clustering {
  std::vector<std::vector<std::string>> clusters;  // each sorted; ordered by first id
  std::vector<Merge> tree;                         // full n-1 merge sequence
};

// Average-linkage agglomeration. Flat clusters keep every merge whose
// height is below cutoff; a cutoff >= 1 keeps all of them, since distances
// never exceed 1. Equal distances merge the pair whose smallest schema ids
// sort first.
Clustering cluster(const DistanceMatrix& distances, double cutoff);

struct SearchResult {
  std::string schema_id;
  double score = 0.0;      // fraction of query elements with best link >= threshold
  double mean_best = 0.0;  // mean best-link score over query elements
  std::size_t matched = 0;
  std::size_t query_size = 0;
};

// Ranks repository schemata by score, then mean_best (both descending), then id.
std::vector<SearchResult> search(const Schema& query,
                                 std::span<const std::shared_ptr<const Schema>> repository,
                                 const MatchConfig& config,
                                 const Analyzer& analyzer = default_analyzer());

}  // namespace swb
