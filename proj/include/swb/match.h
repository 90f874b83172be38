#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swb/linguistics.h"
#include "swb/model.h"

namespace swb {

enum class VoterId { kNameToken, kNameEdit, kDocToken, kStructure };

inline constexpr VoterId kAllVoters[] = {VoterId::kNameToken, VoterId::kNameEdit,
                                         VoterId::kDocToken, VoterId::kStructure};

std::string_view to_string(VoterId voter);
// Throws Error(kUnknownVoter).
VoterId parse_voter(std::string_view name);

struct VoterScore {
  VoterId voter = VoterId::kNameToken;
  double similarity = 0.0;     // [0, 1]
  double evidence_mass = 0.0;  // >= 0
  double confidence = 0.0;     // (-1, +1)

  friend bool operator==(const VoterScore&, const VoterScore&) = default;
};

// (2s - 1) * m / (m + k): the similarity decides the sign, the amount of
// evidence pushes the magnitude towards 1. Zero evidence gives zero.
double confidence(double similarity, double evidence_mass, double saturation);

// Confidence-magnitude-weighted mean: sum(c * |c|) / sum(|c|), or 0 when
// every confidence is 0.
double merge_votes(std::span<const VoterScore> scores);
double merge_confidences(std::span<const double> confidences);

struct MatchConfig {
  std::vector<VoterId> voters{std::begin(kAllVoters), std::end(kAllVoters)};
  double saturation = 4.0;  // K
  std::size_t pair_budget = 4'000'000;
  double threshold = 0.5;  // review / automatic-mode threshold
  unsigned threads = 0;    // 0: hardware concurrency
  std::string stopwords_path;

  friend bool operator==(const MatchConfig&, const MatchConfig&) = default;
};

// "key = value" lines; '#' starts a comment. Keys: voters (comma list), k,
// pair_budget, threshold, threads, stopwords. Throws Error(kConfig) or
// Error(kUnknownVoter).
MatchConfig parse_match_config(std::string_view text);
std::string format_match_config(const MatchConfig& config);

// Per-element inputs to the voters, computed once per schema.
struct ElementFeatures {
  std::vector<std::string> name_terms;  // distinct, sorted
  std::size_t name_bag_size = 0;
  std::string lower_name;
  std::vector<std::string> doc_terms;  // distinct, sorted
  std::size_t doc_bag_size = 0;
  std::vector<std::string> neighbor_terms;  // parent + children name terms
  std::size_t neighbor_count = 0;
};

ElementFeatures extract_features(const Schema& schema, ElementIndex element,
                                 const Analyzer& analyzer = default_analyzer());
std::vector<ElementFeatures> extract_features(const Schema& schema,
                                              const Analyzer& analyzer = default_analyzer());

// Similarity primitives. Jaccard of two empty sets is 1.
double jaccard(std::span<const std::string> a, std::span<const std::string> b);
// Jaccard where two distinct tokens sharing a prefix of at least four
// characters count as half a shared token, each token used at most once.
double prefix_credit_jaccard(std::span<const std::string> a, std::span<const std::string> b);
std::size_t levenshtein(std::string_view a, std::string_view b);
// 1 - levenshtein / max length; 1 when both are empty.
double edit_similarity(std::string_view a, std::string_view b);

VoterScore vote(VoterId voter, const ElementFeatures& left, const ElementFeatures& right,
                double saturation);
VoterScore vote(VoterId voter, const Schema& left, ElementIndex li, const Schema& right,
                ElementIndex ri, double saturation = 4.0);
// Throws Error(kUnknownVoter) for an unrecognised voter name.
VoterScore vote(std::string_view voter, const Schema& left, ElementIndex li,
                const Schema& right, ElementIndex ri, double saturation = 4.0);

struct Link {
  ElementIndex left = 0;
  ElementIndex right = 0;
  double score = 0.0;

  friend bool operator==(const Link&, const Link&) = default;
};

struct MatchLink {
  std::string left_id;
  std::string right_id;
  double score = 0.0;
  std::vector<VoterScore> voter_scores;
};

/// Dense left x right score table produced by match().
///
/// Scores are stored row-major; the per-voter breakdown of any pair is
/// recomputed on demand from the cached element features, which yields the
/// same values the engine merged.
class MatchMatrix {
 public:
  const Schema& left() const { return *left_; }
  const Schema& right() const { return *right_; }
  const std::shared_ptr<const Schema>& left_ptr() const { return left_; }
  const std::shared_ptr<const Schema>& right_ptr() const { return right_; }
  const std::string& left_schema_id() const { return left_->id(); }
  const std::string& right_schema_id() const { return right_->id(); }
  const MatchConfig& config() const { return config_; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return scores_.size(); }

  double score(ElementIndex i, ElementIndex j) const { return scores_[i * cols_ + j]; }
  std::span<const double> row(ElementIndex i) const {
    return std::span<const double>(scores_).subspan(i * cols_, cols_);
  }
  std::span<const double> scores() const { return scores_; }

  MatchLink explain(ElementIndex i, ElementIndex j) const;
  std::vector<VoterScore> voter_scores(ElementIndex i, ElementIndex j) const;

  // Every link with lo <= score <= hi, ordered by score descending, then
  // left index, then right index.
  std::vector<Link> links_in_range(double lo, double hi) const;

 private:
  friend MatchMatrix match(std::shared_ptr<const Schema>, std::shared_ptr<const Schema>,
                           const MatchConfig&, const Analyzer&);

  std::shared_ptr<const Schema> left_;
  std::shared_ptr<const Schema> right_;
  std::shared_ptr<const std::vector<ElementFeatures>> left_features_;
  std::shared_ptr<const std::vector<ElementFeatures>> right_features_;
  MatchConfig config_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> scores_;
};

// Scores the full cross product. Output is independent of thread count.
// Throws Error(kResource) when |left| * |right| exceeds config.pair_budget.
MatchMatrix match(std::shared_ptr<const Schema> left, std::shared_ptr<const Schema> right,
                  const MatchConfig& config, const Analyzer& analyzer = default_analyzer());

// Orders links by score descending, then left, then right.
void sort_links(std::vector<Link>& links);

}  // namespace swb
