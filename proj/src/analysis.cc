#include "swb/analysis.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>

#include "swb/error.h"

namespace swb {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

// Index pairs in (left_schema, right_schema) orientation.
std::vector<std::pair<ElementIndex, ElementIndex>> common_pairs(const Session& session,
                                                                const MatchMatrix& m,
                                                                bool swapped, PartitionMode mode,
                                                                double tau) {
  std::vector<std::pair<ElementIndex, ElementIndex>> out;
  if (mode == PartitionMode::kValidated) {
    out = session.accepted_pairs(m);
  } else {
    for (ElementIndex i = 0; i < m.rows(); ++i) {
      const auto row = m.row(i);
      for (ElementIndex j = 0; j < m.cols(); ++j) {
        if (row[j] >= tau) out.emplace_back(i, j);
      }
    }
  }
  if (swapped) {
    for (auto& p : out) std::swap(p.first, p.second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string_view to_string(PartitionMode mode) {
  return mode == PartitionMode::kValidated ? "validated" : "automatic";
}

int rounded_percent(std::size_t part, std::size_t whole) {
  if (whole == 0) return 0;
  return static_cast<int>(std::lround(100.0 * static_cast<double>(part) /
                                      static_cast<double>(whole)));
}

PartitionReport partition(const Session& session, std::string_view left_schema,
                          std::string_view right_schema, PartitionMode mode,
                          std::optional<double> threshold) {
  bool swapped = false;
  const MatchMatrix* m = session.find_matrix(left_schema, right_schema);
  if (m == nullptr) {
    m = session.find_matrix(right_schema, left_schema);
    swapped = true;
  }
  if (m == nullptr) {
    throw Error(ErrorKind::kUnknownPair, "no match between schemata '" + std::string(left_schema) +
                                             "' and '" + std::string(right_schema) + "'");
  }
  const Schema& left = swapped ? m->right() : m->left();
  const Schema& right = swapped ? m->left() : m->right();

  PartitionReport r;
  r.left_schema_id = left.id();
  r.right_schema_id = right.id();
  r.mode = mode;
  r.threshold = threshold.value_or(session.threshold());
  r.left_total = left.element_count();
  r.right_total = right.element_count();

  const auto pairs = common_pairs(session, *m, swapped, mode, r.threshold);
  std::vector<bool> left_common(r.left_total, false);
  std::vector<bool> right_common(r.right_total, false);
  r.common_pairs.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    left_common[i] = true;
    right_common[j] = true;
    r.common_pairs.emplace_back(left.element(i).id, right.element(j).id);
  }
  for (ElementIndex i = 0; i < r.left_total; ++i) {
    if (left_common[i]) {
      ++r.common_left;
    } else {
      r.left_only.push_back(left.element(i).id);
    }
  }
  for (ElementIndex j = 0; j < r.right_total; ++j) {
    if (right_common[j]) {
      ++r.common_right;
    } else {
      r.right_only.push_back(right.element(j).id);
    }
  }
  r.left_only_percent = rounded_percent(r.left_only.size(), r.left_total);
  r.right_only_percent = rounded_percent(r.right_only.size(), r.right_total);
  r.common_left_percent = rounded_percent(r.common_left, r.left_total);
  r.common_right_percent = rounded_percent(r.common_right, r.right_total);
  return r;
}

Corpus corpus_from_sessions(std::span<const Session* const> sessions, PartitionMode mode,
                            std::optional<double> threshold) {
  Corpus corpus;
  std::map<std::string, std::shared_ptr<const Schema>, std::less<>> seen;
  for (const Session* s : sessions) {
    for (const auto& sid : s->schema_ids()) {
      auto ptr = s->schema_ptr(sid);
      auto [it, inserted] = seen.emplace(sid, ptr);
      if (inserted) {
        corpus.schemas.push_back(ptr);
      } else if (it->second != ptr && !(*it->second == *ptr)) {
        throw Error(ErrorKind::kConflict,
                    "schema '" + sid + "' differs between the supplied sessions");
      }
    }
    const double tau = threshold.value_or(s->threshold());
    for (const auto& m : s->matrices()) {
      corpus.links.push_back(PairwiseLinks{m->left_schema_id(), m->right_schema_id(),
                                           common_pairs(*s, *m, false, mode, tau)});
    }
  }
  return corpus;
}

const VocabularyCell* Vocabulary::find_cell(std::span<const std::string> signature) const {
  for (const auto& c : cells) {
    if (std::equal(c.signature.begin(), c.signature.end(), signature.begin(), signature.end())) {
      return &c;
    }
  }
  return nullptr;
}

std::size_t Vocabulary::schema_position(std::string_view schema_id) const {
  for (std::size_t i = 0; i < schema_ids.size(); ++i) {
    if (schema_ids[i] == schema_id) return i;
  }
  throw Error(ErrorKind::kUnknownId,
              "schema '" + std::string(schema_id) + "' is not in the vocabulary");
}

Vocabulary comprehensive_vocabulary(const Corpus& corpus) {
  const std::size_t n = corpus.schemas.size();
  if (n > kMaxVocabularySchemata) {
    throw Error(ErrorKind::kRange, "comprehensive vocabulary supports at most " +
                                       std::to_string(kMaxVocabularySchemata) + " schemata");
  }
  Vocabulary vocab;
  std::map<std::string, std::size_t, std::less<>> position;
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& id = corpus.schemas[s]->id();
    if (!position.emplace(id, s).second) {
      throw Error(ErrorKind::kDuplicate, "schema '" + id + "' appears twice in the corpus");
    }
    vocab.schema_ids.push_back(id);
    offset[s + 1] = offset[s] + corpus.schemas[s]->element_count();
  }

  // Every unordered schema pair needs a (possibly empty) link set.
  std::vector<bool> have(n * n, false);
  for (const auto& pl : corpus.links) {
    auto a = position.find(pl.left_schema_id);
    auto b = position.find(pl.right_schema_id);
    if (a == position.end() || b == position.end()) {
      throw Error(ErrorKind::kUnknownId, "links reference a schema outside the corpus: '" +
                                             pl.left_schema_id + "' / '" + pl.right_schema_id + "'");
    }
    have[a->second * n + b->second] = have[b->second * n + a->second] = true;
  }
  std::string missing;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!have[a * n + b]) {
        if (!missing.empty()) missing += ", ";
        missing += vocab.schema_ids[a] + "~" + vocab.schema_ids[b];
      }
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kMissingPair, "missing pairwise matches: " + missing);
  }

  DisjointSets dsu(offset[n]);
  for (const auto& pl : corpus.links) {
    const std::size_t a = position.find(pl.left_schema_id)->second;
    const std::size_t b = position.find(pl.right_schema_id)->second;
    for (const auto& [i, j] : pl.pairs) {
      if (i >= corpus.schemas[a]->element_count() || j >= corpus.schemas[b]->element_count()) {
        throw Error(ErrorKind::kRange, "link index out of range for '" + pl.left_schema_id +
                                           "' / '" + pl.right_schema_id + "'");
      }
      dsu.unite(offset[a] + i, offset[b] + j);
    }
  }

  // Terms are numbered by their first member in corpus order.
  std::vector<std::size_t> term_of_root(offset[n], std::numeric_limits<std::size_t>::max());
  std::vector<std::uint32_t> masks;
  for (std::size_t s = 0; s < n; ++s) {
    const Schema& schema = *corpus.schemas[s];
    for (ElementIndex e = 0; e < schema.element_count(); ++e) {
      const std::size_t root = dsu.find(offset[s] + e);
      if (term_of_root[root] == std::numeric_limits<std::size_t>::max()) {
        term_of_root[root] = vocab.terms.size();
        VocabularyTerm t;
        t.term_id = "T" + std::to_string(vocab.terms.size() + 1);
        vocab.terms.push_back(std::move(t));
        masks.push_back(0);
      }
      const std::size_t ti = term_of_root[root];
      const SchemaElement& el = schema.element(e);
      VocabularyTerm& t = vocab.terms[ti];
      t.members.push_back(TermMember{schema.id(), el.id, el.name});
      if (t.representative_name.empty() || el.name.size() < t.representative_name.size()) {
        t.representative_name = el.name;
      }
      masks[ti] |= std::uint32_t{1} << s;
    }
  }
  for (std::size_t ti = 0; ti < vocab.terms.size(); ++ti) {
    for (std::size_t s = 0; s < n; ++s) {
      if (masks[ti] & (std::uint32_t{1} << s)) vocab.terms[ti].signature.push_back(vocab.schema_ids[s]);
    }
  }

  std::vector<std::uint32_t> cell_masks;
  for (std::uint32_t m = 1; n > 0 && m < (std::uint32_t{1} << n); ++m) cell_masks.push_back(m);
  std::stable_sort(cell_masks.begin(), cell_masks.end(), [](std::uint32_t a, std::uint32_t b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    // Lower schema positions first: compare reversed bit order.
    for (std::uint32_t bit = 1; bit != 0; bit <<= 1) {
      if ((a & bit) != (b & bit)) return (a & bit) != 0;
    }
    return false;
  });
  std::map<std::uint32_t, std::size_t> cell_index;
  for (std::uint32_t m : cell_masks) {
    VocabularyCell c;
    for (std::size_t s = 0; s < n; ++s) {
      if (m & (std::uint32_t{1} << s)) c.signature.push_back(vocab.schema_ids[s]);
    }
    cell_index[m] = vocab.cells.size();
    vocab.cells.push_back(std::move(c));
  }
  for (std::size_t ti = 0; ti < vocab.terms.size(); ++ti) {
    vocab.cells[cell_index.at(masks[ti])].terms.push_back(ti);
  }
  return vocab;
}

double overlap_distance(const Vocabulary& vocab, std::string_view schema_a,
                        std::string_view schema_b) {
  const std::size_t a = vocab.schema_position(schema_a);
  const std::size_t b = vocab.schema_position(schema_b);
  if (a == b) return 0.0;
  std::size_t both = 0, either = 0;
  for (const auto& t : vocab.terms) {
    const bool in_a = std::find(t.signature.begin(), t.signature.end(), vocab.schema_ids[a]) !=
                      t.signature.end();
    const bool in_b = std::find(t.signature.begin(), t.signature.end(), vocab.schema_ids[b]) !=
                      t.signature.end();
    both += in_a && in_b;
    either += in_a || in_b;
  }
  if (either == 0) return 0.0;
  return 1.0 - static_cast<double>(both) / static_cast<double>(either);
}

DistanceMatrix distance_matrix(const Vocabulary& vocab) {
  DistanceMatrix d;
  d.schema_ids = vocab.schema_ids;
  const std::size_t n = d.schema_ids.size();
  d.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = overlap_distance(vocab, d.schema_ids[i], d.schema_ids[j]);
      d.values[i * n + j] = d.values[j * n + i] = v;
    }
  }
  return d;
}

Clustering cluster(const DistanceMatrix& distances, double cutoff) {
  const std::size_t n = distances.size();
  struct Node {
    std::size_t id;
    std::vector<std::size_t> leaves;  // sorted by schema id
    std::string label;                // smallest schema id
  };
  std::vector<Node> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}, distances.schema_ids[i]});

  const auto& ids = distances.schema_ids;
  auto by_id = [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; };
  auto linkage = [&](const Node& a, const Node& b) {
    double sum = 0.0;
    for (std::size_t x : a.leaves) {
      for (std::size_t y : b.leaves) sum += distances.at(x, y);
    }
    return sum / static_cast<double>(a.leaves.size() * b.leaves.size());
  };

  Clustering out;
  DisjointSets flat(n);
  std::size_t next_id = n;
  while (active.size() > 1) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::string, std::string> best_key;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        // Canonical orientation so the summation order does not depend on slot order.
        const bool a_first = active[a].label < active[b].label;
        const Node& p = a_first ? active[a] : active[b];
        const Node& q = a_first ? active[b] : active[a];
        const double h = linkage(p, q);
        std::pair<std::string, std::string> key{p.label, q.label};
        if (h < best || (h == best && key < best_key)) {
          best = h;
          best_a = a;
          best_b = b;
          best_key = std::move(key);
        }
      }
    }
    Node& a = active[best_a];
    Node& b = active[best_b];
    const bool a_first = a.label < b.label;
    Merge m{a_first ? a.id : b.id, a_first ? b.id : a.id, best, a.leaves.size() + b.leaves.size()};
    out.tree.push_back(m);
    if (best < cutoff || cutoff >= 1.0) flat.unite(a.leaves.front(), b.leaves.front());

    Node merged{next_id++, a.leaves, std::min(a.label, b.label)};
    merged.leaves.insert(merged.leaves.end(), b.leaves.begin(), b.leaves.end());
    std::sort(merged.leaves.begin(), merged.leaves.end(), by_id);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    active[best_a] = std::move(merged);
  }

  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[flat.find(i)].push_back(ids[i]);
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.clusters.push_back(std::move(members));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

std::vector<SearchResult> search(const Schema& query,
                                 std::span<const std::shared_ptr<const Schema>> repository,
                                 const MatchConfig& config, const Analyzer& analyzer) {
  auto q = std::make_shared<const Schema>(query);
  std::vector<SearchResult> results;
  for (const auto& candidate : repository) {
    SearchResult r;
    r.schema_id = candidate->id();
    r.query_size = query.element_count();
    if (r.query_size > 0 && candidate->element_count() > 0) {
      const MatchMatrix m = match(q, candidate, config, analyzer);
      double total = 0.0;
      for (ElementIndex i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        const double best = *std::max_element(row.begin(), row.end());
        total += best;
        if (best >= config.threshold) ++r.matched;
      }
      r.score = static_cast<double>(r.matched) / static_cast<double>(r.query_size);
      r.mean_best = total / static_cast<double>(r.query_size);
    }
    results.push_back(std::move(r));
  }
  std::sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.mean_best != b.mean_best) return a.mean_best > b.mean_best;
    return a.schema_id < b.schema_id;
  });
  return results;
}

}  // namespace swb
