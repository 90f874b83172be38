#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "swb/filters.h"
#include "swb/match.h"
#include "swb/model.h"

namespace swb {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// ISO-8601 UTC with milliseconds, e.g. "2026-10-18T09:30:00.000Z".
std::string format_timestamp(Timestamp t);
// Throws Error(kIntegrity) on malformed text.
Timestamp parse_timestamp(std::string_view text);

enum class DecisionStatus { kCandidate, kAccepted, kRejected };
enum class Annotation { kEquivalent, kIsA, kPartOf, kRelated, kNone };

std::string_view to_string(DecisionStatus status);
std::string_view to_string(Annotation annotation);
std::optional<DecisionStatus> parse_status(std::string_view text);
std::optional<Annotation> parse_annotation(std::string_view text);

struct ConceptLabel {
  std::string id;  // "<schema id>/C<n>"
  std::string name;
  std::string schema_id;
  std::vector<std::string> member_element_ids;  // document order

  friend bool operator==(const ConceptLabel&, const ConceptLabel&) = default;
};

struct Summary {
  std::string schema_id;
  std::vector<ConceptLabel> concepts;
  std::vector<std::string> unassigned_element_ids;
};

struct MatchDecision {
  std::string left_id;  // element of the matrix's left schema
  std::string right_id;
  DecisionStatus status = DecisionStatus::kCandidate;
  Annotation annotation = Annotation::kNone;
  std::string author;
  std::string assignee;
  Timestamp timestamp{};

  friend bool operator==(const MatchDecision&, const MatchDecision&) = default;
};

struct ConceptMatch {
  std::string left_concept_id;
  std::string right_concept_id;
  std::size_t support = 0;

  friend bool operator==(const ConceptMatch&, const ConceptMatch&) = default;
};

struct ConceptSuggestion {
  ElementIndex root = 0;
  std::string root_id;
  std::string name;
  std::size_t descendant_count = 0;
  std::vector<std::string> member_element_ids;
};

// Where a session's schema came from; the hash guards against edits.
struct SchemaRef {
  std::string path;
  std::string sha256;

  friend bool operator==(const SchemaRef&, const SchemaRef&) = default;
};

struct ConceptAssigned {
  std::string schema_id;
  std::string concept_name;
  std::vector<std::string> element_ids;

  friend bool operator==(const ConceptAssigned&, const ConceptAssigned&) = default;
};

struct DecisionRecorded {
  MatchDecision decision;

  friend bool operator==(const DecisionRecorded&, const DecisionRecorded&) = default;
};

struct ConceptMatchesDerived {
  std::vector<ConceptMatch> matches;

  friend bool operator==(const ConceptMatchesDerived&, const ConceptMatchesDerived&) = default;
};

struct Event {
  std::uint64_t seq = 0;
  Timestamp at{};
  std::variant<ConceptAssigned, DecisionRecorded, ConceptMatchesDerived> payload;

  friend bool operator==(const Event&, const Event&) = default;
};

struct IncrementalResult {
  std::string left_schema_id;
  std::string right_schema_id;
  std::size_t pairs_considered = 0;
  std::vector<Link> links;
};

struct SessionEnvironment;

/// Human validation state over one or more matched schema pairs.
///
/// Every mutation appends to the event log, and replaying that log against
/// the same schemata and matrices reproduces the session. Decisions are
/// keyed by unordered element pair and oriented to the matrix that holds the
/// pair. A Session is not internally synchronized: one writer at a time.
class Session {
 public:
  using Clock = std::function<Timestamp()>;
  using PairKey = std::pair<std::string, std::string>;

  explicit Session(std::string id = "session", MatchConfig config = {});

  const std::string& id() const { return id_; }
  const MatchConfig& config() const { return config_; }
  double threshold() const { return config_.threshold; }

  void set_clock(Clock clock) { clock_ = std::move(clock); }

  // Throws Error(kDuplicate) if the schema id is already registered.
  void add_schema(std::shared_ptr<const Schema> schema, SchemaRef ref = {});
  bool has_schema(std::string_view id) const;
  const Schema& schema(std::string_view id) const;
  std::shared_ptr<const Schema> schema_ptr(std::string_view id) const;
  const SchemaRef& schema_ref(std::string_view id) const;
  const std::vector<std::string>& schema_ids() const { return schema_order_; }

  // Both schemata must already be registered. Throws Error(kDuplicate) if
  // the pair, in either orientation, already has a matrix.
  void add_matrix(std::shared_ptr<const MatchMatrix> matrix);
  const std::vector<std::shared_ptr<const MatchMatrix>>& matrices() const { return matrices_; }
  const MatchMatrix* find_matrix(std::string_view left_schema, std::string_view right_schema) const;
  // The first matrix involving the schema, in either role.
  const MatchMatrix* matrix_for(std::string_view schema_id) const;

  const ConceptLabel& assign_concept(const std::string& schema_id, const std::string& concept_name,
                                     const std::vector<std::string>& element_ids);
  std::vector<ConceptLabel> concepts(std::string_view schema_id) const;
  const ConceptLabel& concept_by_id(std::string_view concept_id) const;
  std::optional<std::string> concept_of(std::string_view schema_id, ElementIndex element) const;
  Summary summary(std::string_view schema_id) const;

  const MatchDecision& record_decision(const std::string& left_id, const std::string& right_id,
                                       DecisionStatus status, Annotation annotation,
                                       const std::string& author, const std::string& assignee);
  std::optional<MatchDecision> decision(std::string_view a, std::string_view b) const;
  const std::map<PairKey, MatchDecision>& decisions() const { return decisions_; }
  // Accepted decisions of one matrix, as index pairs in matrix orientation.
  std::vector<std::pair<ElementIndex, ElementIndex>> accepted_pairs(const MatchMatrix& m) const;

  // Pure: recomputed from summaries and accepted decisions.
  std::vector<ConceptMatch> compute_concept_matches() const;
  // Computes, stores, and logs the concept matches.
  const std::vector<ConceptMatch>& derive_concept_matches();
  const std::vector<ConceptMatch>& concept_matches() const { return concept_matches_; }

  IncrementalResult incremental_match(std::string_view concept_id,
                                      std::optional<double> min_score = std::nullopt) const;

  const std::vector<Event>& events() const { return events_; }

  // A fresh session over the same schemata and matrices with the event log
  // re-applied in order.
  Session replay() const;

  friend bool operator==(const Session& a, const Session& b);

 private:
  friend Session load_session(std::string_view text, const SessionEnvironment& env);

  struct SchemaEntry {
    std::shared_ptr<const Schema> schema;
    SchemaRef ref;
    std::vector<ConceptLabel> concepts;
    std::vector<int> concept_of;  // per element; -1 unassigned
  };

  struct Located {
    const MatchMatrix* matrix;
    ElementIndex left;
    ElementIndex right;
  };

  SchemaEntry& entry(std::string_view id);
  const SchemaEntry& entry(std::string_view id) const;
  std::optional<Located> locate_pair(std::string_view a, std::string_view b) const;
  Timestamp now() const;
  void append(Timestamp at, decltype(Event::payload) payload);
  void apply_event(const Event& e);
  const ConceptLabel& do_assign(const std::string& schema_id, const std::string& name,
                                const std::vector<std::string>& element_ids);
  const MatchDecision& do_record(MatchDecision d);

  std::string id_;
  MatchConfig config_;
  Clock clock_;
  std::vector<std::string> schema_order_;
  std::map<std::string, SchemaEntry, std::less<>> schemas_;
  std::vector<std::shared_ptr<const MatchMatrix>> matrices_;
  std::map<PairKey, MatchDecision> decisions_;
  std::vector<ConceptMatch> concept_matches_;
  std::vector<Event> events_;
};

// Operation-style entry points.
const ConceptLabel& assign_concept(Session& session, const std::string& schema_id,
                                   const std::string& concept_name,
                                   const std::vector<std::string>& element_ids);
// Depth-1 elements with at least one descendant, largest subtree first.
std::vector<ConceptSuggestion> suggest_concepts(const Schema& schema);
IncrementalResult incremental_match(const Session& session, std::string_view concept_id);
const MatchDecision& record_decision(Session& session, const std::string& left_id,
                                     const std::string& right_id, DecisionStatus status,
                                     Annotation annotation = Annotation::kNone,
                                     const std::string& author = {},
                                     const std::string& assignee = {});
std::vector<ConceptMatch> derive_concept_matches(Session& session);

// Persistence. Schemata are embedded by reference (path + SHA-256); match
// matrices are recomputed from the stored configuration on load.
inline constexpr std::string_view kSessionFormatVersion = "1";

struct SessionEnvironment {
  // Returns the schema for a reference; must verify the hash.
  std::function<std::shared_ptr<const Schema>(const std::string& schema_id, const SchemaRef&)>
      resolve_schema;
  // Optional; defaults to the built-in stopword list.
  std::function<Analyzer(const MatchConfig&)> make_analyzer;
};

std::string save_session(const Session& session);
// Throws Error(kVersion) for unsupported versions and Error(kIntegrity) for
// truncated or inconsistent documents.
Session load_session(std::string_view text, const SessionEnvironment& env);

// File helpers: schema paths are resolved relative to the session file.
void save_session_file(const Session& session, const std::string& path);
Session load_session_file(const std::string& path);

std::string sha256_hex(std::string_view bytes);

}  // namespace swb
