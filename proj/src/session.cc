#include "swb/session.h"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <set>

#include "swb/error.h"

namespace swb {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool legal_transition(std::optional<DecisionStatus> from, DecisionStatus to) {
  if (!from || *from == DecisionStatus::kCandidate) return true;
  // Validated decisions move between accepted and rejected, never back.
  return to != DecisionStatus::kCandidate;
}

Session::PairKey pair_key(std::string_view a, std::string_view b) {
  return a <= b ? Session::PairKey{std::string(a), std::string(b)}
                : Session::PairKey{std::string(b), std::string(a)};
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto ms = t.time_since_epoch().count();
  std::int64_t secs = ms / 1000;
  std::int64_t rem = ms % 1000;
  if (rem < 0) {
    rem += 1000;
    --secs;
  }
  const std::time_t tt = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(rem));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  int y, mo, d, h, mi, s, ms;
  char z = 0;
  const std::string str(text);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c", &y, &mo, &d, &h, &mi, &s, &ms,
                  &z) != 8 ||
      z != 'Z' || str.size() != 24) {
    throw Error(ErrorKind::kIntegrity, "malformed timestamp '" + str + "'");
  }
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  const std::time_t secs = timegm(&tm);
  return Timestamp(std::chrono::milliseconds(static_cast<std::int64_t>(secs) * 1000 + ms));
}

std::string_view to_string(DecisionStatus status) {
  switch (status) {
    case DecisionStatus::kCandidate: return "candidate";
    case DecisionStatus::kAccepted: return "accepted";
    case DecisionStatus::kRejected: return "rejected";
  }
  return "candidate";
}

std::string_view to_string(Annotation annotation) {
  switch (annotation) {
    case Annotation::kEquivalent: return "equivalent";
    case Annotation::kIsA: return "is-a";
    case Annotation::kPartOf: return "part-of";
    case Annotation::kRelated: return "related";
    case Annotation::kNone: return "none";
  }
  return "none";
}

std::optional<DecisionStatus> parse_status(std::string_view text) {
  for (auto s : {DecisionStatus::kCandidate, DecisionStatus::kAccepted, DecisionStatus::kRejected}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<Annotation> parse_annotation(std::string_view text) {
  for (auto a : {Annotation::kEquivalent, Annotation::kIsA, Annotation::kPartOf,
                 Annotation::kRelated, Annotation::kNone}) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

Session::Session(std::string id, MatchConfig config)
    : id_(std::move(id)), config_(std::move(config)) {}

Timestamp Session::now() const {
  if (clock_) return clock_();
  return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

Session::SchemaEntry& Session::entry(std::string_view id) {
  auto it = schemas_.find(id);
  if (it == schemas_.end()) {
    throw Error(ErrorKind::kUnknownId, "unknown schema '" + std::string(id) + "'");
  }
  return it->second;
}

const Session::SchemaEntry& Session::entry(std::string_view id) const {
  return const_cast<Session*>(this)->entry(id);
}

void Session::add_schema(std::shared_ptr<const Schema> schema, SchemaRef ref) {
  if (!schema) throw Error(ErrorKind::kValidation, "null schema");
  if (schemas_.contains(schema->id())) {
    throw Error(ErrorKind::kDuplicate, "schema '" + schema->id() + "' already in session");
  }
  SchemaEntry e;
  e.concept_of.assign(schema->element_count(), -1);
  e.schema = schema;
  e.ref = std::move(ref);
  schema_order_.push_back(schema->id());
  schemas_.emplace(schema->id(), std::move(e));
}

bool Session::has_schema(std::string_view id) const { return schemas_.find(id) != schemas_.end(); }

const Schema& Session::schema(std::string_view id) const { return *entry(id).schema; }

std::shared_ptr<const Schema> Session::schema_ptr(std::string_view id) const {
  return entry(id).schema;
}

const SchemaRef& Session::schema_ref(std::string_view id) const { return entry(id).ref; }

void Session::add_matrix(std::shared_ptr<const MatchMatrix> matrix) {
  if (!matrix) throw Error(ErrorKind::kValidation, "null matrix");
  const auto& l = matrix->left_schema_id();
  const auto& r = matrix->right_schema_id();
  for (const auto* id : {&l, &r}) {
    if (!has_schema(*id)) {
      throw Error(ErrorKind::kUnknownId, "matrix references unregistered schema '" + *id + "'");
    }
    const Schema& registered = schema(*id);
    const Schema& used = id == &l ? matrix->left() : matrix->right();
    if (&registered != &used && !(registered == used)) {
      throw Error(ErrorKind::kValidation, "matrix schema '" + *id + "' differs from session copy");
    }
  }
  if (find_matrix(l, r) || find_matrix(r, l)) {
    throw Error(ErrorKind::kDuplicate, "session already has a matrix for " + l + " x " + r);
  }
  matrices_.push_back(std::move(matrix));
}

const MatchMatrix* Session::find_matrix(std::string_view left_schema,
                                        std::string_view right_schema) const {
  for (const auto& m : matrices_) {
    if (m->left_schema_id() == left_schema && m->right_schema_id() == right_schema) return m.get();
  }
  return nullptr;
}

const MatchMatrix* Session::matrix_for(std::string_view schema_id) const {
  for (const auto& m : matrices_) {
    if (m->left_schema_id() == schema_id || m->right_schema_id() == schema_id) return m.get();
  }
  return nullptr;
}

std::optional<Session::Located> Session::locate_pair(std::string_view a,
                                                     std::string_view b) const {
  for (const auto& m : matrices_) {
    if (auto la = m->left().find(a)) {
      if (auto rb = m->right().find(b)) return Located{m.get(), *la, *rb};
    }
    if (auto lb = m->left().find(b)) {
      if (auto ra = m->right().find(a)) return Located{m.get(), *lb, *ra};
    }
  }
  return std::nullopt;
}

void Session::append(Timestamp at, decltype(Event::payload) payload) {
  events_.push_back(Event{events_.size() + 1, at, std::move(payload)});
}

const ConceptLabel& Session::do_assign(const std::string& schema_id, const std::string& name,
                                       const std::vector<std::string>& element_ids) {
  SchemaEntry& e = entry(schema_id);
  if (name.empty()) throw Error(ErrorKind::kValidation, "concept name must not be empty");
  if (element_ids.empty()) {
    throw Error(ErrorKind::kValidation, "concept '" + name + "' needs at least one element");
  }
  auto existing = std::find_if(e.concepts.begin(), e.concepts.end(),
                               [&](const ConceptLabel& c) { return c.name == name; });
  const int target = existing == e.concepts.end()
                         ? static_cast<int>(e.concepts.size())
                         : static_cast<int>(existing - e.concepts.begin());

  std::vector<ElementIndex> members;
  for (const auto& id : element_ids) {
    const ElementIndex i = e.schema->index_of(id);
    const int owner = e.concept_of[i];
    if (owner >= 0 && owner != target) {
      const ConceptLabel& other = e.concepts[static_cast<std::size_t>(owner)];
      throw Error(ErrorKind::kConflict, "element '" + id + "' is already assigned to concept '" +
                                            other.name + "' (" + other.id + ")");
    }
    members.push_back(i);
  }

  if (existing == e.concepts.end()) {
    e.concepts.push_back(ConceptLabel{schema_id + "/C" + std::to_string(e.concepts.size() + 1),
                                      name, schema_id, {}});
  }
  for (ElementIndex i : members) e.concept_of[i] = target;
  ConceptLabel& c = e.concepts[static_cast<std::size_t>(target)];
  c.member_element_ids.clear();
  for (ElementIndex i = 0; i < e.concept_of.size(); ++i) {
    if (e.concept_of[i] == target) c.member_element_ids.push_back(e.schema->element(i).id);
  }
  return c;
}

const MatchDecision& Session::do_record(MatchDecision d) {
  const auto loc = locate_pair(d.left_id, d.right_id);
  if (!loc) {
    throw Error(ErrorKind::kUnknownPair, "pair " + d.left_id + " / " + d.right_id +
                                             " is not present in any match matrix");
  }
  d.left_id = loc->matrix->left().element(loc->left).id;
  d.right_id = loc->matrix->right().element(loc->right).id;
  const PairKey key = pair_key(d.left_id, d.right_id);
  auto it = decisions_.find(key);
  const std::optional<DecisionStatus> from =
      it == decisions_.end() ? std::nullopt : std::optional(it->second.status);
  if (!legal_transition(from, d.status)) {
    throw Error(ErrorKind::kIllegalTransition,
                "cannot move pair " + d.left_id + " / " + d.right_id + " from " +
                    std::string(to_string(*from)) + " to " + std::string(to_string(d.status)));
  }
  auto [pos, _] = decisions_.insert_or_assign(key, std::move(d));
  return pos->second;
}

void Session::apply_event(const Event& event) {
  std::visit(Overloaded{
                 [&](const ConceptAssigned& a) {
                   do_assign(a.schema_id, a.concept_name, a.element_ids);
                   append(event.at, a);
                 },
                 [&](const DecisionRecorded& r) {
                   const MatchDecision& stored = do_record(r.decision);
                   append(event.at, DecisionRecorded{stored});
                 },
                 [&](const ConceptMatchesDerived& m) {
                   std::vector<ConceptMatch> derived = compute_concept_matches();
                   if (derived != m.matches) {
                     throw Error(ErrorKind::kIntegrity,
                                 "logged concept matches differ from recomputation");
                   }
                   concept_matches_ = std::move(derived);
                   append(event.at, m);
                 },
             },
             event.payload);
}

const ConceptLabel& Session::assign_concept(const std::string& schema_id,
                                            const std::string& concept_name,
                                            const std::vector<std::string>& element_ids) {
  apply_event(Event{0, now(), ConceptAssigned{schema_id, concept_name, element_ids}});
  const SchemaEntry& e = entry(schema_id);
  for (const auto& c : e.concepts) {
    if (c.name == concept_name) return c;
  }
  throw Error(ErrorKind::kIntegrity, "concept vanished after assignment");
}

std::vector<ConceptLabel> Session::concepts(std::string_view schema_id) const {
  return entry(schema_id).concepts;
}

const ConceptLabel& Session::concept_by_id(std::string_view concept_id) const {
  const auto slash = concept_id.rfind('/');
  if (slash != std::string_view::npos) {
    auto it = schemas_.find(concept_id.substr(0, slash));
    if (it != schemas_.end()) {
      for (const auto& c : it->second.concepts) {
        if (c.id == concept_id) return c;
      }
    }
  }
  throw Error(ErrorKind::kUnknownId, "unknown concept '" + std::string(concept_id) + "'");
}

std::optional<std::string> Session::concept_of(std::string_view schema_id,
                                               ElementIndex element) const {
  const SchemaEntry& e = entry(schema_id);
  const int c = e.concept_of.at(element);
  if (c < 0) return std::nullopt;
  return e.concepts[static_cast<std::size_t>(c)].name;
}

Summary Session::summary(std::string_view schema_id) const {
  const SchemaEntry& e = entry(schema_id);
  Summary s;
  s.schema_id = std::string(schema_id);
  s.concepts = e.concepts;
  for (ElementIndex i = 0; i < e.concept_of.size(); ++i) {
    if (e.concept_of[i] < 0) s.unassigned_element_ids.push_back(e.schema->element(i).id);
  }
  return s;
}

const MatchDecision& Session::record_decision(const std::string& left_id,
                                              const std::string& right_id,
                                              DecisionStatus status, Annotation annotation,
                                              const std::string& author,
                                              const std::string& assignee) {
  MatchDecision d{left_id, right_id, status, annotation, author, assignee, now()};
  apply_event(Event{0, d.timestamp, DecisionRecorded{d}});
  const auto& logged = std::get<DecisionRecorded>(events_.back().payload).decision;
  return decisions_.at(pair_key(logged.left_id, logged.right_id));
}

std::optional<MatchDecision> Session::decision(std::string_view a, std::string_view b) const {
  auto it = decisions_.find(pair_key(a, b));
  if (it == decisions_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<ElementIndex, ElementIndex>> Session::accepted_pairs(
    const MatchMatrix& m) const {
  std::vector<std::pair<ElementIndex, ElementIndex>> out;
  for (const auto& [key, d] : decisions_) {
    if (d.status != DecisionStatus::kAccepted) continue;
    auto l = m.left().find(d.left_id);
    auto r = m.right().find(d.right_id);
    if (l && r) out.emplace_back(*l, *r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ConceptMatch> Session::compute_concept_matches() const {
  std::vector<ConceptMatch> out;
  for (const auto& m : matrices_) {
    const SchemaEntry& le = entry(m->left_schema_id());
    const SchemaEntry& re = entry(m->right_schema_id());
    if (le.concepts.empty() || re.concepts.empty()) continue;
    std::vector<std::vector<std::size_t>> counts(le.concepts.size(),
                                                 std::vector<std::size_t>(re.concepts.size(), 0));
    for (auto [li, ri] : accepted_pairs(*m)) {
      const int a = le.concept_of[li];
      const int b = re.concept_of[ri];
      if (a >= 0 && b >= 0) ++counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
    for (std::size_t a = 0; a < counts.size(); ++a) {
      std::size_t best = 0, best_b = 0;
      bool tie = false;
      for (std::size_t b = 0; b < counts[a].size(); ++b) {
        if (counts[a][b] > best) {
          best = counts[a][b];
          best_b = b;
          tie = false;
        } else if (counts[a][b] == best && best > 0) {
          tie = true;
        }
      }
      if (best >= 1 && !tie) {
        out.push_back({le.concepts[a].id, re.concepts[best_b].id, best});
      }
    }
  }
  return out;
}

const std::vector<ConceptMatch>& Session::derive_concept_matches() {
  apply_event(Event{0, now(), ConceptMatchesDerived{compute_concept_matches()}});
  return concept_matches_;
}

IncrementalResult Session::incremental_match(std::string_view concept_id,
                                             std::optional<double> min_score) const {
  const ConceptLabel& c = concept_by_id(concept_id);
  const MatchMatrix* m = matrix_for(c.schema_id);
  if (!m) {
    throw Error(ErrorKind::kUnknownPair, "schema '" + c.schema_id + "' has no match matrix");
  }
  const Schema& own = schema(c.schema_id);
  ElementSet members;
  for (const auto& id : c.member_element_ids) members.push_back(own.index_of(id));
  std::sort(members.begin(), members.end());

  const bool on_left = m->left_schema_id() == c.schema_id;
  const ElementSet left = on_left ? members : all_elements(m->left());
  const ElementSet right = on_left ? all_elements(m->right()) : members;
  const ConfidenceRange range{min_score.value_or(threshold()), 1.0};

  IncrementalResult r;
  r.left_schema_id = m->left_schema_id();
  r.right_schema_id = m->right_schema_id();
  r.pairs_considered = left.size() * right.size();
  r.links = apply(*m, std::span(&range, 1), left, right);
  return r;
}

Session Session::replay() const {
  Session fresh(id_, config_);
  for (const auto& sid : schema_order_) {
    const SchemaEntry& e = entry(sid);
    fresh.add_schema(e.schema, e.ref);
  }
  for (const auto& m : matrices_) fresh.add_matrix(m);
  for (const Event& e : events_) fresh.apply_event(e);
  fresh.clock_ = clock_;
  return fresh;
}

bool operator==(const Session& a, const Session& b) {
  if (a.id_ != b.id_ || !(a.config_ == b.config_) || a.schema_order_ != b.schema_order_) {
    return false;
  }
  for (const auto& sid : a.schema_order_) {
    const auto& ea = a.entry(sid);
    const auto& eb = b.entry(sid);
    if (!(ea.ref == eb.ref) || !(*ea.schema == *eb.schema) || ea.concepts != eb.concepts) {
      return false;
    }
  }
  if (a.matrices_.size() != b.matrices_.size()) return false;
  for (std::size_t i = 0; i < a.matrices_.size(); ++i) {
    if (a.matrices_[i]->left_schema_id() != b.matrices_[i]->left_schema_id() ||
        a.matrices_[i]->right_schema_id() != b.matrices_[i]->right_schema_id()) {
      return false;
    }
  }
  return a.decisions_ == b.decisions_ && a.concept_matches_ == b.concept_matches_ &&
         a.events_ == b.events_;
}

const ConceptLabel& assign_concept(Session& session, const std::string& schema_id,
                                   const std::string& concept_name,
                                   const std::vector<std::string>& element_ids) {
  return session.assign_concept(schema_id, concept_name, element_ids);
}

std::vector<ConceptSuggestion> suggest_concepts(const Schema& schema) {
  std::vector<ConceptSuggestion> out;
  for (ElementIndex r : schema.roots()) {
    const std::size_t size = schema.subtree_size(r);
    if (size < 2) continue;
    ConceptSuggestion s;
    s.root = r;
    s.root_id = schema.element(r).id;
    s.name = schema.element(r).name;
    s.descendant_count = size - 1;
    s.member_element_ids = element_ids(schema, subtree_elements(schema, r));
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.descendant_count > b.descendant_count;
  });
  return out;
}

IncrementalResult incremental_match(const Session& session, std::string_view concept_id) {
  return session.incremental_match(concept_id);
}

const MatchDecision& record_decision(Session& session, const std::string& left_id,
                                     const std::string& right_id, DecisionStatus status,
                                     Annotation annotation, const std::string& author,
                                     const std::string& assignee) {
  return session.record_decision(left_id, right_id, status, annotation, author, assignee);
}

std::vector<ConceptMatch> derive_concept_matches(Session& session) {
  return session.derive_concept_matches();
}

}  // namespace swb
