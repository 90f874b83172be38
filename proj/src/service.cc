#include "swb/service.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <limits>
#include <optional>

#include "httplib.h"
#include "json.hpp"
#include "swb/analysis.h"
#include "swb/error.h"
#include "swb/export.h"
#include "swb/filters.h"
#include "swb/ingest.h"

namespace swb {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

HttpResponse json_response(int status, const Json& body) {
  return HttpResponse{status, "application/json", body.dump() + "\n"};
}

HttpResponse error_response(int status, std::string_view kind, std::string_view message) {
  return json_response(status, Json{{"error", std::string(kind)}, {"message", std::string(message)}});
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnknownId:
    case ErrorKind::kUnknownPair:
      return 404;
    case ErrorKind::kIllegalTransition:
    case ErrorKind::kConflict:
    case ErrorKind::kDuplicate:
      return 409;
    case ErrorKind::kIo:
    case ErrorKind::kIntegrity:
      return 500;
    default:
      return 400;
  }
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const std::size_t next = path.find('/', pos);
    const std::string_view piece =
        path.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (!piece.empty()) parts.emplace_back(piece);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

class Query {
 public:
  explicit Query(const std::multimap<std::string, std::string>& q) : q_(q) {}

  std::optional<std::string> text(const std::string& key) const {
    auto it = q_.find(key);
    if (it == q_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<double> number(const std::string& key) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    double out = 0.0;
    const char* end = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(v->data(), end, out);
    if (ec != std::errc() || ptr != end || v->empty()) {
      throw Error(ErrorKind::kRange, "query parameter '" + key + "' is not a number: '" + *v + "'");
    }
    return out;
  }

  std::optional<long long> integer(const std::string& key, long long min) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    long long out = 0;
    const char* end = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(v->data(), end, out);
    if (ec != std::errc() || ptr != end || v->empty() || out < min) {
      throw Error(ErrorKind::kRange, "query parameter '" + key + "' must be an integer >= " +
                                         std::to_string(min) + ": '" + *v + "'");
    }
    return out;
  }

 private:
  const std::multimap<std::string, std::string>& q_;
};

Json parse_body(const std::string& body) {
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) throw Error(ErrorKind::kValidation, "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("malformed JSON body: ") + e.what());
  }
}

std::string required_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorKind::kValidation, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string optional_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw Error(ErrorKind::kValidation, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

const MatchMatrix& select_matrix(const Session& s, const Query& q) {
  const auto left = q.text("left");
  const auto right = q.text("right");
  if (left || right) {
    if (!left || !right) throw Error(ErrorKind::kRange, "'left' and 'right' go together");
    if (const MatchMatrix* m = s.find_matrix(*left, *right)) return *m;
    throw Error(ErrorKind::kUnknownPair, "no match between '" + *left + "' and '" + *right + "'");
  }
  if (s.matrices().empty()) throw Error(ErrorKind::kUnknownPair, "session has no matches");
  return *s.matrices().front();
}

Json decision_json(const MatchDecision& d) {
  return Json{{"leftId", d.left_id},
              {"rightId", d.right_id},
              {"status", std::string(to_string(d.status))},
              {"annotation", std::string(to_string(d.annotation))},
              {"author", d.author},
              {"assignee", d.assignee},
              {"timestamp", format_timestamp(d.timestamp)}};
}

Json concept_json(const ConceptLabel& c) {
  return Json{{"id", c.id},
              {"name", c.name},
              {"schemaId", c.schema_id},
              {"memberCount", c.member_element_ids.size()},
              {"elementIds", c.member_element_ids}};
}

Json link_json(const Session& s, const MatchMatrix& m, const Link& l) {
  const SchemaElement& le = m.left().element(l.left);
  const SchemaElement& re = m.right().element(l.right);
  const auto d = s.decision(le.id, re.id);
  return Json{{"leftId", le.id},
              {"leftName", le.name},
              {"leftPath", le.path},
              {"leftConcept", s.concept_of(m.left_schema_id(), l.left).value_or("")},
              {"rightId", re.id},
              {"rightName", re.name},
              {"rightPath", re.path},
              {"rightConcept", s.concept_of(m.right_schema_id(), l.right).value_or("")},
              {"score", l.score},
              {"status", d ? std::string(to_string(d->status)) : "none"},
              {"annotation", d ? std::string(to_string(d->annotation)) : "none"},
              {"assignee", d ? d->assignee : ""},
              {"author", d ? d->author : ""}};
}

int status_rank(const std::optional<MatchDecision>& d) {
  if (!d) return 0;
  switch (d->status) {
    case DecisionStatus::kCandidate:
      return 1;
    case DecisionStatus::kAccepted:
      return 2;
    case DecisionStatus::kRejected:
      return 3;
  }
  return 0;
}

ElementSet side_nodes(const Schema& schema, const Query& q, const std::string& side) {
  ElementSet set = all_elements(schema);
  if (auto root = q.text(side + "Subtree")) {
    set = node_filter(schema, FilterSpec{SubtreeRoot{schema.id(), *root}});
  }
  auto lo = q.integer(side + "DepthMin", 1);
  auto hi = q.integer(side + "DepthMax", 1);
  if (!lo) lo = q.integer("depthMin", 1);
  if (!hi) hi = q.integer("depthMax", 1);
  if (lo || hi) {
    const int dlo = static_cast<int>(lo.value_or(1));
    const int dhi = static_cast<int>(hi.value_or(std::max(schema.max_depth(), dlo)));
    const ElementSet depth = node_filter(schema, FilterSpec{DepthRange{dlo, dhi}});
    ElementSet both;
    std::set_intersection(set.begin(), set.end(), depth.begin(), depth.end(),
                          std::back_inserter(both));
    set = std::move(both);
  }
  return set;
}

HttpResponse list_links(const Session& s, const Query& q) {
  const MatchMatrix& m = select_matrix(s, q);
  const ConfidenceRange range{q.number("minScore").value_or(-1.0),
                              q.number("maxScore").value_or(1.0)};
  const ElementSet left = side_nodes(m.left(), q, "left");
  const ElementSet right = side_nodes(m.right(), q, "right");
  std::vector<Link> links = apply(m, std::span(&range, 1), left, right);

  const std::string sort = q.text("sort").value_or("score");
  const std::string order = q.text("order").value_or(sort == "score" ? "desc" : "asc");
  if (order != "asc" && order != "desc") throw Error(ErrorKind::kRange, "order must be asc or desc");
  const bool desc = order == "desc";
  auto ordered = [&](auto key) {
    std::stable_sort(links.begin(), links.end(), [&](const Link& a, const Link& b) {
      return desc ? key(b) < key(a) : key(a) < key(b);
    });
  };
  auto decision_of = [&](const Link& l) {
    return s.decision(m.left().element(l.left).id, m.right().element(l.right).id);
  };
  if (sort == "score") {
    if (!desc) ordered([](const Link& l) { return l.score; });
  } else if (sort == "status") {
    ordered([&](const Link& l) { return status_rank(decision_of(l)); });
  } else if (sort == "leftPath") {
    ordered([&](const Link& l) -> const std::string& { return m.left().element(l.left).path; });
  } else if (sort == "rightPath") {
    ordered([&](const Link& l) -> const std::string& { return m.right().element(l.right).path; });
  } else if (sort == "assignee") {
    ordered([&](const Link& l) {
      auto d = decision_of(l);
      return d ? d->assignee : std::string();
    });
  } else {
    throw Error(ErrorKind::kRange, "unknown sort key '" + sort + "'");
  }

  const auto offset = static_cast<std::size_t>(q.integer("offset", 0).value_or(0));
  const auto limit = static_cast<std::size_t>(
      q.integer("limit", 0).value_or(static_cast<long long>(links.size())));
  Json page = Json::array();
  for (std::size_t i = offset; i < links.size() && i - offset < limit; ++i) {
    page.push_back(link_json(s, m, links[i]));
  }
  return json_response(200, Json{{"leftSchema", m.left_schema_id()},
                                 {"rightSchema", m.right_schema_id()},
                                 {"total", links.size()},
                                 {"offset", offset},
                                 {"limit", limit},
                                 {"links", page}});
}

std::vector<std::pair<std::string, std::shared_ptr<const Schema>>> all_schemas(
    const SessionStore& store) {
  std::map<std::string, std::shared_ptr<const Schema>> out;
  for (const auto& id : store.ids()) {
    auto s = store.snapshot(id);
    for (const auto& sid : s->schema_ids()) out.emplace(sid, s->schema_ptr(sid));
  }
  return {out.begin(), out.end()};
}

}  // namespace

std::unique_ptr<SessionStore> SessionStore::open_directory(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, "not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > kSessionSuffix.size() &&
        name.ends_with(kSessionSuffix)) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  auto store = std::make_unique<SessionStore>();
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    store->add(name.substr(0, name.size() - kSessionSuffix.size()), load_session_file(f.string()),
               f.string());
  }
  return store;
}

void SessionStore::add(std::string id, Session session, std::string path) {
  auto slot = std::make_unique<Slot>();
  slot->path = std::move(path);
  slot->current = std::make_shared<const Session>(std::move(session));
  if (!slots_.emplace(id, std::move(slot)).second) {
    throw Error(ErrorKind::kDuplicate, "session '" + id + "' is already open");
  }
}

std::vector<std::string> SessionStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, slot] : slots_) out.push_back(id);
  return out;
}

SessionStore::Slot& SessionStore::find_slot(std::string_view id) const {
  auto it = slots_.find(id);
  if (it == slots_.end()) throw Error(ErrorKind::kUnknownId, "unknown session '" + std::string(id) + "'");
  return *it->second;
}

std::shared_ptr<const Session> SessionStore::snapshot(std::string_view id) const {
  return load(find_slot(id));
}

std::shared_ptr<const Session> SessionStore::load(const Slot& slot) {
  std::lock_guard lock(slot.pointer);
  return slot.current;
}

void SessionStore::publish(Slot& slot, std::shared_ptr<const Session> s) {
  std::lock_guard lock(slot.pointer);
  slot.current = std::move(s);
}

HttpResponse Service::handle(const HttpRequest& req) {
  try {
    const auto parts = split_path(req.path);
    const Query q(req.query);
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";

    if (get && parts.size() == 1 && parts[0] == "schemas") {
      Json arr = Json::array();
      for (const auto& [id, schema] : all_schemas(*store_)) {
        arr.push_back(Json{{"id", id},
                           {"name", schema->name()},
                           {"sourceFormat", std::string(to_string(schema->source_format()))},
                           {"elementCount", schema->element_count()},
                           {"maxDepth", schema->max_depth()}});
      }
      return json_response(200, Json{{"schemas", arr}});
    }
    if (get && parts.size() == 3 && parts[0] == "schemas" && parts[2] == "tree") {
      for (const auto& [id, schema] : all_schemas(*store_)) {
        if (id == parts[1]) return HttpResponse{200, "application/json", write_canonical(*schema)};
      }
      throw Error(ErrorKind::kUnknownId, "unknown schema '" + parts[1] + "'");
    }
    if (get && parts.size() == 1 && parts[0] == "sessions") {
      return json_response(200, Json{{"sessions", store_->ids()}});
    }
    if (parts.size() < 3 || parts[0] != "sessions") {
      return error_response(404, "not_found", "no route for " + req.method + " " + req.path);
    }

    const std::string& sid = parts[1];
    const std::string& op = parts[2];
    if (get && parts.size() == 3 && op == "links") return list_links(*store_->snapshot(sid), q);
    if (get && parts.size() == 3 && op == "partition") {
      auto s = store_->snapshot(sid);
      const MatchMatrix& m = select_matrix(*s, q);
      const std::string mode = q.text("mode").value_or("validated");
      if (mode != "validated" && mode != "automatic") {
        throw Error(ErrorKind::kRange, "mode must be validated or automatic");
      }
      const auto report = partition(
          *s, m.left_schema_id(), m.right_schema_id(),
          mode == "validated" ? PartitionMode::kValidated : PartitionMode::kAutomatic,
          q.number("threshold"));
      return HttpResponse{200, "application/json", render_report(report).json};
    }
    if (get && parts.size() == 3 && op == "concept-matches") {
      auto s = store_->snapshot(sid);
      Json arr = Json::array();
      for (const auto& cm : s->compute_concept_matches()) {
        arr.push_back(Json{{"leftConceptId", cm.left_concept_id},
                           {"leftConcept", s->concept_by_id(cm.left_concept_id).name},
                           {"rightConceptId", cm.right_concept_id},
                           {"rightConcept", s->concept_by_id(cm.right_concept_id).name},
                           {"support", cm.support}});
      }
      return json_response(200, Json{{"conceptMatches", arr}});
    }
    if (get && parts.size() == 4 && op == "export") {
      auto s = store_->snapshot(sid);
      const std::string& what = parts[3];
      if (what == "concepts") {
        return HttpResponse{200, "text/csv", export_concept_sheet(*s, select_matrix(*s, q))};
      }
      if (what == "elements") {
        return HttpResponse{200, "text/csv", export_element_sheet(*s, select_matrix(*s, q))};
      }
      if (what == "matrix") {
        const double lo = q.number("lo").value_or(s->threshold());
        return HttpResponse{200, "text/csv", export_matrix(select_matrix(*s, q), lo)};
      }
      throw Error(ErrorKind::kUnknownId, "unknown export '" + what + "'");
    }
    if (post && parts.size() == 3 && op == "decisions") {
      const Json body = parse_body(req.body);
      const std::string left = required_string(body, "leftId");
      const std::string right = required_string(body, "rightId");
      const auto status = parse_status(required_string(body, "status"));
      if (!status) throw Error(ErrorKind::kValidation, "status must be candidate, accepted or rejected");
      const std::string ann = optional_string(body, "annotation");
      const auto annotation = ann.empty() ? std::optional(Annotation::kNone) : parse_annotation(ann);
      if (!annotation) throw Error(ErrorKind::kValidation, "unknown annotation '" + ann + "'");
      const std::string author = optional_string(body, "author");
      const std::string assignee = optional_string(body, "assignee");
      const MatchDecision d = store_->update(sid, [&](Session& s) {
        return s.record_decision(left, right, *status, *annotation, author, assignee);
      });
      return json_response(200, decision_json(d));
    }
    if (post && parts.size() == 3 && op == "concepts") {
      const Json body = parse_body(req.body);
      const std::string schema = required_string(body, "schemaId");
      const std::string name = required_string(body, "name");
      auto it = body.find("elementIds");
      if (it == body.end() || !it->is_array()) {
        throw Error(ErrorKind::kValidation, "field 'elementIds' must be an array");
      }
      std::vector<std::string> ids;
      for (const auto& e : *it) {
        if (!e.is_string()) throw Error(ErrorKind::kValidation, "elementIds must be strings");
        ids.push_back(e.get<std::string>());
      }
      const ConceptLabel c = store_->update(
          sid, [&](Session& s) { return s.assign_concept(schema, name, ids); });
      return json_response(200, concept_json(c));
    }
    if (post && parts.size() == 3 && op == "incremental-match") {
      const Json body = parse_body(req.body);
      const std::string concept_id = required_string(body, "conceptId");
      std::optional<double> min_score;
      if (auto it = body.find("minScore"); it != body.end() && !it->is_null()) {
        if (!it->is_number()) throw Error(ErrorKind::kValidation, "minScore must be a number");
        min_score = it->get<double>();
      }
      auto s = store_->snapshot(sid);
      const IncrementalResult r = s->incremental_match(concept_id, min_score);
      const MatchMatrix* m = s->find_matrix(r.left_schema_id, r.right_schema_id);
      Json links = Json::array();
      for (const auto& l : r.links) links.push_back(link_json(*s, *m, l));
      return json_response(200, Json{{"conceptId", concept_id},
                                     {"leftSchema", r.left_schema_id},
                                     {"rightSchema", r.right_schema_id},
                                     {"pairsConsidered", r.pairs_considered},
                                     {"links", links}});
    }
    return error_response(404, "not_found", "no route for " + req.method + " " + req.path);
  } catch (const Error& e) {
    return error_response(status_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

struct Service::Server {
  httplib::Server http;
};

Service::Server& Service::server() {
  if (!server_) {
    server_ = std::make_shared<Server>();
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      HttpRequest r{req.method, req.path, {req.params.begin(), req.params.end()}, req.body};
      const HttpResponse out = handle(r);
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    server_->http.Get(".*", handler);
    server_->http.Post(".*", handler);
  }
  return *server_;
}

bool Service::serve(const std::string& host, int port) { return server().http.listen(host, port); }

int Service::bind_ephemeral(const std::string& host) {
  return server().http.bind_to_any_port(host);
}

bool Service::listen_after_bind() { return server().http.listen_after_bind(); }

void Service::stop() {
  if (server_) server_->http.stop();
}

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  std::string host = "127.0.0.1";
  std::string_view port_text = text;
  if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  int port = 0;
  const char* end = port_text.data() + port_text.size();
  auto [ptr, ec] = std::from_chars(port_text.data(), end, port);
  if (ec != std::errc() || ptr != end || port_text.empty() || port < 0 || port > 65535) {
    throw Error(ErrorKind::kConfig, "bad listen address '" + std::string(text) + "'");
  }
  return {host, port};
}

}  // namespace swb
