#include <openssl/evp.h>

#include <filesystem>

#include "json.hpp"
#include "swb/error.h"
#include "swb/ingest.h"
#include "swb/session.h"

namespace swb {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::string_view kSessionFormat = "schema-workbench-session";

Json config_to_json(const MatchConfig& c) {
  Json voters = Json::array();
  for (VoterId v : c.voters) voters.push_back(std::string(to_string(v)));
  return Json{{"voters", voters},        {"k", c.saturation},
              {"pair_budget", c.pair_budget}, {"threshold", c.threshold},
              {"threads", c.threads},    {"stopwords", c.stopwords_path}};
}

MatchConfig config_from_json(const Json& j) {
  MatchConfig c;
  c.voters.clear();
  for (const auto& v : j.at("voters")) c.voters.push_back(parse_voter(v.get<std::string>()));
  c.saturation = j.at("k").get<double>();
  c.pair_budget = j.at("pair_budget").get<std::size_t>();
  c.threshold = j.at("threshold").get<double>();
  c.threads = j.at("threads").get<unsigned>();
  c.stopwords_path = j.at("stopwords").get<std::string>();
  return c;
}

Json concept_to_json(const ConceptLabel& c) {
  return Json{{"id", c.id}, {"name", c.name}, {"schema_id", c.schema_id},
              {"members", c.member_element_ids}};
}

ConceptLabel concept_from_json(const Json& j) {
  return ConceptLabel{j.at("id").get<std::string>(), j.at("name").get<std::string>(),
                      j.at("schema_id").get<std::string>(),
                      j.at("members").get<std::vector<std::string>>()};
}

Json decision_to_json(const MatchDecision& d) {
  return Json{{"left_id", d.left_id},
              {"right_id", d.right_id},
              {"status", std::string(to_string(d.status))},
              {"annotation", std::string(to_string(d.annotation))},
              {"author", d.author},
              {"assignee", d.assignee},
              {"timestamp", format_timestamp(d.timestamp)}};
}

MatchDecision decision_from_json(const Json& j) {
  MatchDecision d;
  d.left_id = j.at("left_id").get<std::string>();
  d.right_id = j.at("right_id").get<std::string>();
  const auto status = parse_status(j.at("status").get<std::string>());
  const auto annotation = parse_annotation(j.at("annotation").get<std::string>());
  if (!status || !annotation) throw Error(ErrorKind::kIntegrity, "bad decision status/annotation");
  d.status = *status;
  d.annotation = *annotation;
  d.author = j.at("author").get<std::string>();
  d.assignee = j.at("assignee").get<std::string>();
  d.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
  return d;
}

Json concept_match_to_json(const ConceptMatch& m) {
  return Json{{"left_concept_id", m.left_concept_id},
              {"right_concept_id", m.right_concept_id},
              {"support", m.support}};
}

ConceptMatch concept_match_from_json(const Json& j) {
  return ConceptMatch{j.at("left_concept_id").get<std::string>(),
                      j.at("right_concept_id").get<std::string>(),
                      j.at("support").get<std::size_t>()};
}

Json event_to_json(const Event& e) {
  Json j{{"seq", e.seq}, {"at", format_timestamp(e.at)}};
  if (const auto* a = std::get_if<ConceptAssigned>(&e.payload)) {
    j["kind"] = "concept_assigned";
    j["payload"] = Json{{"schema_id", a->schema_id},
                        {"concept_name", a->concept_name},
                        {"element_ids", a->element_ids}};
  } else if (const auto* d = std::get_if<DecisionRecorded>(&e.payload)) {
    j["kind"] = "decision_recorded";
    j["payload"] = decision_to_json(d->decision);
  } else {
    const auto& m = std::get<ConceptMatchesDerived>(e.payload);
    j["kind"] = "concept_matches_derived";
    Json arr = Json::array();
    for (const auto& cm : m.matches) arr.push_back(concept_match_to_json(cm));
    j["payload"] = Json{{"matches", arr}};
  }
  return j;
}

Event event_from_json(const Json& j) {
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.at = parse_timestamp(j.at("at").get<std::string>());
  const std::string kind = j.at("kind").get<std::string>();
  const Json& p = j.at("payload");
  if (kind == "concept_assigned") {
    e.payload = ConceptAssigned{p.at("schema_id").get<std::string>(),
                                p.at("concept_name").get<std::string>(),
                                p.at("element_ids").get<std::vector<std::string>>()};
  } else if (kind == "decision_recorded") {
    e.payload = DecisionRecorded{decision_from_json(p)};
  } else if (kind == "concept_matches_derived") {
    ConceptMatchesDerived m;
    for (const auto& cm : p.at("matches")) m.matches.push_back(concept_match_from_json(cm));
    e.payload = std::move(m);
  } else {
    throw Error(ErrorKind::kIntegrity, "unknown event kind '" + kind + "'");
  }
  return e;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string save_session(const Session& session) {
  Json doc;
  doc["format"] = std::string(kSessionFormat);
  doc["format_version"] = std::string(kSessionFormatVersion);
  doc["id"] = session.id();
  doc["config"] = config_to_json(session.config());

  Json schemas = Json::array();
  Json concepts = Json::array();
  for (const auto& sid : session.schema_ids()) {
    const SchemaRef& ref = session.schema_ref(sid);
    schemas.push_back(Json{{"id", sid}, {"path", ref.path}, {"sha256", ref.sha256}});
    for (const auto& c : session.concepts(sid)) concepts.push_back(concept_to_json(c));
  }
  doc["schemas"] = std::move(schemas);

  Json pairs = Json::array();
  for (const auto& m : session.matrices()) {
    pairs.push_back(Json{{"left", m->left_schema_id()}, {"right", m->right_schema_id()}});
  }
  doc["pairs"] = std::move(pairs);
  doc["concepts"] = std::move(concepts);

  Json decisions = Json::array();
  for (const auto& [key, d] : session.decisions()) decisions.push_back(decision_to_json(d));
  doc["decisions"] = std::move(decisions);

  Json cms = Json::array();
  for (const auto& cm : session.concept_matches()) cms.push_back(concept_match_to_json(cm));
  doc["concept_matches"] = std::move(cms);

  Json events = Json::array();
  for (const auto& e : session.events()) events.push_back(event_to_json(e));
  doc["events"] = std::move(events);
  return doc.dump(1) + "\n";
}

Session load_session(std::string_view text, const SessionEnvironment& env) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIntegrity, std::string("session file is truncated or corrupt: ") +
                                           e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kSessionFormat) {
    throw Error(ErrorKind::kIntegrity, "not a session document");
  }
  const std::string version = doc.value("format_version", "");
  if (version != kSessionFormatVersion) {
    throw Error(ErrorKind::kVersion, "unsupported session format_version '" + version + "'");
  }

  try {
    Session s(doc.at("id").get<std::string>(), config_from_json(doc.at("config")));
    const Analyzer analyzer =
        env.make_analyzer ? env.make_analyzer(s.config()) : default_analyzer();
    for (const auto& sj : doc.at("schemas")) {
      const std::string sid = sj.at("id").get<std::string>();
      SchemaRef ref{sj.at("path").get<std::string>(), sj.at("sha256").get<std::string>()};
      if (!env.resolve_schema) throw Error(ErrorKind::kIntegrity, "no schema resolver");
      auto schema = env.resolve_schema(sid, ref);
      if (!schema || schema->id() != sid) {
        throw Error(ErrorKind::kIntegrity, "schema reference '" + sid + "' did not resolve");
      }
      s.add_schema(std::move(schema), std::move(ref));
    }
    for (const auto& pj : doc.at("pairs")) {
      auto l = s.schema_ptr(pj.at("left").get<std::string>());
      auto r = s.schema_ptr(pj.at("right").get<std::string>());
      s.add_matrix(std::make_shared<const MatchMatrix>(match(l, r, s.config(), analyzer)));
    }

    // The event log is authoritative; the snapshot sections must agree with it.
    std::vector<Event> events;
    for (const auto& ej : doc.at("events")) events.push_back(event_from_json(ej));
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (events[i].seq != i + 1) throw Error(ErrorKind::kIntegrity, "event log is not contiguous");
      s.apply_event(events[i]);
    }
    if (s.events_ != events) {
      throw Error(ErrorKind::kIntegrity, "event log does not replay to itself");
    }

    std::vector<ConceptLabel> concepts;
    for (const auto& cj : doc.at("concepts")) concepts.push_back(concept_from_json(cj));
    std::vector<ConceptLabel> replayed;
    for (const auto& sid : s.schema_ids()) {
      for (auto& c : s.concepts(sid)) replayed.push_back(std::move(c));
    }
    if (concepts != replayed) {
      throw Error(ErrorKind::kIntegrity, "concept section disagrees with the event log");
    }

    std::vector<MatchDecision> decisions;
    for (const auto& dj : doc.at("decisions")) decisions.push_back(decision_from_json(dj));
    std::vector<MatchDecision> replayed_decisions;
    for (const auto& [key, d] : s.decisions()) replayed_decisions.push_back(d);
    if (decisions != replayed_decisions) {
      throw Error(ErrorKind::kIntegrity, "decision section disagrees with the event log");
    }

    std::vector<ConceptMatch> cms;
    for (const auto& cj : doc.at("concept_matches")) cms.push_back(concept_match_from_json(cj));
    if (cms != s.concept_matches()) {
      throw Error(ErrorKind::kIntegrity, "concept matches disagree with the event log");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIntegrity, std::string("malformed session document: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIntegrity || e.kind() == ErrorKind::kVersion) throw;
    throw Error(ErrorKind::kIntegrity,
                "session fails referential integrity (" + std::string(to_string(e.kind())) +
                    "): " + e.what());
  }
}

void save_session_file(const Session& session, const std::string& path) {
  write_file(path, save_session(session));
}

Session load_session_file(const std::string& path) {
  const std::string text = read_file(path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [base](const std::string& p) {
    fs::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  SessionEnvironment env;
  env.resolve_schema = [&](const std::string& sid, const SchemaRef& ref) {
    const std::string bytes = read_file(resolve(ref.path).string());
    if (sha256_hex(bytes) != ref.sha256) {
      throw Error(ErrorKind::kIntegrity,
                  "schema '" + sid + "' at " + ref.path + " changed since the session was saved");
    }
    return std::make_shared<const Schema>(read_canonical(bytes));
  };
  env.make_analyzer = [&](const MatchConfig& c) {
    if (c.stopwords_path.empty()) return default_analyzer();
    return Analyzer::from_stopword_text(read_file(resolve(c.stopwords_path).string()));
  };
  return load_session(text, env);
}

}  // namespace swb
