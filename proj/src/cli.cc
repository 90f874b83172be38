#include "swb/cli.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "swb/analysis.h"
#include "swb/error.h"
#include "swb/export.h"
#include "swb/ingest.h"
#include "swb/service.h"
#include "swb/session.h"

namespace swb {
namespace {

namespace fs = std::filesystem;

std::string session_id_for(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  for (std::string_view suffix : {kSessionSuffix, std::string_view(".json")}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      name.resize(name.size() - suffix.size());
      break;
    }
  }
  return name.empty() ? "session" : name;
}

std::string schema_id_for(const std::string& path) {
  std::string id = fs::path(path).stem().string();
  for (char& c : id) {
    if (c == ':' || c == '/') c = '_';
  }
  return id.empty() ? "schema" : id;
}

// Relative to the directory that will hold the session file.
std::string relative_ref(const std::string& target, const std::string& session_path) {
  const fs::path base = fs::absolute(fs::path(session_path)).parent_path();
  return fs::absolute(target).lexically_normal().lexically_relative(base.lexically_normal())
      .generic_string();
}

void emit(std::ostream& out, const std::string& text, const std::string& path) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

Analyzer analyzer_for(const MatchConfig& config, const std::string& config_path) {
  if (config.stopwords_path.empty()) return default_analyzer();
  fs::path p(config.stopwords_path);
  if (p.is_relative() && !config_path.empty()) p = fs::path(config_path).parent_path() / p;
  return Analyzer::from_stopword_text(read_file(p.string()));
}

// Element ids may contain ':' themselves, so every colon is tried and the
// split whose halves name a pair of some matrix wins.
std::pair<std::string, std::string> split_pair(const Session& s, const std::string& text) {
  for (std::size_t colon = text.find(':'); colon != std::string::npos;
       colon = text.find(':', colon + 1)) {
    const std::string a = text.substr(0, colon);
    const std::string b = text.substr(colon + 1);
    for (const auto& m : s.matrices()) {
      if ((m->left().find(a) && m->right().find(b)) || (m->left().find(b) && m->right().find(a))) {
        return {a, b};
      }
    }
  }
  throw Error(ErrorKind::kUnknownPair, "--pair '" + text + "' names no pair of this session");
}

struct Options {
  // ingest
  std::string file, format, out, schema_id, name;
  // match
  std::string left, right, config, session_id;
  // session commands
  std::string session, schema, concept_id, pair, status, annotation = "none", author, assignee;
  std::vector<std::string> assign;
  bool suggest = false, accept_suggestions = false;
  double min_score = std::numeric_limits<double>::quiet_NaN();
  // analyze
  std::vector<std::string> sessions;
  bool do_partition = false, do_vocabulary = false, automatic = false, do_cluster = false, json = false;
  std::vector<std::string> vocabulary, search;
  double cutoff = 0.5, threshold = std::numeric_limits<double>::quiet_NaN();
  std::string left_schema, right_schema;
  // export
  bool concepts = false, elements = false, matrix = false;
  double lo = std::numeric_limits<double>::quiet_NaN();
  // serve
  std::string dir, listen;
};

std::optional<double> maybe(double v) {
  return std::isnan(v) ? std::nullopt : std::optional<double>(v);
}

const MatchMatrix& pick_matrix(const Session& s, const Options& o) {
  if (!o.left_schema.empty() || !o.right_schema.empty()) {
    if (const MatchMatrix* m = s.find_matrix(o.left_schema, o.right_schema)) return *m;
    throw Error(ErrorKind::kUnknownPair,
                "no match between '" + o.left_schema + "' and '" + o.right_schema + "'");
  }
  if (s.matrices().empty()) throw Error(ErrorKind::kUnknownPair, "session has no matches");
  return *s.matrices().front();
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  const std::string text = read_file(o.file);
  const std::string id = o.schema_id.empty() ? schema_id_for(o.file) : o.schema_id;
  IngestResult r;
  if (o.format == "ddl") {
    r = parse_ddl(text, id, o.name);
  } else if (o.format == "xsd") {
    r = parse_xsd(text, id, o.name);
  } else {
    r.schema = read_canonical(text);
  }
  if (!r.report.warnings.empty()) err << r.report.to_text();
  write_file(o.out, write_canonical(r.schema));
  out << "ingested " << r.schema.id() << ": " << r.schema.element_count() << " elements, depth "
      << r.schema.max_depth() << ", " << r.report.warnings.size() << " warnings -> " << o.out
      << "\n";
  return kExitOk;
}

int cmd_match(const Options& o, std::ostream& out) {
  MatchConfig config;
  if (!o.config.empty()) config = parse_match_config(read_file(o.config));
  const Analyzer analyzer = analyzer_for(config, o.config);
  if (!config.stopwords_path.empty() && !o.config.empty()) {
    // Stored relative to the session so the session stays relocatable.
    fs::path p(config.stopwords_path);
    if (p.is_relative()) p = fs::path(o.config).parent_path() / p;
    config.stopwords_path = relative_ref(p.string(), o.out);
  }

  const std::string left_text = read_file(o.left);
  const std::string right_text = read_file(o.right);
  auto left = std::make_shared<const Schema>(read_canonical(left_text));
  auto right = std::make_shared<const Schema>(read_canonical(right_text));

  const auto start = std::chrono::steady_clock::now();
  auto matrix = std::make_shared<const MatchMatrix>(match(left, right, config, analyzer));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Session s(o.session_id.empty() ? session_id_for(o.out) : o.session_id, config);
  s.add_schema(left, SchemaRef{relative_ref(o.left, o.out), sha256_hex(left_text)});
  s.add_schema(right, SchemaRef{relative_ref(o.right, o.out), sha256_hex(right_text)});
  s.add_matrix(matrix);
  save_session_file(s, o.out);

  char line[160];
  std::snprintf(line, sizeof(line), "matched %zu x %zu = %zu pairs in %.3f s\n", matrix->rows(),
                matrix->cols(), matrix->size(), seconds);
  out << line << "session written to " << o.out << "\n";
  return kExitOk;
}

int cmd_summarize(const Options& o, std::ostream& out, std::ostream& err) {
  Session s = load_session_file(o.session);
  const Schema& schema = s.schema(o.schema);
  if (o.suggest) {
    for (const auto& sg : suggest_concepts(schema)) {
      out << sg.root_id << "\t" << sg.name << "\t" << sg.descendant_count << " descendants\n";
    }
    return kExitOk;
  }
  bool changed = false;
  if (o.accept_suggestions) {
    std::set<std::string> names;
    for (const auto& c : s.concepts(o.schema)) names.insert(c.name);
    for (const auto& sg : suggest_concepts(schema)) {
      std::string name = sg.name;
      for (int n = 2; names.count(name); ++n) name = sg.name + " (" + std::to_string(n) + ")";
      try {
        s.assign_concept(o.schema, name, sg.member_element_ids);
        names.insert(name);
        changed = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kConflict) throw;
        err << "skipped suggestion " << sg.root_id << ": " << e.what() << "\n";
      }
    }
  }
  for (const auto& a : o.assign) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::kValidation, "--assign must be <concept>=<id,...>");
    }
    std::vector<std::string> ids;
    std::stringstream ss(a.substr(eq + 1));
    for (std::string id; std::getline(ss, id, ',');) {
      if (!id.empty()) ids.push_back(id);
    }
    const ConceptLabel& c = s.assign_concept(o.schema, a.substr(0, eq), ids);
    out << "assigned " << c.id << " " << c.name << " (" << c.member_element_ids.size()
        << " elements)\n";
    changed = true;
  }
  if (changed) save_session_file(s, o.session);

  const Summary sum = s.summary(o.schema);
  out << "SUMMARY " << sum.schema_id << ": " << sum.concepts.size() << " concepts, "
      << sum.unassigned_element_ids.size() << " unassigned elements\n";
  for (const auto& c : sum.concepts) {
    out << "  " << c.id << "\t" << c.name << "\t" << c.member_element_ids.size() << "\n";
  }
  return kExitOk;
}

int cmd_review(const Options& o, std::ostream& out) {
  const Session s = load_session_file(o.session);
  const IncrementalResult r = s.incremental_match(o.concept_id, maybe(o.min_score));
  const MatchMatrix* m = s.find_matrix(r.left_schema_id, r.right_schema_id);
  out << "REVIEW " << o.concept_id << ": " << r.links.size() << " links of "
      << r.pairs_considered << " pairs\n";
  for (const Link& l : r.links) {
    const auto& le = m->left().element(l.left);
    const auto& re = m->right().element(l.right);
    const auto d = s.decision(le.id, re.id);
    out << format_score(l.score) << "\t" << le.id << "\t" << le.path << "\t" << re.id << "\t"
        << re.path << "\t" << (d ? to_string(d->status) : "none") << "\n";
  }
  return kExitOk;
}

int cmd_decide(const Options& o, std::ostream& out) {
  Session s = load_session_file(o.session);
  const auto [l, r] = split_pair(s, o.pair);
  const auto status = parse_status(o.status);
  const auto annotation = parse_annotation(o.annotation);
  if (!status) throw Error(ErrorKind::kValidation, "unknown status '" + o.status + "'");
  if (!annotation) throw Error(ErrorKind::kValidation, "unknown annotation '" + o.annotation + "'");
  const MatchDecision d = s.record_decision(l, r, *status, *annotation, o.author, o.assignee);
  save_session_file(s, o.session);
  out << "decision " << d.left_id << " ~ " << d.right_id << ": " << to_string(d.status) << " ("
      << to_string(d.annotation) << ")\n";
  return kExitOk;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  const int modes = int(o.do_partition) + int(o.do_vocabulary) + int(o.do_cluster) +
                    int(!o.search.empty());
  if (modes != 1) {
    throw Error(ErrorKind::kValidation,
                "analyze needs exactly one of --partition, --vocabulary, --cluster, --search");
  }
  const PartitionMode mode = o.automatic ? PartitionMode::kAutomatic : PartitionMode::kValidated;
  std::vector<Session> sessions;
  sessions.push_back(load_session_file(o.session));
  for (const auto& p : o.vocabulary) {
    if (!p.empty()) sessions.push_back(load_session_file(p));
  }
  for (const auto& p : o.sessions) sessions.push_back(load_session_file(p));
  const Session& s = sessions.front();

  RenderedReport report;
  if (o.do_partition) {
    const MatchMatrix& m = pick_matrix(s, o);
    report = render_report(
        partition(s, m.left_schema_id(), m.right_schema_id(), mode, maybe(o.threshold)));
  } else if (!o.search.empty()) {
    const Schema query = read_canonical(read_file(o.search[0]));
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(o.search[1])) {
      if (e.is_regular_file() && e.path().extension() == ".json" &&
          !e.path().filename().string().ends_with(kSessionSuffix)) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    std::vector<std::shared_ptr<const Schema>> repo;
    for (const auto& f : files) {
      repo.push_back(std::make_shared<const Schema>(read_canonical(read_file(f.string()))));
    }
    MatchConfig config = s.config();
    if (auto t = maybe(o.threshold)) config.threshold = *t;
    const auto results = search(query, repo, config, default_analyzer());
    report = render_report(results, query.id());
  } else {
    std::vector<const Session*> ptrs;
    for (const auto& x : sessions) ptrs.push_back(&x);
    const Vocabulary vocab = comprehensive_vocabulary(corpus_from_sessions(ptrs, mode, maybe(o.threshold)));
    if (o.do_cluster) {
      const DistanceMatrix d = distance_matrix(vocab);
      report = render_report(cluster(d, o.cutoff), d, o.cutoff);
    } else {
      report = render_report(vocab);
    }
  }
  emit(out, o.json ? report.json : report.text, o.out);
  return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out) {
  if (int(o.concepts) + int(o.elements) + int(o.matrix) != 1) {
    throw Error(ErrorKind::kValidation, "export needs exactly one of --concepts, --elements, --matrix");
  }
  const Session s = load_session_file(o.session);
  const MatchMatrix& m = pick_matrix(s, o);
  std::string csv;
  if (o.concepts) {
    csv = export_concept_sheet(s, m);
  } else if (o.elements) {
    csv = export_element_sheet(s, m);
  } else {
    csv = export_matrix(m, maybe(o.lo).value_or(s.threshold()));
  }
  write_file(o.out, csv);
  out << "exported " << std::count(csv.begin(), csv.end(), '\n') - 1 << " rows to " << o.out
      << "\n";
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  std::string addr = o.listen;
  if (addr.empty()) {
    const char* env = std::getenv("SWB_LISTEN");
    addr = env ? env : "127.0.0.1:8080";
  }
  const auto [host, port] = parse_listen_address(addr);
  Service service(SessionStore::open_directory(o.dir));
  out << "serving " << o.dir << " on " << host << ":" << port << std::endl;
  if (!service.serve(host, port)) throw Error(ErrorKind::kIo, "cannot listen on " + addr);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Schema matching workbench", "swb"};
  app.require_subcommand(1);
  Options o;

  auto* ingest = app.add_subcommand("ingest", "Parse a schema into the canonical document format");
  ingest->add_option("file", o.file, "Input file")->required();
  ingest->add_option("--format", o.format, "ddl, xsd or canonical")
      ->required()
      ->check(CLI::IsMember({"ddl", "xsd", "canonical"}));
  ingest->add_option("--out", o.out, "Canonical output file")->required();
  ingest->add_option("--id", o.schema_id, "Schema id (default: file stem)");
  ingest->add_option("--name", o.name, "Schema display name");

  auto* match_cmd = app.add_subcommand("match", "Match two canonical schemata into a new session");
  match_cmd->add_option("left", o.left, "Left canonical schema")->required();
  match_cmd->add_option("right", o.right, "Right canonical schema")->required();
  match_cmd->add_option("--config", o.config, "Match configuration file");
  match_cmd->add_option("--out", o.out, "Session file to write")->required();
  match_cmd->add_option("--id", o.session_id, "Session id (default: file stem)");

  auto* summarize = app.add_subcommand("summarize", "Show, suggest or assign concepts");
  summarize->add_option("session", o.session)->required();
  summarize->add_option("--schema", o.schema, "Schema id")->required();
  auto* sg = summarize->add_flag("--suggest", o.suggest, "List suggested concepts");
  summarize->add_flag("--accept-suggestions", o.accept_suggestions,
                      "Assign every suggested concept")
      ->excludes(sg);
  summarize->add_option("--assign", o.assign, "<concept>=<id,...>; repeatable")->excludes(sg);

  auto* review = app.add_subcommand("review", "List links of one concept against the other schema");
  review->add_option("session", o.session)->required();
  review->add_option("--concept", o.concept_id, "Concept id")->required();
  review->add_option("--min-score", o.min_score, "Lowest score shown (default: threshold)");

  auto* decide = app.add_subcommand("decide", "Record a decision on a link");
  decide->add_option("session", o.session)->required();
  decide->add_option("--pair", o.pair, "<left id>:<right id>")->required();
  decide->add_option("--status", o.status, "candidate, accepted or rejected")->required();
  decide->add_option("--annotation", o.annotation, "equivalent, is-a, part-of, related, none");
  decide->add_option("--author", o.author);
  decide->add_option("--assignee", o.assignee);

  auto* analyze = app.add_subcommand("analyze", "Partition, vocabulary, clustering and search");
  analyze->add_option("session", o.session)->required();
  analyze->add_option("sessions", o.sessions, "Further sessions for corpus analyses");
  analyze->add_flag("--partition", o.do_partition);
  auto* vocab_opt =
      analyze->add_option("--vocabulary", o.vocabulary, "Further sessions")->expected(0, -1);
  analyze->add_flag("--cluster", o.do_cluster);
  analyze->add_option("--cutoff", o.cutoff, "Cluster cut height")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--search", o.search, "<query schema> <repository dir>")->expected(2);
  analyze->add_flag("--automatic", o.automatic, "Use links >= threshold instead of accepted decisions");
  analyze->add_option("--threshold", o.threshold);
  analyze->add_option("--left", o.left_schema);
  analyze->add_option("--right", o.right_schema);
  analyze->add_flag("--json", o.json, "Emit the structured document");
  analyze->add_option("--out", o.out, "Write the report to a file");

  auto* export_cmd = app.add_subcommand("export", "Write a CSV sheet");
  export_cmd->add_option("session", o.session)->required();
  export_cmd->add_flag("--concepts", o.concepts);
  export_cmd->add_flag("--elements", o.elements);
  export_cmd->add_flag("--matrix", o.matrix);
  export_cmd->add_option("--lo", o.lo, "Lowest score for --matrix (default: threshold)");
  export_cmd->add_option("--left", o.left_schema);
  export_cmd->add_option("--right", o.right_schema);
  export_cmd->add_option("--out", o.out)->required();

  auto* serve = app.add_subcommand("serve", "Serve the sessions of a directory over HTTP");
  serve->add_option("dir", o.dir)->required();
  serve->add_option("--listen", o.listen, "host:port (default: $SWB_LISTEN or 127.0.0.1:8080)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  o.do_vocabulary = vocab_opt->count() > 0;
  try {
    if (*ingest) return cmd_ingest(o, out, err);
    if (*match_cmd) return cmd_match(o, out);
    if (*summarize) return cmd_summarize(o, out, err);
    if (*review) return cmd_review(o, out);
    if (*decide) return cmd_decide(o, out);
    if (*analyze) return cmd_analyze(o, out);
    if (*export_cmd) return cmd_export(o, out);
    if (*serve) return cmd_serve(o, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitInternalError;
}

}  // namespace swb
