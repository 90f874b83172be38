#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swb/analysis.h"
#include "swb/error.h"
#include "swb/export.h"
#include "swb/ingest.h"
#include "swb/match.h"
#include "swb/session.h"

namespace py = pybind11;

namespace swb {
namespace {

using SchemaPtr = std::shared_ptr<const Schema>;
using MatrixPtr = std::shared_ptr<const MatchMatrix>;

// pybind11 holders are non-const; the library shares immutable objects.
SchemaPtr share(const std::shared_ptr<Schema>& s) { return s; }

std::shared_ptr<Schema> own(Schema s) { return std::make_shared<Schema>(std::move(s)); }

std::shared_ptr<Schema> own(const SchemaPtr& s) { return std::const_pointer_cast<Schema>(s); }

py::list warnings_of(const ParseReport& report) {
  py::list out;
  for (const auto& w : report.warnings) out.append(py::make_tuple(w.line, w.column, w.message));
  return out;
}

DecisionStatus status_arg(const std::string& text) {
  auto s = parse_status(text);
  if (!s) throw Error(ErrorKind::kValidation, "unknown status '" + text + "'");
  return *s;
}

Annotation annotation_arg(const std::string& text) {
  auto a = parse_annotation(text);
  if (!a) throw Error(ErrorKind::kValidation, "unknown annotation '" + text + "'");
  return *a;
}

py::dict decision_dict(const MatchDecision& d) {
  py::dict out;
  out["left"] = d.left_id;
  out["right"] = d.right_id;
  out["status"] = std::string(to_string(d.status));
  out["annotation"] = std::string(to_string(d.annotation));
  out["author"] = d.author;
  out["assignee"] = d.assignee;
  out["timestamp"] = format_timestamp(d.timestamp);
  return out;
}

}  // namespace
}  // namespace swb

PYBIND11_MODULE(_core, m) {
  using namespace swb;
  m.doc() = "Schema matching, validation and vocabulary analysis";

  // Error(message) with a .kind attribute such as "unknown-id".
  static PyObject* error_type = PyErr_NewException("schema_workbench.Error", PyExc_RuntimeError, nullptr);
  m.attr("Error") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(py::str(e.what()));
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type, inst.ptr());
    }
  });

  py::class_<Schema, std::shared_ptr<Schema>>(m, "Schema")
      .def_property_readonly("id", &Schema::id)
      .def_property_readonly("name", &Schema::name)
      .def_property_readonly("max_depth", &Schema::max_depth)
      .def("__len__", &Schema::element_count)
      .def("element_ids", [](const Schema& s) {
        std::vector<std::string> ids;
        for (const auto& e : s.elements()) ids.push_back(e.id);
        return ids;
      })
      .def("path", [](const Schema& s, const std::string& id) { return s.element(s.index_of(id)).path; })
      .def("depth", [](const Schema& s, const std::string& id) { return s.element(s.index_of(id)).depth; })
      .def("__eq__", [](const Schema& a, const Schema& b) { return a == b; });

  m.def(
      "parse_ddl",
      [](const std::string& text, const std::string& id, const std::string& name) {
        IngestResult r = parse_ddl(text, id, name);
        return py::make_tuple(own(std::move(r.schema)), warnings_of(r.report));
      },
      py::arg("text"), py::arg("schema_id"), py::arg("name") = "",
      "Returns (schema, [(line, column, message), ...]).");
  m.def(
      "parse_xsd",
      [](const std::string& text, const std::string& id, const std::string& name) {
        IngestResult r = parse_xsd(text, id, name);
        return py::make_tuple(own(std::move(r.schema)), warnings_of(r.report));
      },
      py::arg("text"), py::arg("schema_id"), py::arg("name") = "");
  m.def("read_canonical", [](const std::string& text) { return own(read_canonical(text)); });
  m.def("write_canonical", [](const Schema& s) { return write_canonical(s); });

  py::class_<MatchConfig>(m, "MatchConfig")
      .def(py::init<>())
      .def_readwrite("saturation", &MatchConfig::saturation)
      .def_readwrite("pair_budget", &MatchConfig::pair_budget)
      .def_readwrite("threshold", &MatchConfig::threshold)
      .def_readwrite("threads", &MatchConfig::threads)
      .def_property(
          "voters",
          [](const MatchConfig& c) {
            std::vector<std::string> names;
            for (VoterId v : c.voters) names.emplace_back(to_string(v));
            return names;
          },
          [](MatchConfig& c, const std::vector<std::string>& names) {
            c.voters.clear();
            for (const auto& n : names) c.voters.push_back(parse_voter(n));
          });

  py::class_<Link>(m, "Link")
      .def_readonly("left", &Link::left)
      .def_readonly("right", &Link::right)
      .def_readonly("score", &Link::score)
      .def("__repr__", [](const Link& l) {
        return "Link(" + std::to_string(l.left) + ", " + std::to_string(l.right) + ", " +
               format_score(l.score) + ")";
      });

  py::class_<MatchMatrix, std::shared_ptr<MatchMatrix>>(m, "MatchMatrix")
      .def_property_readonly("rows", &MatchMatrix::rows)
      .def_property_readonly("cols", &MatchMatrix::cols)
      .def_property_readonly("left", [](const MatchMatrix& mm) { return own(mm.left_ptr()); })
      .def_property_readonly("right", [](const MatchMatrix& mm) { return own(mm.right_ptr()); })
      .def("score", &MatchMatrix::score, py::arg("i"), py::arg("j"))
      .def("links_in_range", &MatchMatrix::links_in_range, py::arg("lo") = -1.0, py::arg("hi") = 1.0)
      .def("voter_scores", [](const MatchMatrix& mm, ElementIndex i, ElementIndex j) {
        py::dict out;
        for (const auto& v : mm.voter_scores(i, j)) {
          out[py::str(std::string(to_string(v.voter)))] =
              py::make_tuple(v.similarity, v.evidence_mass, v.confidence);
        }
        return out;
      });

  m.def(
      "match",
      [](const std::shared_ptr<Schema>& left, const std::shared_ptr<Schema>& right, const MatchConfig& config) {
        MatchMatrix mm;
        {
          py::gil_scoped_release release;
          mm = match(share(left), share(right), config);
        }
        return std::make_shared<MatchMatrix>(std::move(mm));
      },
      py::arg("left"), py::arg("right"), py::arg("config") = MatchConfig{});

  m.def("suggest_concepts", [](const Schema& s) {
    py::list out;
    for (const auto& sug : suggest_concepts(s)) out.append(py::make_tuple(sug.name, sug.member_element_ids));
    return out;
  });

  py::class_<Session>(m, "Session")
      .def(py::init([](const std::string& id, const MatchConfig& config) { return Session(id, config); }),
           py::arg("id") = "session", py::arg("config") = MatchConfig{})
      .def_property_readonly("id", &Session::id)
      .def_property_readonly("schema_ids", &Session::schema_ids)
      .def("add_schema", [](Session& s, const std::shared_ptr<Schema>& schema) { s.add_schema(share(schema)); })
      .def("add_matrix", [](Session& s, const std::shared_ptr<MatchMatrix>& mm) { s.add_matrix(mm); })
      .def(
          "assign_concept",
          [](Session& s, const std::string& schema_id, const std::string& name,
             const std::vector<std::string>& ids) { return s.assign_concept(schema_id, name, ids).id; },
          "Returns the concept id.")
      .def("concepts",
           [](const Session& s, const std::string& schema_id) {
             py::list out;
             for (const auto& c : s.concepts(schema_id)) {
               out.append(py::make_tuple(c.id, c.name, c.member_element_ids));
             }
             return out;
           })
      .def(
          "record_decision",
          [](Session& s, const std::string& left, const std::string& right, const std::string& status,
             const std::string& annotation, const std::string& author, const std::string& assignee) {
            return decision_dict(
                s.record_decision(left, right, status_arg(status), annotation_arg(annotation), author, assignee));
          },
          py::arg("left"), py::arg("right"), py::arg("status"), py::arg("annotation") = "none",
          py::arg("author") = "", py::arg("assignee") = "")
      .def("decision",
           [](const Session& s, const std::string& a, const std::string& b) -> std::optional<py::dict> {
             auto d = s.decision(a, b);
             if (!d) return std::nullopt;
             return decision_dict(*d);
           })
      .def("derive_concept_matches",
           [](Session& s) {
             py::list out;
             for (const auto& cm : s.derive_concept_matches()) {
               out.append(py::make_tuple(cm.left_concept_id, cm.right_concept_id, cm.support));
             }
             return out;
           })
      .def(
          "incremental_match",
          [](const Session& s, const std::string& concept_id, std::optional<double> min_score) {
            IncrementalResult r = s.incremental_match(concept_id, min_score);
            return py::make_tuple(r.pairs_considered, r.links);
          },
          py::arg("concept_id"), py::arg("min_score") = std::nullopt, "Returns (pairs_considered, links).")
      .def("event_count", [](const Session& s) { return s.events().size(); })
      .def("replay", &Session::replay)
      .def("__eq__", [](const Session& a, const Session& b) { return a == b; });

  m.def("save_session", [](const Session& s) { return save_session(s); });
  m.def(
      "load_session",
      [](const std::string& text, const std::vector<std::shared_ptr<Schema>>& schemas) {
        SessionEnvironment env;
        env.resolve_schema = [schemas](const std::string& id, const SchemaRef& ref) -> SchemaPtr {
          for (const auto& s : schemas) {
            if (s->id() != id) continue;
            if (!ref.sha256.empty() && sha256_hex(write_canonical(*s)) != ref.sha256) {
              throw Error(ErrorKind::kIntegrity, "schema '" + id + "' does not match its recorded hash");
            }
            return s;
          }
          throw Error(ErrorKind::kUnknownId, "no schema '" + id + "' supplied");
        };
        return load_session(text, env);
      },
      py::arg("text"), py::arg("schemas"));

  py::class_<PartitionReport>(m, "PartitionReport")
      .def_readonly("left_total", &PartitionReport::left_total)
      .def_readonly("right_total", &PartitionReport::right_total)
      .def_readonly("left_only", &PartitionReport::left_only)
      .def_readonly("right_only", &PartitionReport::right_only)
      .def_readonly("common_pairs", &PartitionReport::common_pairs)
      .def_readonly("common_left", &PartitionReport::common_left)
      .def_readonly("common_right", &PartitionReport::common_right)
      .def_readonly("left_only_percent", &PartitionReport::left_only_percent)
      .def_readonly("right_only_percent", &PartitionReport::right_only_percent)
      .def_readonly("common_left_percent", &PartitionReport::common_left_percent)
      .def_readonly("common_right_percent", &PartitionReport::common_right_percent);

  m.def(
      "partition",
      [](const Session& s, const std::string& left, const std::string& right, bool automatic,
         std::optional<double> threshold) {
        return partition(s, left, right, automatic ? PartitionMode::kAutomatic : PartitionMode::kValidated,
                         threshold);
      },
      py::arg("session"), py::arg("left"), py::arg("right"), py::arg("automatic") = false,
      py::arg("threshold") = std::nullopt);
  m.def(
      "render_partition",
      [](const PartitionReport& r, bool json) {
        RenderedReport out = render_report(r);
        return json ? out.json : out.text;
      },
      py::arg("report"), py::arg("json") = false);

  m.def("export_concept_sheet", [](const Session& s) { return export_concept_sheet(s); });
  m.def("export_element_sheet", [](const Session& s) { return export_element_sheet(s); });
  m.def("export_matrix", [](const MatchMatrix& mm, double lo) { return export_matrix(mm, lo); }, py::arg("matrix"),
        py::arg("lo") = 0.5);
}
