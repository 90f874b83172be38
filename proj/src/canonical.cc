#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "swb/error.h"
#include "swb/ingest.h"

namespace swb {
namespace {

using Json = nlohmann::ordered_json;

Json node_to_json(const Schema& s, ElementIndex i) {
  const SchemaElement& e = s.element(i);
  Json j;
  j["id"] = e.id;
  j["name"] = e.name;
  j["documentation"] = e.documentation;
  j["type_hint"] = e.type_hint;
  Json kids = Json::array();
  for (ElementIndex c : e.children) kids.push_back(node_to_json(s, c));
  j["children"] = std::move(kids);
  return j;
}

class Validator {
 public:
  std::vector<std::string> problems;

  std::string string_field(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      problems.push_back(where + ": missing field '" + key + "'");
      return {};
    }
    if (!it->is_string()) {
      problems.push_back(where + ": field '" + key + "' must be a string");
      return {};
    }
    return it->get<std::string>();
  }

  void check_keys(const Json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.contains(it.key())) {
        problems.push_back(where + ": unexpected field '" + it.key() + "'");
      }
    }
  }

  SchemaNode node(const Json& j, const std::string& where, std::set<std::string>& ids) {
    SchemaNode n;
    if (!j.is_object()) {
      problems.push_back(where + ": element must be an object");
      return n;
    }
    check_keys(j, {"id", "name", "documentation", "type_hint", "children"}, where);
    n.id = string_field(j, "id", where);
    n.name = string_field(j, "name", where);
    n.documentation = string_field(j, "documentation", where);
    n.type_hint = string_field(j, "type_hint", where);
    if (n.id.empty()) {
      problems.push_back(where + ": empty element id");
    } else if (!ids.insert(n.id).second) {
      problems.push_back(where + ": duplicate element id '" + n.id + "'");
    }
    children(j, where + "/" + n.name, ids, n.children);
    return n;
  }

  void children(const Json& j, const std::string& where, std::set<std::string>& ids,
                std::vector<SchemaNode>& out) {
    auto it = j.find("children");
    if (it == j.end()) {
      problems.push_back(where + ": missing field 'children'");
      return;
    }
    if (!it->is_array()) {
      problems.push_back(where + ": field 'children' must be an array");
      return;
    }
    for (const auto& c : *it) out.push_back(node(c, where, ids));
  }
};

}  // namespace

std::string ParseReport::to_text() const {
  std::string out;
  for (const auto& w : warnings) {
    out += "WARN " + std::to_string(w.line) + ":" + std::to_string(w.column) + " " +
           w.message + "\n";
  }
  return out;
}

std::string write_canonical(const Schema& schema) {
  Json doc;
  doc["format_version"] = std::string(kCanonicalFormatVersion);
  doc["id"] = schema.id();
  doc["name"] = schema.name();
  doc["documentation"] = "";
  // Top-level type_hint records the original source format.
  doc["type_hint"] = std::string(to_string(schema.source_format()));
  Json kids = Json::array();
  for (ElementIndex r : schema.roots()) kids.push_back(node_to_json(schema, r));
  doc["children"] = std::move(kids);
  return doc.dump(2) + "\n";
}

Schema read_canonical(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kValidation, std::string("canonical document is not valid JSON: ") +
                                            e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kValidation, "canonical document must be an object");
  }
  auto v = doc.find("format_version");
  if (v == doc.end() || !v->is_string()) {
    throw Error(ErrorKind::kVersion, "canonical document lacks a format_version string");
  }
  if (v->get<std::string>() != kCanonicalFormatVersion) {
    throw Error(ErrorKind::kVersion, "unsupported canonical format_version '" +
                                         v->get<std::string>() + "'");
  }

  Validator val;
  val.check_keys(doc, {"format_version", "id", "name", "documentation", "type_hint", "children"},
                 "schema");
  const std::string id = val.string_field(doc, "id", "schema");
  const std::string name = val.string_field(doc, "name", "schema");
  val.string_field(doc, "documentation", "schema");
  const std::string format_text = val.string_field(doc, "type_hint", "schema");
  if (!id.empty() && !is_valid_schema_id(id)) {
    val.problems.push_back("schema: id '" + id + "' must not contain ':' or '/'");
  }
  std::set<std::string> ids;
  std::vector<SchemaNode> roots;
  val.children(doc, "schema", ids, roots);
  if (!val.problems.empty()) {
    std::string msg = "canonical document violates structural invariants:";
    for (const auto& p : val.problems) msg += "\n  " + p;
    throw Error(ErrorKind::kValidation, msg);
  }
  const SourceFormat format =
      parse_source_format(format_text).value_or(SourceFormat::kCanonical);
  return Schema::from_tree(id, name, format, std::move(roots));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path + "'");
}

}  // namespace swb
