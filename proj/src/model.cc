#include "swb/model.h"

#include <algorithm>
#include <functional>
#include <set>

#include "swb/error.h"

namespace swb {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnknownId: return "unknown-id";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kSyntax: return "syntax";
    case ErrorKind::kDuplicate: return "duplicate";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kVersion: return "version";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kIllegalTransition: return "illegal-transition";
    case ErrorKind::kUnknownPair: return "unknown-pair";
    case ErrorKind::kUnknownVoter: return "unknown-voter";
    case ErrorKind::kResource: return "resource";
    case ErrorKind::kMissingPair: return "missing-pair";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

std::string_view to_string(SourceFormat format) {
  switch (format) {
    case SourceFormat::kDdl: return "ddl";
    case SourceFormat::kXsd: return "xsd";
    case SourceFormat::kCanonical: return "canonical";
  }
  return "canonical";
}

std::optional<SourceFormat> parse_source_format(std::string_view text) {
  if (text == "ddl") return SourceFormat::kDdl;
  if (text == "xsd") return SourceFormat::kXsd;
  if (text == "canonical") return SourceFormat::kCanonical;
  return std::nullopt;
}

bool is_valid_schema_id(std::string_view id) {
  return !id.empty() && id.find(':') == std::string_view::npos &&
         id.find('/') == std::string_view::npos;
}

Schema Schema::from_tree(std::string id, std::string name, SourceFormat format,
                         std::vector<SchemaNode> roots) {
  std::vector<std::string> problems;
  if (!is_valid_schema_id(id)) {
    problems.push_back("schema id '" + id +
                       "' must be non-empty and contain no ':' or '/'");
  }

  Schema s;
  s.id_ = std::move(id);
  s.name_ = std::move(name);
  s.format_ = format;

  // Iterative pre-order walk keeps deep XSD nesting off the call stack.
  struct Frame {
    SchemaNode* node;
    std::optional<ElementIndex> parent;
  };
  std::vector<Frame> stack;
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
    stack.push_back({&*it, std::nullopt});
  }
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const ElementIndex index = s.elements_.size();
    SchemaElement e;
    e.id = f.node->id.empty()
               ? s.id_ + ":" + std::to_string(index + 1)
               : std::move(f.node->id);
    e.name = std::move(f.node->name);
    e.documentation = std::move(f.node->documentation);
    e.type_hint = std::move(f.node->type_hint);
    e.parent = f.parent;
    if (f.parent) {
      const SchemaElement& p = s.elements_[*f.parent];
      e.depth = p.depth + 1;
      e.path = p.path + "/" + e.name;
      s.elements_[*f.parent].children.push_back(index);
    } else {
      e.depth = 1;
      e.path = e.name;
    }
    if (e.id.empty()) problems.push_back("element with empty id");
    auto [_, inserted] = s.by_id_.emplace(e.id, index);
    if (!inserted) problems.push_back("duplicate element id '" + e.id + "'");
    s.elements_.push_back(std::move(e));
    auto& kids = f.node->children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      stack.push_back({&*it, index});
    }
  }

  if (!problems.empty()) {
    std::string msg = "schema validation failed:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorKind::kValidation, msg);
  }

  s.subtree_size_.assign(s.elements_.size(), 1);
  for (ElementIndex i = s.elements_.size(); i-- > 0;) {
    if (auto p = s.elements_[i].parent) s.subtree_size_[*p] += s.subtree_size_[i];
  }
  return s;
}

std::vector<ElementIndex> Schema::roots() const {
  std::vector<ElementIndex> out;
  for (ElementIndex i = 0; i < elements_.size(); ++i) {
    if (!elements_[i].parent) out.push_back(i);
  }
  return out;
}

int Schema::max_depth() const {
  int d = 0;
  for (const auto& e : elements_) d = std::max(d, e.depth);
  return d;
}

std::optional<ElementIndex> Schema::find(std::string_view element_id) const {
  auto it = by_id_.find(std::string(element_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

ElementIndex Schema::index_of(std::string_view element_id) const {
  if (auto i = find(element_id)) return *i;
  throw Error(ErrorKind::kUnknownId, "unknown element id '" +
                                         std::string(element_id) +
                                         "' in schema '" + id_ + "'");
}

std::optional<std::string> Schema::parent_id(ElementIndex i) const {
  const auto& e = elements_.at(i);
  if (!e.parent) return std::nullopt;
  return elements_[*e.parent].id;
}

std::vector<SchemaNode> Schema::to_tree() const {
  std::function<SchemaNode(ElementIndex)> build = [&](ElementIndex i) {
    const auto& e = elements_[i];
    SchemaNode n{e.id, e.name, e.documentation, e.type_hint, {}};
    n.children.reserve(e.children.size());
    for (ElementIndex c : e.children) n.children.push_back(build(c));
    return n;
  };
  std::vector<SchemaNode> out;
  for (ElementIndex r : roots()) out.push_back(build(r));
  return out;
}

std::size_t element_count(const Schema& schema) { return schema.element_count(); }

ElementSet subtree_elements(const Schema& schema, ElementIndex root) {
  if (root >= schema.element_count()) {
    throw Error(ErrorKind::kUnknownId,
                "element index " + std::to_string(root) + " out of range");
  }
  ElementSet out(schema.subtree_size(root));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = root + k;
  return out;
}

ElementSet subtree_elements(const Schema& schema, std::string_view root_id) {
  return subtree_elements(schema, schema.index_of(root_id));
}

ElementSet elements_at_depth(const Schema& schema, int lo, int hi) {
  if (lo < 1 || lo > hi) {
    throw Error(ErrorKind::kRange, "depth range [" + std::to_string(lo) + ", " +
                                       std::to_string(hi) +
                                       "] requires 1 <= lo <= hi");
  }
  ElementSet out;
  const auto& els = schema.elements();
  for (ElementIndex i = 0; i < els.size(); ++i) {
    if (els[i].depth >= lo && els[i].depth <= hi) out.push_back(i);
  }
  return out;
}

std::vector<std::string> element_ids(const Schema& schema, const ElementSet& set) {
  std::vector<std::string> out;
  out.reserve(set.size());
  for (ElementIndex i : set) out.push_back(schema.element(i).id);
  return out;
}

}  // namespace swb
