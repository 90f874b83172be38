#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace swb {

using ElementIndex = std::size_t;

// Sorted, duplicate-free element positions within one schema.
using ElementSet = std::vector<ElementIndex>;

enum class SourceFormat { kDdl, kXsd, kCanonical };

std::string_view to_string(SourceFormat format);
std::optional<SourceFormat> parse_source_format(std::string_view text);

struct SchemaElement {
  std::string id;
  std::string name;
  std::string documentation;
  std::string type_hint;
  std::optional<ElementIndex> parent;
  int depth = 1;
  std::string path;
  std::vector<ElementIndex> children;

  friend bool operator==(const SchemaElement&, const SchemaElement&) = default;
};

// Construction-time tree node. Ids are optional: when empty, the schema
// assigns "schemaId:ordinal" in document order.
struct SchemaNode {
  std::string id;
  std::string name;
  std::string documentation;
  std::string type_hint;
  std::vector<SchemaNode> children;
};

/// A rooted, ordered tree of named elements.
///
/// Elements are stored in pre-order, so every subtree occupies a contiguous
/// index range starting at its root. Instances are immutable once built.
class Schema {
 public:
  Schema() = default;

  // Throws Error(kValidation) listing violated invariants (duplicate ids,
  // ids containing separators, malformed schema id).
  static Schema from_tree(std::string id, std::string name, SourceFormat format,
                          std::vector<SchemaNode> roots);

  const std::string& id() const { return id_; }
  const std::string& name() const { return name_; }
  SourceFormat source_format() const { return format_; }

  const std::vector<SchemaElement>& elements() const { return elements_; }
  const SchemaElement& element(ElementIndex i) const { return elements_.at(i); }
  std::size_t element_count() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }

  std::vector<ElementIndex> roots() const;
  int max_depth() const;

  std::optional<ElementIndex> find(std::string_view element_id) const;
  // Throws Error(kUnknownId).
  ElementIndex index_of(std::string_view element_id) const;

  std::optional<std::string> parent_id(ElementIndex i) const;

  // Number of elements in the subtree rooted at i, including i.
  std::size_t subtree_size(ElementIndex i) const { return subtree_size_.at(i); }

  // Rebuilds the node tree (ids retained).
  std::vector<SchemaNode> to_tree() const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.id_ == b.id_ && a.name_ == b.name_ && a.format_ == b.format_ &&
           a.elements_ == b.elements_;
  }

 private:
  std::string id_;
  std::string name_;
  SourceFormat format_ = SourceFormat::kCanonical;
  std::vector<SchemaElement> elements_;
  std::vector<std::size_t> subtree_size_;
  std::unordered_map<std::string, ElementIndex> by_id_;
};

std::size_t element_count(const Schema& schema);

// Throws Error(kUnknownId) if root_id is absent.
ElementSet subtree_elements(const Schema& schema, std::string_view root_id);
ElementSet subtree_elements(const Schema& schema, ElementIndex root);

// Throws Error(kRange) unless 1 <= lo <= hi.
ElementSet elements_at_depth(const Schema& schema, int lo, int hi);

std::vector<std::string> element_ids(const Schema& schema, const ElementSet& set);

// Schema ids must be non-empty and free of ':' and '/', which delimit
// element and concept ids.
bool is_valid_schema_id(std::string_view id);

}  // namespace swb
