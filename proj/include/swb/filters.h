#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "swb/match.h"
#include "swb/model.h"

namespace swb {

// Inclusive score range.
struct ConfidenceRange {
  double lo = -1.0;
  double hi = 1.0;

  friend bool operator==(const ConfidenceRange&, const ConfidenceRange&) = default;
};

struct DepthRange {
  int lo = 1;
  int hi = 1;

  friend bool operator==(const DepthRange&, const DepthRange&) = default;
};

struct SubtreeRoot {
  std::string schema_id;
  std::string root_element_id;

  friend bool operator==(const SubtreeRoot&, const SubtreeRoot&) = default;
};

enum class FilterKind { kConfidence, kDepth, kSubtree };

struct FilterSpec {
  std::variant<ConfidenceRange, DepthRange, SubtreeRoot> params;

  FilterKind kind() const { return static_cast<FilterKind>(params.index()); }
};

enum class Side { kLeft, kRight };

// Restricts one endpoint of each link to an enabled element set.
struct NodeRestriction {
  Side side = Side::kLeft;
  ElementSet enabled;
};

using LinkFilter = std::variant<ConfidenceRange, NodeRestriction>;

// Throws Error(kRange) unless lo <= hi.
std::vector<Link> confidence_filter(const MatchMatrix& matrix, double lo, double hi);

// Depth specs map to elements_at_depth, subtree specs to subtree_elements.
// Throws Error(kRange) for a confidence spec or inverted depth range and
// Error(kUnknownId) for an unknown subtree root.
ElementSet node_filter(const Schema& schema, const FilterSpec& spec);

// Links whose endpoints are enabled on both sides and whose score passes
// every range, ordered by score descending.
std::vector<Link> apply(const MatchMatrix& matrix, std::span<const ConfidenceRange> link_filters,
                        const ElementSet& left_nodes, const ElementSet& right_nodes);

// Order-preserving refinement of an existing link list.
std::vector<Link> filter_links(std::span<const Link> links, const LinkFilter& filter);

ElementSet all_elements(const Schema& schema);

}  // namespace swb
