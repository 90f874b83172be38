#include "swb/filters.h"

#include <algorithm>

#include "swb/error.h"

namespace swb {
namespace {

void check_range(double lo, double hi) {
  if (!(lo <= hi)) {
    throw Error(ErrorKind::kRange, "confidence range lo must not exceed hi");
  }
}

std::vector<bool> mask_of(const ElementSet& set, std::size_t size) {
  std::vector<bool> mask(size, false);
  for (ElementIndex i : set) {
    if (i < size) mask[i] = true;
  }
  return mask;
}

}  // namespace

std::vector<Link> confidence_filter(const MatchMatrix& matrix, double lo, double hi) {
  check_range(lo, hi);
  return matrix.links_in_range(lo, hi);
}

ElementSet node_filter(const Schema& schema, const FilterSpec& spec) {
  if (const auto* d = std::get_if<DepthRange>(&spec.params)) {
    return elements_at_depth(schema, d->lo, d->hi);
  }
  if (const auto* s = std::get_if<SubtreeRoot>(&spec.params)) {
    if (!s->schema_id.empty() && s->schema_id != schema.id()) {
      throw Error(ErrorKind::kUnknownId,
                  "subtree filter targets schema '" + s->schema_id + "', not '" + schema.id() + "'");
    }
    return subtree_elements(schema, s->root_element_id);
  }
  throw Error(ErrorKind::kRange, "node_filter requires a depth or subtree spec");
}

std::vector<Link> apply(const MatchMatrix& matrix, std::span<const ConfidenceRange> link_filters,
                        const ElementSet& left_nodes, const ElementSet& right_nodes) {
  for (const auto& f : link_filters) check_range(f.lo, f.hi);
  std::vector<Link> out;
  for (ElementIndex i : left_nodes) {
    if (i >= matrix.rows()) continue;
    const auto row = matrix.row(i);
    for (ElementIndex j : right_nodes) {
      if (j >= matrix.cols()) continue;
      const double s = row[j];
      const bool pass = std::all_of(link_filters.begin(), link_filters.end(),
                                    [s](const ConfidenceRange& f) { return s >= f.lo && s <= f.hi; });
      if (pass) out.push_back({i, j, s});
    }
  }
  sort_links(out);
  return out;
}

std::vector<Link> filter_links(std::span<const Link> links, const LinkFilter& filter) {
  std::vector<Link> out;
  if (const auto* r = std::get_if<ConfidenceRange>(&filter)) {
    check_range(r->lo, r->hi);
    std::copy_if(links.begin(), links.end(), std::back_inserter(out),
                 [&](const Link& l) { return l.score >= r->lo && l.score <= r->hi; });
    return out;
  }
  const auto& n = std::get<NodeRestriction>(filter);
  std::size_t extent = 0;
  for (ElementIndex i : n.enabled) extent = std::max(extent, i + 1);
  const std::vector<bool> mask = mask_of(n.enabled, extent);
  std::copy_if(links.begin(), links.end(), std::back_inserter(out), [&](const Link& l) {
    const ElementIndex e = n.side == Side::kLeft ? l.left : l.right;
    return e < mask.size() && mask[e];
  });
  return out;
}

ElementSet all_elements(const Schema& schema) {
  ElementSet out(schema.element_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

}  // namespace swb
