#include "swb/export.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

#include "json.hpp"

namespace swb {
namespace {

using Json = nlohmann::ordered_json;

const std::string kConceptHeader[] = {"row_type",    "left_concept",       "left_member_count",
                                      "right_concept", "right_member_count", "support"};
const std::string kElementHeader[] = {"row_type",   "left_concept", "left_path", "right_concept",
                                      "right_path", "score",        "status",    "annotation"};

std::string count_line(std::string_view label, std::size_t count, int percent) {
  return std::string(label) + ": " + std::to_string(count) + " (" + std::to_string(percent) +
         "%)\n";
}

struct ElementRow {
  std::string row_type;
  std::string left_concept;
  std::string left_path;
  std::string right_concept;
  std::string right_path;
  std::string score;
  std::string status;
  std::string annotation;

  auto key() const {
    // Sort on the populated side first.
    const bool right_side = row_type == kRightOnly;
    return std::tie(right_side ? right_concept : left_concept, right_side ? right_path : left_path,
                    right_concept, right_path);
  }
};

}  // namespace

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(std::span<const std::string> fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

std::string format_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", score);
  return buf;
}

std::string export_concept_sheet(const Session& session, const MatchMatrix& matrix) {
  std::string out = csv_row(kConceptHeader);
  const auto left = session.concepts(matrix.left_schema_id());
  const auto right = session.concepts(matrix.right_schema_id());
  std::map<std::string, const ConceptLabel*, std::less<>> by_id;
  for (const auto& c : left) by_id[c.id] = &c;
  for (const auto& c : right) by_id[c.id] = &c;

  std::set<std::string, std::less<>> matched;
  for (const auto& cm : session.compute_concept_matches()) {
    auto l = by_id.find(cm.left_concept_id);
    auto r = by_id.find(cm.right_concept_id);
    if (l == by_id.end() || r == by_id.end()) continue;
    if (l->second->schema_id != matrix.left_schema_id()) continue;
    matched.insert(cm.left_concept_id);
    matched.insert(cm.right_concept_id);
    const std::string row[] = {std::string(kMatched),
                               l->second->name,
                               std::to_string(l->second->member_element_ids.size()),
                               r->second->name,
                               std::to_string(r->second->member_element_ids.size()),
                               std::to_string(cm.support)};
    out += csv_row(row);
  }
  for (const auto& c : left) {
    if (matched.count(c.id)) continue;
    const std::string row[] = {std::string(kLeftOnly), c.name,
                               std::to_string(c.member_element_ids.size()), "", "", ""};
    out += csv_row(row);
  }
  for (const auto& c : right) {
    if (matched.count(c.id)) continue;
    const std::string row[] = {std::string(kRightOnly), "", "", c.name,
                               std::to_string(c.member_element_ids.size()), ""};
    out += csv_row(row);
  }
  return out;
}

std::string export_concept_sheet(const Session& session) {
  if (session.matrices().empty()) return csv_row(kConceptHeader);
  return export_concept_sheet(session, *session.matrices().front());
}

std::string export_element_sheet(const Session& session, const MatchMatrix& matrix) {
  const Schema& left = matrix.left();
  const Schema& right = matrix.right();
  auto concept_name = [&](const Schema& s, ElementIndex e) {
    return session.concept_of(s.id(), e).value_or("");
  };

  std::vector<ElementRow> matched, left_only, right_only;
  std::vector<bool> left_done(left.element_count(), false);
  std::vector<bool> right_done(right.element_count(), false);
  for (const auto& [li, ri] : session.accepted_pairs(matrix)) {
    left_done[li] = right_done[ri] = true;
    const auto d = session.decision(left.element(li).id, right.element(ri).id);
    matched.push_back(ElementRow{std::string(kMatched), concept_name(left, li),
                                 left.element(li).path, concept_name(right, ri),
                                 right.element(ri).path, format_score(matrix.score(li, ri)),
                                 std::string(to_string(d->status)),
                                 std::string(to_string(d->annotation))});
  }
  for (ElementIndex i = 0; i < left.element_count(); ++i) {
    if (left_done[i]) continue;
    left_only.push_back(ElementRow{std::string(kLeftOnly), concept_name(left, i),
                                   left.element(i).path, "", "", "", "", ""});
  }
  for (ElementIndex j = 0; j < right.element_count(); ++j) {
    if (right_done[j]) continue;
    right_only.push_back(ElementRow{std::string(kRightOnly), "", "", concept_name(right, j),
                                    right.element(j).path, "", "", ""});
  }

  std::string out = csv_row(kElementHeader);
  for (auto* group : {&matched, &left_only, &right_only}) {
    std::stable_sort(group->begin(), group->end(),
                     [](const ElementRow& a, const ElementRow& b) { return a.key() < b.key(); });
    for (const auto& r : *group) {
      const std::string row[] = {r.row_type,   r.left_concept, r.left_path, r.right_concept,
                                 r.right_path, r.score,        r.status,    r.annotation};
      out += csv_row(row);
    }
  }
  return out;
}

std::string export_element_sheet(const Session& session) {
  if (session.matrices().empty()) return csv_row(kElementHeader);
  return export_element_sheet(session, *session.matrices().front());
}

std::string export_matrix(const MatchMatrix& matrix, double lo) {
  std::vector<std::string> header = {"left_path", "right_path", "score"};
  for (VoterId v : matrix.config().voters) header.emplace_back(to_string(v));
  std::string out = csv_row(header);

  std::vector<std::string> row(header.size());
  for (ElementIndex i = 0; i < matrix.rows(); ++i) {
    const auto scores = matrix.row(i);
    for (ElementIndex j = 0; j < matrix.cols(); ++j) {
      if (!(scores[j] >= lo)) continue;
      row[0] = matrix.left().element(i).path;
      row[1] = matrix.right().element(j).path;
      row[2] = format_score(scores[j]);
      const auto votes = matrix.voter_scores(i, j);
      for (std::size_t k = 0; k < votes.size(); ++k) row[3 + k] = format_score(votes[k].confidence);
      out += csv_row(row);
    }
  }
  return out;
}

RenderedReport render_report(const PartitionReport& r) {
  RenderedReport out;
  std::string& t = out.text;
  t += "PARTITION " + r.left_schema_id + " ~ " + r.right_schema_id + " (" +
       std::string(to_string(r.mode));
  if (r.mode == PartitionMode::kAutomatic) t += ", threshold " + format_score(r.threshold);
  t += ")\n";
  t += "COMMON PAIRS: " + std::to_string(r.common_pairs.size()) + "\n";
  t += "\n[" + r.left_schema_id + "] " + std::to_string(r.left_total) + " elements\n";
  t += count_line("COMMON", r.common_left, r.common_left_percent);
  t += count_line("LEFT_ONLY", r.left_only.size(), r.left_only_percent);
  t += "\n[" + r.right_schema_id + "] " + std::to_string(r.right_total) + " elements\n";
  t += count_line("COMMON", r.common_right, r.common_right_percent);
  t += count_line("RIGHT_ONLY", r.right_only.size(), r.right_only_percent);
  t += "\nLEFT_ONLY ELEMENTS\n";
  for (const auto& id : r.left_only) t += "  " + id + "\n";
  t += "\nRIGHT_ONLY ELEMENTS\n";
  for (const auto& id : r.right_only) t += "  " + id + "\n";

  Json pairs = Json::array();
  for (const auto& [l, rr] : r.common_pairs) pairs.push_back(Json::array({l, rr}));
  Json j{{"kind", "partition"},
         {"leftSchema", r.left_schema_id},
         {"rightSchema", r.right_schema_id},
         {"mode", std::string(to_string(r.mode))},
         {"threshold", r.threshold},
         {"left",
          {{"total", r.left_total},
           {"common", r.common_left},
           {"commonPercent", r.common_left_percent},
           {"only", r.left_only.size()},
           {"onlyPercent", r.left_only_percent},
           {"onlyElements", r.left_only}}},
         {"right",
          {{"total", r.right_total},
           {"common", r.common_right},
           {"commonPercent", r.common_right_percent},
           {"only", r.right_only.size()},
           {"onlyPercent", r.right_only_percent},
           {"onlyElements", r.right_only}}},
         {"commonPairs", pairs}};
  out.json = j.dump(1) + "\n";
  return out;
}

RenderedReport render_report(const Vocabulary& vocab) {
  RenderedReport out;
  std::string& t = out.text;
  std::size_t elements = 0;
  for (const auto& term : vocab.terms) elements += term.members.size();
  t += "VOCABULARY over " + std::to_string(vocab.schema_ids.size()) + " schemata: ";
  for (std::size_t i = 0; i < vocab.schema_ids.size(); ++i) {
    t += (i ? ", " : "") + vocab.schema_ids[i];
  }
  t += "\nTERMS: " + std::to_string(vocab.terms.size()) + " over " + std::to_string(elements) +
       " elements\nCELLS: " + std::to_string(vocab.cells.size()) + "\n";

  Json cells = Json::array();
  for (const auto& cell : vocab.cells) {
    std::string sig;
    for (std::size_t i = 0; i < cell.signature.size(); ++i) sig += (i ? ", " : "") + cell.signature[i];
    t += "\nCELL {" + sig + "}: " + std::to_string(cell.terms.size()) + " terms (" +
         std::to_string(rounded_percent(cell.terms.size(), vocab.terms.size())) + "%)\n";
    Json terms = Json::array();
    for (std::size_t ti : cell.terms) {
      const auto& term = vocab.terms[ti];
      t += "  " + term.term_id + " " + term.representative_name + " [";
      Json members = Json::array();
      for (std::size_t m = 0; m < term.members.size(); ++m) {
        t += (m ? " " : "") + term.members[m].element_id;
        members.push_back(Json{{"schema", term.members[m].schema_id},
                               {"id", term.members[m].element_id},
                               {"name", term.members[m].name}});
      }
      t += "]\n";
      terms.push_back(Json{{"id", term.term_id},
                           {"representative", term.representative_name},
                           {"members", members}});
    }
    cells.push_back(Json{{"signature", cell.signature}, {"terms", terms}});
  }
  Json j{{"kind", "vocabulary"},
         {"schemas", vocab.schema_ids},
         {"termCount", vocab.terms.size()},
         {"cells", cells}};
  out.json = j.dump(1) + "\n";
  return out;
}

RenderedReport render_report(const Clustering& clustering, const DistanceMatrix& d,
                             double cutoff) {
  RenderedReport out;
  std::string& t = out.text;
  t += "DISTANCES\n";
  Json rows = Json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    t += "  " + d.schema_ids[i];
    Json row = Json::array();
    for (std::size_t j = 0; j < d.size(); ++j) {
      t += " " + format_score(d.at(i, j));
      row.push_back(d.at(i, j));
    }
    t += "\n";
    rows.push_back(row);
  }
  t += "\nMERGES\n";
  Json merges = Json::array();
  for (const auto& m : clustering.tree) {
    t += "  " + std::to_string(m.first) + " + " + std::to_string(m.second) + " at " +
         format_score(m.height) + " (size " + std::to_string(m.size) + ")\n";
    merges.push_back(Json{{"first", m.first}, {"second", m.second}, {"height", m.height},
                          {"size", m.size}});
  }
  t += "\nCLUSTERS at cutoff " + format_score(cutoff) + ": " +
       std::to_string(clustering.clusters.size()) + "\n";
  for (const auto& c : clustering.clusters) {
    t += " ";
    for (const auto& id : c) t += " " + id;
    t += "\n";
  }
  Json j{{"kind", "cluster"},       {"schemas", d.schema_ids}, {"distances", rows},
         {"cutoff", cutoff},        {"merges", merges},        {"clusters", clustering.clusters}};
  out.json = j.dump(1) + "\n";
  return out;
}

RenderedReport render_report(std::span<const SearchResult> results, std::string_view query_id) {
  RenderedReport out;
  out.text = "SEARCH " + std::string(query_id) + "\n";
  Json arr = Json::array();
  std::size_t rank = 0;
  for (const auto& r : results) {
    out.text += std::to_string(++rank) + ". " + r.schema_id + " score " + format_score(r.score) +
                " (" + std::to_string(r.matched) + "/" + std::to_string(r.query_size) +
                ") mean_best " + format_score(r.mean_best) + "\n";
    arr.push_back(Json{{"schema", r.schema_id},
                       {"score", r.score},
                       {"meanBest", r.mean_best},
                       {"matched", r.matched},
                       {"querySize", r.query_size}});
  }
  Json j{{"kind", "search"}, {"query", std::string(query_id)}, {"results", arr}};
  out.json = j.dump(1) + "\n";
  return out;
}

}  // namespace swb
