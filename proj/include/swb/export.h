#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swb/analysis.h"
#include "swb/match.h"
#include "swb/session.h"

namespace swb {

// RFC 4180 style: fields containing a comma, quote, CR or LF are quoted and
// inner quotes doubled. Rows end with LF.
std::string csv_field(std::string_view field);
std::string csv_row(std::span<const std::string> fields);

inline constexpr std::string_view kMatched = "MATCHED";
inline constexpr std::string_view kLeftOnly = "LEFT_ONLY";
inline constexpr std::string_view kRightOnly = "RIGHT_ONLY";

// Outer-join sheet over the concepts of the matrix's two schemata: MATCHED
// rows in concept-match order, then unmatched left and right concepts in
// assignment order.
std::string export_concept_sheet(const Session& session, const MatchMatrix& matrix);
// Uses the session's first matrix; header only when there is none.
std::string export_concept_sheet(const Session& session);

// Outer-join sheet over elements. Each accepted decision is a MATCHED row;
// elements without one are LEFT_ONLY / RIGHT_ONLY. Within each row type,
// rows sort by concept name and then element path.
std::string export_element_sheet(const Session& session, const MatchMatrix& matrix);
std::string export_element_sheet(const Session& session);

// Every link with score >= lo in document order, with one confidence
// column per configured voter.
std::string export_matrix(const MatchMatrix& matrix, double lo);

// "%.6f".
std::string format_score(double score);

struct RenderedReport {
  std::string text;
  std::string json;
};

RenderedReport render_report(const PartitionReport& report);
RenderedReport render_report(const Vocabulary& vocab);
RenderedReport render_report(const Clustering& clustering, const DistanceMatrix& distances,
                             double cutoff);
RenderedReport render_report(std::span<const SearchResult> results, std::string_view query_id);

}  // namespace swb
