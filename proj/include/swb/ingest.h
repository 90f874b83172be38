#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "swb/model.h"

namespace swb {

struct ParseWarning {
  int line = 0;
  int column = 0;
  std::string message;

  friend bool operator==(const ParseWarning&, const ParseWarning&) = default;
};

// Skipped constructs, rendered one per line as "WARN <line>:<col> <message>".
struct ParseReport {
  std::vector<ParseWarning> warnings;

  std::string to_text() const;
};

struct IngestResult {
  Schema schema;
  ParseReport report;
};

// Relational DDL subset: CREATE TABLE / CREATE VIEW with column lists and
// COMMENT clauses, plus COMMENT ON TABLE/COLUMN. Other statements are
// skipped with a warning. Throws ParseError on malformed input and
// Error(kDuplicate) on a repeated table or view name.
IngestResult parse_ddl(std::string_view text, const std::string& schema_id,
                       const std::string& schema_name = {});

// XML Schema subset: global complex types and elements become depth-1
// elements; nested elements and attributes follow source nesting. A
// reference to a named complex type is expanded one level; references inside
// the expansion are kept as "ref:<Type>" markers. Throws ParseError when the
// document is not well-formed XML.
IngestResult parse_xsd(std::string_view text, const std::string& schema_id,
                       const std::string& schema_name = {});

inline constexpr std::string_view kCanonicalFormatVersion = "1";

// Versioned nested-object JSON document. Throws Error(kVersion) on an
// unsupported format_version and Error(kValidation) listing every violated
// structural invariant.
Schema read_canonical(std::string_view text);
std::string write_canonical(const Schema& schema);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace swb
