#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_map>

#include "swb/error.h"
#include "swb/ingest.h"

namespace swb {
namespace {

enum class Tok { kIdent, kQuotedIdent, kString, kNumber, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_char(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)) ||
         c == '$' || c == '#';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = text_[pos_];
      if (is_ident_start(c)) {
        const std::size_t b = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
        t.kind = Tok::kIdent;
        t.text = std::string(text_.substr(b, pos_ - b));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        const std::size_t b = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '.')) {
          advance();
        }
        t.kind = Tok::kNumber;
        t.text = std::string(text_.substr(b, pos_ - b));
      } else if (c == '\'') {
        t.kind = Tok::kString;
        t.text = quoted('\'', '\'', t);
      } else if (c == '"' || c == '`') {
        t.kind = Tok::kQuotedIdent;
        t.text = quoted(c, c, t);
      } else if (c == '[') {
        t.kind = Tok::kQuotedIdent;
        t.text = quoted('[', ']', t);
      } else {
        t.kind = Tok::kPunct;
        t.text = std::string(1, c);
        advance();
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
        const int l = line_, k = col_;
        advance();
        advance();
        while (pos_ + 1 < text_.size() &&
               !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) {
          advance();
        }
        if (pos_ + 1 >= text_.size()) throw ParseError(l, k, "unterminated comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  // Doubled closing delimiter is an escaped literal delimiter.
  std::string quoted(char open, char close, const Token& at) {
    (void)open;
    advance();
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) {
        throw ParseError(at.line, at.column, "unterminated quoted text");
      }
      const char c = text_[pos_];
      if (c == close) {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == close) {
          out.push_back(close);
          advance();
          advance();
          continue;
        }
        advance();
        return out;
      }
      out.push_back(c);
      advance();
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Keywords that end a column's type and begin its constraint clauses.
bool is_constraint_keyword(std::string_view up) {
  static const char* kWords[] = {
      "NOT",     "NULL",       "DEFAULT",   "PRIMARY",  "UNIQUE",
      "REFERENCES", "CHECK",   "CONSTRAINT", "COMMENT", "AUTO_INCREMENT",
      "AUTOINCREMENT", "IDENTITY", "COLLATE", "GENERATED", "KEY",
      "ON",      "CHARSET",   "ENCODE",   "AS"};
  for (const char* w : kWords) {
    if (up == w) return true;
  }
  return false;
}

bool is_table_constraint_start(std::string_view up) {
  return up == "PRIMARY" || up == "UNIQUE" || up == "KEY" || up == "INDEX" ||
         up == "CONSTRAINT" || up == "FOREIGN" || up == "CHECK" ||
         up == "FULLTEXT" || up == "SPATIAL" || up == "EXCLUDE" ||
         up == "PERIOD" || up == "LIKE";
}

class DdlParser {
 public:
  DdlParser(std::vector<Token> toks, std::string schema_id, std::string name)
      : toks_(std::move(toks)), schema_id_(std::move(schema_id)), name_(std::move(name)) {}

  IngestResult run() {
    while (!at_end()) {
      if (is_punct(";")) {
        ++pos_;
        continue;
      }
      if (is_kw("CREATE")) {
        create_statement();
      } else if (is_kw("COMMENT")) {
        comment_statement();
      } else {
        warn(peek(), "unsupported statement '" + peek().text + "' skipped");
        skip_statement();
      }
    }
    IngestResult r{Schema::from_tree(schema_id_, name_.empty() ? schema_id_ : name_,
                                     SourceFormat::kDdl, std::move(tables_)),
                   std::move(report_)};
    return r;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Tok::kEnd; }
  bool is_kw(std::string_view up, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::kIdent && upper(t.text) == up;
  }
  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::kPunct && t.text == p;
  }
  bool is_name_token(std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::kIdent || t.kind == Tok::kQuotedIdent;
  }

  [[noreturn]] void fail(const Token& t, const std::string& what) const {
    const std::string got = t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.line, t.column, what + ", found " + got);
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail(peek(), "expected '" + std::string(p) + "'");
    ++pos_;
  }

  void expect_kw(std::string_view up) {
    if (!is_kw(up)) fail(peek(), "expected " + std::string(up));
    ++pos_;
  }

  void warn(const Token& at, std::string message) {
    report_.warnings.push_back({at.line, at.column, std::move(message)});
  }

  void skip_statement() {
    int depth = 0;
    while (!at_end()) {
      if (is_punct("(")) ++depth;
      if (is_punct(")")) --depth;
      if (depth <= 0 && is_punct(";")) {
        ++pos_;
        return;
      }
      ++pos_;
    }
  }

  // Qualified names keep only the last component.
  std::string qualified_name() {
    if (!is_name_token()) fail(peek(), "expected identifier");
    std::string name = peek().text;
    ++pos_;
    while (is_punct(".") && is_name_token(1)) {
      name = peek(1).text;
      pos_ += 2;
    }
    return name;
  }

  std::string string_literal() {
    if (peek().kind != Tok::kString) fail(peek(), "expected string literal");
    return toks_[pos_++].text;
  }

  void skip_if_not_exists() {
    if (is_kw("IF") && is_kw("NOT", 1) && is_kw("EXISTS", 2)) pos_ += 3;
  }

  void create_statement() {
    const Token& create_tok = peek();
    ++pos_;
    if (is_kw("OR") && is_kw("REPLACE", 1)) pos_ += 2;
    while (is_kw("TEMPORARY") || is_kw("TEMP") || is_kw("GLOBAL") ||
           is_kw("LOCAL") || is_kw("UNLOGGED") || is_kw("MATERIALIZED") ||
           is_kw("FORCE")) {
      ++pos_;
    }
    if (is_kw("TABLE")) {
      ++pos_;
      create_table();
    } else if (is_kw("VIEW")) {
      ++pos_;
      create_view();
    } else {
      warn(create_tok, "unsupported statement 'CREATE " + peek().text + "' skipped");
      skip_statement();
    }
  }

  std::size_t add_container(const Token& at, std::string name, std::string kind) {
    const std::string key = upper(name);
    if (auto it = by_name_.find(key); it != by_name_.end()) {
      throw Error(ErrorKind::kDuplicate,
                  std::to_string(at.line) + ":" + std::to_string(at.column) +
                      ": duplicate table or view name '" + name + "'");
    }
    by_name_.emplace(key, tables_.size());
    tables_.push_back(SchemaNode{{}, std::move(name), {}, std::move(kind), {}});
    return tables_.size() - 1;
  }

  void create_table() {
    skip_if_not_exists();
    const Token& name_tok = peek();
    std::string name = qualified_name();
    if (is_kw("AS")) {
      const std::size_t t = add_container(name_tok, std::move(name), "TABLE");
      (void)t;
      warn(name_tok, "CREATE TABLE AS SELECT columns not derived");
      skip_statement();
      return;
    }
    const std::size_t t = add_container(name_tok, std::move(name), "TABLE");
    expect_punct("(");
    if (!is_punct(")")) {
      while (true) {
        table_item(t);
        if (is_punct(",")) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    table_options(t);
  }

  void table_item(std::size_t table) {
    if (peek().kind == Tok::kIdent && is_table_constraint_start(upper(peek().text))) {
      skip_item();
      return;
    }
    if (!is_name_token()) fail(peek(), "expected column name");
    SchemaNode col;
    col.name = peek().text;
    ++pos_;

    std::string type;
    while (peek().kind == Tok::kIdent && !is_constraint_keyword(upper(peek().text)) &&
           !(!type.empty() && is_kw("CHARACTER") && is_kw("SET", 1))) {
      if (!type.empty()) type += ' ';
      type += peek().text;
      ++pos_;
      if (is_punct("(")) type += balanced_text();
    }
    if (type.empty() && is_punct("(")) fail(peek(), "expected column type");
    col.type_hint = std::move(type);

    int depth = 0;
    while (true) {
      if (at_end() || (depth == 0 && is_punct(";"))) fail(peek(), "expected ')'");
      if (depth == 0 && (is_punct(",") || is_punct(")"))) break;
      if (is_punct("(")) ++depth;
      if (is_punct(")")) --depth;
      if (depth == 0 && is_kw("COMMENT") && peek(1).kind == Tok::kString) {
        col.documentation = peek(1).text;
        pos_ += 2;
        continue;
      }
      ++pos_;
    }
    tables_[table].children.push_back(std::move(col));
  }

  void skip_item() {
    int depth = 0;
    while (true) {
      if (at_end() || (depth == 0 && is_punct(";"))) fail(peek(), "expected ')'");
      if (depth == 0 && (is_punct(",") || is_punct(")"))) return;
      if (is_punct("(")) ++depth;
      if (is_punct(")")) --depth;
      ++pos_;
    }
  }

  // Renders a parenthesized group compactly, e.g. "(10,2)".
  std::string balanced_text() {
    std::string out;
    int depth = 0;
    do {
      if (at_end()) fail(peek(), "expected ')'");
      if (is_punct("(")) ++depth;
      if (is_punct(")")) --depth;
      out += peek().kind == Tok::kString ? "'" + peek().text + "'" : peek().text;
      ++pos_;
    } while (depth > 0);
    return out;
  }

  void table_options(std::size_t table) {
    while (!at_end() && !is_punct(";")) {
      if (is_kw("COMMENT")) {
        ++pos_;
        if (is_punct("=")) ++pos_;
        tables_[table].documentation = string_literal();
        continue;
      }
      if (is_punct("(")) {
        balanced_text();
        continue;
      }
      ++pos_;
    }
  }

  void create_view() {
    skip_if_not_exists();
    const Token& name_tok = peek();
    std::string name = qualified_name();
    const std::size_t v = add_container(name_tok, std::move(name), "VIEW");
    bool explicit_columns = false;
    if (is_punct("(")) {
      ++pos_;
      explicit_columns = true;
      while (true) {
        if (!is_name_token()) fail(peek(), "expected column name");
        tables_[v].children.push_back(SchemaNode{{}, peek().text, {}, {}, {}});
        ++pos_;
        if (is_punct(",")) {
          ++pos_;
          continue;
        }
        break;
      }
      expect_punct(")");
    }
    while (!at_end() && !is_kw("AS") && !is_punct(";")) {
      if (is_kw("COMMENT")) {
        ++pos_;
        if (is_punct("=")) ++pos_;
        tables_[v].documentation = string_literal();
        continue;
      }
      ++pos_;
    }
    expect_kw("AS");
    if (!explicit_columns) select_columns(v);
    skip_statement();
  }

  void select_columns(std::size_t view) {
    while (is_punct("(")) ++pos_;
    if (!is_kw("SELECT")) {
      warn(peek(), "view body is not a SELECT; columns not derived");
      return;
    }
    ++pos_;
    if (is_kw("DISTINCT") || is_kw("ALL")) ++pos_;
    std::vector<const Token*> item;
    int depth = 0;
    auto flush = [&]() {
      if (item.empty()) return;
      const Token* last = item.back();
      if (last->kind == Tok::kPunct && last->text == "*") {
        warn(*last, "wildcard column in view skipped");
      } else if (last->kind == Tok::kIdent || last->kind == Tok::kQuotedIdent) {
        tables_[view].children.push_back(SchemaNode{{}, last->text, {}, {}, {}});
      } else {
        warn(*item.front(), "view column without a name skipped");
      }
      item.clear();
    };
    while (!at_end() && !is_punct(";")) {
      if (depth == 0 && is_kw("FROM")) break;
      if (is_punct("(")) ++depth;
      if (is_punct(")")) {
        if (depth == 0) break;
        --depth;
      }
      if (depth == 0 && is_punct(",")) {
        flush();
      } else {
        item.push_back(&peek());
      }
      ++pos_;
    }
    flush();
  }

  void comment_statement() {
    const Token& start = peek();
    ++pos_;
    expect_kw("ON");
    const bool column = is_kw("COLUMN");
    if (!column && !is_kw("TABLE") && !is_kw("VIEW")) {
      warn(start, "unsupported COMMENT ON target '" + peek().text + "' skipped");
      skip_statement();
      return;
    }
    ++pos_;
    std::vector<std::string> parts;
    if (!is_name_token()) fail(peek(), "expected identifier");
    parts.push_back(peek().text);
    ++pos_;
    while (is_punct(".") && is_name_token(1)) {
      parts.push_back(peek(1).text);
      pos_ += 2;
    }
    expect_kw("IS");
    std::string text = is_kw("NULL") ? (++pos_, std::string()) : string_literal();

    const std::string table = upper(column && parts.size() >= 2 ? parts[parts.size() - 2]
                                                                 : parts.back());
    auto it = by_name_.find(table);
    if (it == by_name_.end()) {
      warn(start, "COMMENT ON unknown table '" + table + "' skipped");
      return;
    }
    SchemaNode& t = tables_[it->second];
    if (!column) {
      t.documentation = std::move(text);
      return;
    }
    if (parts.size() < 2) {
      warn(start, "COMMENT ON COLUMN needs table.column; skipped");
      return;
    }
    const std::string col = upper(parts.back());
    for (SchemaNode& c : t.children) {
      if (upper(c.name) == col) {
        c.documentation = std::move(text);
        return;
      }
    }
    warn(start, "COMMENT ON unknown column '" + parts.back() + "' skipped");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string schema_id_;
  std::string name_;
  std::vector<SchemaNode> tables_;
  std::unordered_map<std::string, std::size_t> by_name_;
  ParseReport report_;
};

}  // namespace

IngestResult parse_ddl(std::string_view text, const std::string& schema_id,
                       const std::string& schema_name) {
  return DdlParser(Lexer(text).run(), schema_id, schema_name).run();
}

}  // namespace swb
