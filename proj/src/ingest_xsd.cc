#include <expat.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>

#include "swb/error.h"
#include "swb/ingest.h"

namespace swb {
namespace {

struct XmlNode {
  std::string local;  // tag name without namespace prefix
  std::map<std::string, std::string> attrs;
  std::vector<std::unique_ptr<XmlNode>> children;
  std::string text;
  int line = 0;
  int column = 0;

  const std::string* attr(const std::string& key) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
  }
};

std::string local_name(std::string_view qname) {
  const auto colon = qname.rfind(':');
  return std::string(colon == std::string_view::npos ? qname : qname.substr(colon + 1));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

class XmlReader {
 public:
  std::unique_ptr<XmlNode> parse(std::string_view text) {
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    if (!parser) throw std::bad_alloc();
    parser_ = parser.get();
    XML_SetUserData(parser_, this);
    XML_SetElementHandler(parser_, &XmlReader::on_start, &XmlReader::on_end);
    XML_SetCharacterDataHandler(parser_, &XmlReader::on_text);
    if (XML_Parse(parser_, text.data(), static_cast<int>(text.size()), XML_TRUE) ==
        XML_STATUS_ERROR) {
      const int line = static_cast<int>(XML_GetCurrentLineNumber(parser_));
      const int col = static_cast<int>(XML_GetCurrentColumnNumber(parser_)) + 1;
      throw ParseError(line, col,
                       std::string("XML not well-formed: ") +
                           XML_ErrorString(XML_GetErrorCode(parser_)));
    }
    return std::move(root_);
  }

 private:
  static void on_start(void* self_ptr, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<XmlReader*>(self_ptr);
    auto node = std::make_unique<XmlNode>();
    node->local = local_name(name);
    node->line = static_cast<int>(XML_GetCurrentLineNumber(self->parser_));
    node->column = static_cast<int>(XML_GetCurrentColumnNumber(self->parser_)) + 1;
    for (int i = 0; atts[i]; i += 2) node->attrs.emplace(atts[i], atts[i + 1]);
    XmlNode* raw = node.get();
    if (self->stack_.empty()) {
      self->root_ = std::move(node);
    } else {
      self->stack_.back()->children.push_back(std::move(node));
    }
    self->stack_.push_back(raw);
  }

  static void on_end(void* self_ptr, const XML_Char*) {
    static_cast<XmlReader*>(self_ptr)->stack_.pop_back();
  }

  static void on_text(void* self_ptr, const XML_Char* s, int len) {
    auto* self = static_cast<XmlReader*>(self_ptr);
    if (!self->stack_.empty()) self->stack_.back()->text.append(s, static_cast<std::size_t>(len));
  }

  XML_Parser parser_ = nullptr;
  std::unique_ptr<XmlNode> root_;
  std::vector<XmlNode*> stack_;
};

class XsdBuilder {
 public:
  explicit XsdBuilder(ParseReport& report) : report_(report) {}

  std::vector<SchemaNode> build(const XmlNode& root) {
    for (const auto& child : root.children) {
      if (child->local == "complexType") {
        if (const std::string* n = child->attr("name")) named_types_.emplace(*n, child.get());
      }
    }
    std::vector<SchemaNode> out;
    for (const auto& c : root.children) {
      const XmlNode& child = *c;
      if (child.local == "complexType") {
        const std::string* n = child.attr("name");
        if (!n) {
          warn(child, "anonymous global complexType skipped");
          continue;
        }
        SchemaNode node{{}, *n, documentation(child), "complexType", {}};
        std::set<std::string> visiting{*n};
        content(child, /*expand=*/true, visiting, node.children);
        out.push_back(std::move(node));
      } else if (child.local == "element" || child.local == "attribute") {
        std::set<std::string> visiting;
        declaration(child, /*expand=*/true, visiting, out);
      } else if (child.local == "annotation" || child.local == "simpleType") {
        // simple types are value domains, not schema elements
      } else {
        warn(child, "unsupported construct '" + child.local + "' skipped");
      }
    }
    return out;
  }

 private:
  void warn(const XmlNode& at, std::string message) {
    report_.warnings.push_back({at.line, at.column, std::move(message)});
  }

  static std::string documentation(const XmlNode& decl) {
    std::string out;
    for (const auto& c : decl.children) {
      if (c->local != "annotation") continue;
      for (const auto& d : c->children) {
        if (d->local != "documentation") continue;
        std::string t = collapse_whitespace(d->text);
        if (t.empty()) continue;
        if (!out.empty()) out += ' ';
        out += t;
      }
    }
    return out;
  }

  const XmlNode* named_type(const std::string* type_attr) const {
    if (!type_attr) return nullptr;
    auto it = named_types_.find(local_name(*type_attr));
    return it == named_types_.end() ? nullptr : it->second;
  }

  void declaration(const XmlNode& decl, bool expand, std::set<std::string>& visiting,
                   std::vector<SchemaNode>& out) {
    const bool is_attribute = decl.local == "attribute";
    if (const std::string* use = decl.attr("use"); use && *use == "prohibited") return;
    const std::string* name = decl.attr("name");
    const std::string* ref = decl.attr("ref");
    if (!name && !ref) {
      warn(decl, "declaration without name or ref skipped");
      return;
    }
    SchemaNode node;
    node.name = name ? *name : local_name(*ref);
    node.documentation = documentation(decl);
    const std::string* type = decl.attr("type");

    const XmlNode* inline_type = nullptr;
    for (const auto& c : decl.children) {
      if (c->local == "complexType") inline_type = c.get();
    }

    if (is_attribute) {
      node.type_hint = type ? *type : (ref ? "ref" : "attribute");
    } else if (inline_type) {
      node.type_hint = "complexType";
      content(*inline_type, expand, visiting, node.children);
    } else if (const XmlNode* named = named_type(type)) {
      const std::string type_name = local_name(*type);
      if (expand && !visiting.contains(type_name)) {
        node.type_hint = type_name;
        visiting.insert(type_name);
        content(*named, /*expand=*/false, visiting, node.children);
        visiting.erase(type_name);
      } else {
        node.type_hint = "ref:" + type_name;
      }
    } else if (type) {
      node.type_hint = *type;
    } else if (ref) {
      node.type_hint = "ref";
    }
    out.push_back(std::move(node));
  }

  void content(const XmlNode& type, bool expand, std::set<std::string>& visiting,
               std::vector<SchemaNode>& out) {
    for (const auto& c : type.children) {
      const XmlNode& child = *c;
      const std::string& k = child.local;
      if (k == "sequence" || k == "choice" || k == "all") {
        content(child, expand, visiting, out);
      } else if (k == "element" || k == "attribute") {
        declaration(child, expand, visiting, out);
      } else if (k == "complexContent" || k == "simpleContent") {
        content(child, expand, visiting, out);
      } else if (k == "extension" || k == "restriction") {
        if (k == "extension") {
          const XmlNode* base = named_type(child.attr("base"));
          if (base) {
            const std::string base_name = local_name(*child.attr("base"));
            if (!visiting.contains(base_name)) {
              visiting.insert(base_name);
              content(*base, expand, visiting, out);
              visiting.erase(base_name);
            }
          }
        }
        content(child, expand, visiting, out);
      } else if (k == "annotation") {
        continue;
      } else {
        warn(child, "unsupported construct '" + k + "' skipped");
      }
    }
  }

  ParseReport& report_;
  std::map<std::string, const XmlNode*> named_types_;
};

}  // namespace

IngestResult parse_xsd(std::string_view text, const std::string& schema_id,
                       const std::string& schema_name) {
  ParseReport report;
  const std::string name = schema_name.empty() ? schema_id : schema_name;
  if (std::all_of(text.begin(), text.end(),
                  [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
    return {Schema::from_tree(schema_id, name, SourceFormat::kXsd, {}), report};
  }
  std::unique_ptr<XmlNode> root = XmlReader().parse(text);
  if (root->local != "schema") {
    throw ParseError(root->line, root->column,
                     "document root is '" + root->local + "', expected schema");
  }
  std::vector<SchemaNode> nodes = XsdBuilder(report).build(*root);
  return {Schema::from_tree(schema_id, name, SourceFormat::kXsd, std::move(nodes)),
          std::move(report)};
}

}  // namespace swb
