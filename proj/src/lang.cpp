#include "semrex/lang.hpp"

#include <cctype>
#include <utility>

#include "semrex/text.hpp"

namespace semrex {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::symbol: return "symbol";
    case NodeKind::lexeme: return "lexeme";
    case NodeKind::field: return "field";
    case NodeKind::context: return "context";
    case NodeKind::sequence: return "sequence";
    case NodeKind::alternation: return "alternation";
    case NodeKind::optional: return "optional";
  }
  return "?";
}

namespace {

RegexNode make_primitive(NodeKind kind, std::string payload) {
  RegexNode n;
  n.kind = kind;
  n.text = std::string(text::trim(payload));
  return n;
}

// Splices nested nodes of the same kind into `out`.
void flatten_into(NodeKind kind, std::vector<RegexNode>& out, RegexNode item) {
  if (item.kind == kind) {
    for (auto& c : item.children) out.push_back(std::move(c));
  } else {
    out.push_back(std::move(item));
  }
}

RegexNode make_list(NodeKind kind, std::vector<RegexNode> items) {
  if (items.size() == 1) return std::move(items.front());
  RegexNode n;
  n.kind = kind;
  for (auto& item : items) flatten_into(kind, n.children, std::move(item));
  return n;
}

}  // namespace

RegexNode RegexNode::symbol(std::string payload) { return make_primitive(NodeKind::symbol, std::move(payload)); }
RegexNode RegexNode::lexeme(std::string payload) { return make_primitive(NodeKind::lexeme, std::move(payload)); }
RegexNode RegexNode::field(std::string payload) { return make_primitive(NodeKind::field, std::move(payload)); }

RegexNode RegexNode::context(std::string label, RegexNode body) {
  RegexNode n;
  n.kind = NodeKind::context;
  n.text = std::string(text::trim(label));
  n.children.push_back(std::move(body));
  return n;
}

RegexNode RegexNode::sequence(std::vector<RegexNode> items) {
  return make_list(NodeKind::sequence, std::move(items));
}

RegexNode RegexNode::alternation(std::vector<RegexNode> branches) {
  return make_list(NodeKind::alternation, std::move(branches));
}

RegexNode RegexNode::optional(RegexNode body) {
  if (body.kind == NodeKind::optional) return body;
  RegexNode n;
  n.kind = NodeKind::optional;
  n.children.push_back(std::move(body));
  return n;
}

ParseError::ParseError(ParseDiagnostic diagnostic)
    : std::runtime_error(diagnostic.message + " at [" + std::to_string(diagnostic.char_span.begin) +
                         ", " + std::to_string(diagnostic.char_span.end) + ")"),
      diagnostic_(std::move(diagnostic)) {}

namespace {

class Parser {
 public:
  Parser(std::string_view input, ParseOptions options) : in_(input), options_(options) {}

  ParseResult run() {
    skip_ws();
    if (at_end()) fail("empty expression", 0, in_.size());
    RegexNode node = alternation();
    skip_ws();
    if (!at_end()) {
      if (in_[pos_] == ')') fail("unmatched ')'", pos_, pos_ + 1);
      fail("unexpected character", pos_, pos_ + 1);
    }
    return {std::move(node), std::move(diagnostics_)};
  }

 private:
  bool at_end() const { return pos_ >= in_.size(); }
  bool looking_at(std::string_view s) const { return in_.substr(pos_).starts_with(s); }

  void skip_ws() {
    while (!at_end() && text::is_space(in_[pos_])) ++pos_;
  }

  [[noreturn]] void fail(std::string message, std::size_t begin, std::size_t end) const {
    if (end > in_.size()) end = in_.size();
    if (begin > end) begin = end;
    throw ParseError({std::move(message), {begin, end}});
  }

  RegexNode alternation() {
    std::vector<RegexNode> branches;
    branches.push_back(sequence());
    skip_ws();
    while (!at_end() && in_[pos_] == '|') {
      std::size_t bar = pos_++;
      skip_ws();
      if (at_end() || in_[pos_] == '|' || in_[pos_] == ')') fail("empty alternation branch", bar, bar + 1);
      branches.push_back(sequence());
      skip_ws();
    }
    return RegexNode::alternation(std::move(branches));
  }

  RegexNode sequence() {
    std::vector<RegexNode> items;
    while (true) {
      skip_ws();
      if (at_end() || in_[pos_] == '|' || in_[pos_] == ')') break;
      if (in_[pos_] == '?') fail("dangling '?'", pos_, pos_ + 1);
      items.push_back(postfix());
    }
    if (items.empty()) {
      if (!at_end() && in_[pos_] == '|') fail("empty alternation branch", pos_, pos_ + 1);
      fail("empty expression", pos_, pos_ + 1);
    }
    return RegexNode::sequence(std::move(items));
  }

  RegexNode postfix() {
    RegexNode node = atom();
    while (true) {
      std::size_t save = pos_;
      skip_ws();
      if (!at_end() && in_[pos_] == '?') {
        ++pos_;
        node = RegexNode::optional(std::move(node));
      } else {
        pos_ = save;
        return node;
      }
    }
  }

  RegexNode atom() {
    if (looking_at("[:")) return primitive();
    if (looking_at("@{:")) return context();
    if (in_[pos_] == '(') {
      std::size_t open = pos_++;
      skip_ws();
      if (!at_end() && in_[pos_] == ')') fail("empty group", open, pos_ + 1);
      if (at_end()) fail("unclosed '('", open, in_.size());
      RegexNode inner = alternation();
      skip_ws();
      if (at_end() || in_[pos_] != ')') fail("unclosed '('", open, pos_);
      ++pos_;
      return inner;
    }
    fail("unexpected character", pos_, pos_ + 1);
  }

  std::string_view kind_word() {
    std::size_t start = pos_;
    while (!at_end() && std::isalpha(static_cast<unsigned char>(in_[pos_]))) ++pos_;
    return in_.substr(start, pos_ - start);
  }

  // Finds the end of a payload that starts at pos_. Returns the payload and
  // leaves pos_ just past the closing sentinel.
  std::string_view delimited(std::string_view sentinel, char bare_close, std::string_view nested_open,
                             std::size_t construct_start, const char* what) {
    std::size_t body = pos_;
    std::size_t close = in_.find(sentinel, body);
    bool strict_ok = close != std::string_view::npos;
    if (strict_ok) {
      std::string_view payload = in_.substr(body, close - body);
      if (payload.find(nested_open) != std::string_view::npos) strict_ok = false;
    }
    if (strict_ok) {
      pos_ = close + sentinel.size();
      return in_.substr(body, close - body);
    }
    if (options_.lenient) {
      std::size_t bare = in_.find(bare_close, body);
      if (bare != std::string_view::npos) {
        diagnostics_.push_back({std::string(what) + " closed by '" + std::string(1, bare_close) +
                                    "' instead of '" + std::string(sentinel) + "'",
                                {construct_start, bare + 1}});
        pos_ = bare + 1;
        return in_.substr(body, bare - body);
      }
    }
    fail(std::string("unclosed ") + what, construct_start, in_.size());
  }

  RegexNode primitive() {
    std::size_t start = pos_;
    pos_ += 2;
    std::size_t kind_start = pos_;
    std::string_view kind = kind_word();
    NodeKind k;
    if (kind == "symbol") k = NodeKind::symbol;
    else if (kind == "lexeme") k = NodeKind::lexeme;
    else if (kind == "field") k = NodeKind::field;
    else if (kind.empty() && in_.find(":]", kind_start) == std::string_view::npos) fail("unclosed primitive", start, in_.size());
    else fail("unknown primitive kind '" + std::string(kind) + "'", kind_start, pos_);

    std::string_view payload = delimited(":]", ']', "[:", start, "primitive");
    if (text::trim(payload).empty()) fail("empty payload", start, pos_);
    return make_primitive(k, std::string(payload));
  }

  RegexNode context() {
    std::size_t start = pos_;
    pos_ += 3;
    std::size_t kind_start = pos_;
    std::string_view kind = kind_word();
    if (kind != "context") fail("unknown modifier kind '" + std::string(kind) + "'", kind_start, pos_);
    std::size_t label_start = pos_;
    std::string_view label = delimited(":}", '}', "@{:", start, "context label");
    if (text::trim(label).empty()) fail("empty context label", start, pos_);
    if (label.find(')') != std::string_view::npos) {
      fail("')' is not allowed in a context label", label_start, label_start + label.size());
    }
    skip_ws();
    if (at_end() || in_[pos_] != '(') fail("context requires a parenthesized body", start, pos_);
    std::size_t open = pos_++;
    skip_ws();
    if (at_end()) fail("unclosed '('", open, in_.size());
    if (in_[pos_] == ')') fail("empty context body", open, pos_ + 1);
    RegexNode body = alternation();
    skip_ws();
    if (at_end() || in_[pos_] != ')') fail("unclosed '('", open, pos_);
    ++pos_;
    return RegexNode::context(std::string(label), std::move(body));
  }

  std::string_view in_;
  ParseOptions options_;
  std::size_t pos_ = 0;
  std::vector<ParseDiagnostic> diagnostics_;
};

void render_into(const RegexNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::symbol:
    case NodeKind::lexeme:
    case NodeKind::field:
      out += "[:";
      out += to_string(n.kind);
      out += ' ';
      out += n.text;
      out += ":]";
      return;
    case NodeKind::context:
      out += "@{:context ";
      out += n.text;
      out += ":}(";
      render_into(n.child(), out);
      out += ')';
      return;
    case NodeKind::optional: {
      const RegexNode& c = n.child();
      bool group = c.kind == NodeKind::sequence || c.kind == NodeKind::alternation;
      if (group) out += '(';
      render_into(c, out);
      if (group) out += ')';
      out += '?';
      return;
    }
    case NodeKind::sequence:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ' ';
        const RegexNode& c = n.children[i];
        bool group = c.kind == NodeKind::alternation || c.kind == NodeKind::sequence;
        if (group) out += '(';
        render_into(c, out);
        if (group) out += ')';
      }
      return;
    case NodeKind::alternation:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += '|';
        const RegexNode& c = n.children[i];
        bool group = c.kind == NodeKind::alternation;
        if (group) out += '(';
        render_into(c, out);
        if (group) out += ')';
      }
      return;
  }
}

}  // namespace

ParseResult parse_with_diagnostics(std::string_view input, ParseOptions options) {
  return Parser(input, options).run();
}

RegexNode parse(std::string_view input, ParseOptions options) {
  return parse_with_diagnostics(input, options).node;
}

std::string render(const RegexNode& node) {
  std::string out;
  render_into(node, out);
  return out;
}

std::string validate(const RegexNode& n) {
  switch (n.kind) {
    case NodeKind::symbol:
    case NodeKind::lexeme:
    case NodeKind::field:
      if (!n.children.empty()) return "primitive with children";
      if (n.text.empty() || text::trim(n.text).size() != n.text.size()) return "payload empty or untrimmed";
      if (n.text.find(":]") != std::string::npos || n.text.find("[:") != std::string::npos) {
        return "payload contains a sentinel";
      }
      return {};
    case NodeKind::context:
      if (n.children.size() != 1) return "context must have one child";
      if (n.text.empty() || text::trim(n.text).size() != n.text.size()) return "label empty or untrimmed";
      if (n.text.find(":}") != std::string::npos || n.text.find(')') != std::string::npos ||
          n.text.find("@{:") != std::string::npos) {
        return "label contains a reserved sequence";
      }
      return validate(n.child());
    case NodeKind::optional:
      if (n.children.size() != 1) return "optional must have one child";
      if (n.child().kind == NodeKind::optional) return "nested optional";
      return validate(n.child());
    case NodeKind::sequence:
    case NodeKind::alternation:
      if (n.children.size() < 2) return "sequence/alternation needs two or more children";
      for (const auto& c : n.children) {
        if (c.kind == n.kind) return "nested " + std::string(to_string(n.kind));
        if (auto err = validate(c); !err.empty()) return err;
      }
      return {};
  }
  return "unknown kind";
}

}  // namespace semrex
