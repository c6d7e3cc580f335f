#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semrex {

enum class NodeKind { symbol, lexeme, field, context, sequence, alternation, optional };

std::string_view to_string(NodeKind kind);

/// AST of a semantic regex.
///
/// Primitives (symbol, lexeme, field) carry their payload in `text` and have
/// no children. A context node carries its label in `text` and exactly one
/// child. Sequence and alternation hold two or more children; optional holds
/// one. Nodes built through the factory functions below are canonical:
/// sequences and alternations are flattened, `??` collapses to `?`, and
/// one-element groups are unwrapped.
struct RegexNode {
  NodeKind kind = NodeKind::symbol;
  std::string text;
  std::vector<RegexNode> children;

  bool is_primitive() const {
    return kind == NodeKind::symbol || kind == NodeKind::lexeme || kind == NodeKind::field;
  }
  const RegexNode& child() const { return children.front(); }

  static RegexNode symbol(std::string payload);
  static RegexNode lexeme(std::string payload);
  static RegexNode field(std::string payload);
  static RegexNode context(std::string label, RegexNode body);
  static RegexNode sequence(std::vector<RegexNode> items);
  static RegexNode alternation(std::vector<RegexNode> branches);
  static RegexNode optional(RegexNode body);

  friend bool operator==(const RegexNode&, const RegexNode&) = default;
};

/// Half-open character range into the parsed input.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct ParseDiagnostic {
  std::string message;
  CharSpan char_span;
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(ParseDiagnostic diagnostic);
  const ParseDiagnostic& diagnostic() const { return diagnostic_; }

 private:
  ParseDiagnostic diagnostic_;
};

struct ParseOptions {
  // Accept a primitive closed by a bare `]` or a context label closed by a
  // bare `}`. Each repair is reported as a diagnostic.
  bool lenient = false;
};

struct ParseResult {
  RegexNode node;
  std::vector<ParseDiagnostic> diagnostics;
};

/// Parses one semantic regex expression. Throws ParseError on malformed input.
RegexNode parse(std::string_view input, ParseOptions options = {});

/// Like parse(), but also returns the diagnostics for repairs made in lenient mode.
ParseResult parse_with_diagnostics(std::string_view input, ParseOptions options = {});

/// Canonical concrete syntax: one space between sequence terms, no space
/// around `|`, parentheses only where precedence requires them.
std::string render(const RegexNode& node);

/// Checks the structural invariants of a canonical AST. Returns an empty
/// string when the node is valid, otherwise a description of the violation.
std::string validate(const RegexNode& node);

}  // namespace semrex
