// Concrete 1D syntax: tokenizer, parser and pretty-printer.
//
// Grammar, loosest to tightest:
//   :<=>  :=          definitions (non-associative)
//   <=>               equivalence (left)
//   =>                implication (right)
//   or, and, not
//   = != <= < >= > in relations (non-chaining)
//   + -  then  * /  then unary -  then ^ (right)
//   postfix _index, f[args], |e|, {set}, <tuple>, quantifiers
//
// Quantifiers: forall[x, body], forall[x with cond, body], forall[j = lo..hi, body],
// forall[{x,y}, body] and the sugar "forall x with C : body" whose body extends as far
// right as possible. "exists" has the same forms.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tma/formula.hpp"

namespace tma {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

enum class TokenKind { Ident, Integer, Operator, Bracket, Keyword, End };

struct Token {
  TokenKind kind = TokenKind::End;
  // Normalized text: unicode aliases map to their ASCII spelling.
  std::string text;
  Span span;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& what, Span span) : std::runtime_error(what), span_(span) {}
  Span span() const { return span_; }

 private:
  Span span_;
};

class LexError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

class ParseError : public SyntaxError {
 public:
  ParseError(const std::string& what, Span span, std::vector<std::string> expected)
      : SyntaxError(what, span), expected_(std::move(expected)) {}
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::vector<std::string> expected_;
};

/// Tokenizes UTF-8 text. The result ends with an End token whose span is at the end of input.
std::vector<Token> tokenize(std::string_view text);

Formula parse_formula(std::string_view text);

enum class Style { Ascii, Unicode };

std::string format(const Formula& f, Style style = Style::Ascii);

// Global declarations.

struct QuantifierDecl {
  Binder binder;
  friend bool operator==(const QuantifierDecl&, const QuantifierDecl&) = default;
};

/// Orphaned implication "lhs =>" missing its right-hand side.
struct ImplicationDecl {
  Formula lhs;
  friend bool operator==(const ImplicationDecl&, const ImplicationDecl&) = default;
};

/// "let name = replacement": a pure textual abbreviation.
struct LetDecl {
  std::string name;
  Formula replacement;
  friend bool operator==(const LetDecl&, const LetDecl&) = default;
};

using DeclarationItem = std::variant<QuantifierDecl, ImplicationDecl, LetDecl>;

struct DeclarationOrigin {
  std::string doc_path;
  std::int64_t cell_id = 0;
  friend bool operator==(const DeclarationOrigin&, const DeclarationOrigin&) = default;
};

/// One declaration cell. More than one item makes it a sequence; sequences never nest.
struct GlobalDeclaration {
  std::vector<DeclarationItem> items;
  std::optional<DeclarationOrigin> origin;

  bool is_sequence() const { return items.size() > 1; }
  friend bool operator==(const GlobalDeclaration&, const GlobalDeclaration&) = default;
};

/// Parses an orphaned-quantifier chain with optional trailing lets, an orphaned
/// implication ("F =>"), or a single let.
GlobalDeclaration parse_declaration(std::string_view text);

std::string format(const GlobalDeclaration& d, Style style = Style::Ascii);
std::string format(const DeclarationItem& d, Style style = Style::Ascii);

}  // namespace tma
