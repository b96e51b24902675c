#include "tma/syntax.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>

namespace tma {

namespace {

struct Alias {
  std::string_view spelling;
  TokenKind kind;
  std::string_view text;
};

// Longest spellings first within each leading byte sequence.
constexpr std::array kAliases = {
    Alias{":⟺", TokenKind::Operator, ":<=>"}, Alias{"∀", TokenKind::Keyword, "forall"},
    Alias{"∃", TokenKind::Keyword, "exists"}, Alias{"∧", TokenKind::Keyword, "and"},
    Alias{"∨", TokenKind::Keyword, "or"},     Alias{"¬", TokenKind::Keyword, "not"},
    Alias{"⇒", TokenKind::Operator, "=>"},    Alias{"⇔", TokenKind::Operator, "<=>"},
    Alias{"⟺", TokenKind::Operator, "<=>"},   Alias{"≤", TokenKind::Operator, "<="},
    Alias{"≥", TokenKind::Operator, ">="},    Alias{"≠", TokenKind::Operator, "!="},
    Alias{"∈", TokenKind::Keyword, "in"},     Alias{"…", TokenKind::Operator, ".."},
    Alias{"−", TokenKind::Operator, "-"},     Alias{"×", TokenKind::Operator, "*"},
    Alias{"≔", TokenKind::Operator, ":="},    Alias{"⟨", TokenKind::Bracket, "⟨"},
    Alias{"⟩", TokenKind::Bracket, "⟩"},
};

constexpr std::array<std::string_view, 16> kOperators = {
    ":<=>", "<=>", ":=", "=>", "<=", ">=", "!=", "..", "=", "<", ">", "+", "-", "*", "/", "^",
};

constexpr std::array<std::string_view, 10> kKeywords = {
    "forall", "exists", "and", "or", "not", "in", "with", "let", "True", "False",
};

// Decodes one UTF-8 code point; returns 0 on malformed input.
std::size_t utf8_length(std::string_view s, std::size_t i, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  return len;
}

bool is_ident_letter(char32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp >= 0x0391 && cp <= 0x03C9 && cp != 0x03A2) return true;  // Greek
  return cp == 0x2115 || cp == 0x2124 || cp == 0x211A || cp == 0x211D;  // N Z Q R
}

bool is_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    bool matched = false;
    for (const auto& a : kAliases) {
      if (text.substr(i, a.spelling.size()) == a.spelling) {
        out.push_back({a.kind, std::string(a.text), {i, i + a.spelling.size()}});
        i += a.spelling.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;

    char32_t cp = 0;
    const std::size_t len = utf8_length(text, i, cp);
    if (len == 0) throw LexError("malformed UTF-8", {i, i + 1});

    if (is_ident_letter(cp)) {
      std::size_t j = i + len;
      while (j < text.size()) {
        char32_t next = 0;
        const std::size_t l = utf8_length(text, j, next);
        if (l == 0 || !(is_ident_letter(next) || is_digit(next))) break;
        j += l;
      }
      std::string word(text.substr(i, j - i));
      bool keyword = false;
      for (auto k : kKeywords) keyword = keyword || word == k;
      out.push_back({keyword ? TokenKind::Keyword : TokenKind::Ident, std::move(word), {i, j}});
      i = j;
      continue;
    }
    if (is_digit(cp)) {
      std::size_t j = i;
      while (j < text.size() && is_digit(static_cast<unsigned char>(text[j]))) ++j;
      std::string digits(text.substr(i, j - i));
      if (digits.size() > 18 && digits > std::to_string(std::numeric_limits<std::int64_t>::max())) {
        throw LexError("integer literal too large", {i, j});
      }
      out.push_back({TokenKind::Integer, std::move(digits), {i, j}});
      i = j;
      continue;
    }
    if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}') {
      out.push_back({TokenKind::Bracket, std::string(1, c), {i, i + 1}});
      ++i;
      continue;
    }
    if (c == '|' || c == '_' || c == ',' ) {
      out.push_back({TokenKind::Operator, std::string(1, c), {i, i + 1}});
      ++i;
      continue;
    }
    for (auto op : kOperators) {
      if (text.substr(i, op.size()) == op) {
        out.push_back({TokenKind::Operator, std::string(op), {i, i + op.size()}});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (c == ':') {
      out.push_back({TokenKind::Operator, ":", {i, i + 1}});
      ++i;
      continue;
    }
    throw LexError("unexpected character '" + std::string(text.substr(i, len)) + "'", {i, i + len});
  }
  out.push_back({TokenKind::End, "", {text.size(), text.size()}});
  return out;
}

namespace {

Kind relation_kind(const std::string& op) {
  if (op == "=") return Kind::Eq;
  if (op == "!=") return Kind::Neq;
  if (op == "<=") return Kind::Le;
  if (op == "<") return Kind::Lt;
  if (op == ">=") return Kind::Ge;
  if (op == ">") return Kind::Gt;
  return Kind::In;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Formula parse_all() {
    Formula f = formula();
    expect_end();
    return f;
  }

  GlobalDeclaration declaration() {
    GlobalDeclaration d;
    if (at_keyword("forall") || at_keyword("let") || at_keyword("exists")) {
      while (!at_end()) {
        if (at_keyword("exists")) fail("only universal quantifiers can be declared", {"forall", "let"});
        if (accept_keyword("forall")) {
          Binder b;
          if (accept_bracket("[")) {
            Flag reset(in_bars_, false);
            b = binder_spec();
            if (accept_keyword("with")) b.condition = conjunction(formula_list());
            expect_bracket("]");
          } else {
            b = binder_spec();
            if (accept_keyword("with")) b.condition = conjunction(formula_list());
          }
          d.items.emplace_back(QuantifierDecl{std::move(b)});
        } else if (accept_keyword("let")) {
          std::string name = expect_ident();
          expect_op("=");
          d.items.emplace_back(LetDecl{std::move(name), formula()});
        } else {
          fail("expected another declaration", {"forall", "let", "end of input"});
        }
      }
      return d;
    }
    Formula lhs = or_expr();
    expect_op("=>");
    if (!at_end()) fail("an orphaned implication has no right-hand side", {"end of input"});
    d.items.emplace_back(ImplicationDecl{std::move(lhs)});
    return d;
  }

 private:
  struct Flag {
    Flag(bool& f, bool v) : ref(f), saved(f) { ref = v; }
    ~Flag() { ref = saved; }
    bool& ref;
    bool saved;
  };

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  bool at_end() const { return peek().kind == TokenKind::End; }
  bool at(TokenKind k, std::string_view text, std::size_t ahead = 0) const {
    return peek(ahead).kind == k && peek(ahead).text == text;
  }
  bool at_op(std::string_view t) const { return at(TokenKind::Operator, t); }
  bool at_keyword(std::string_view t) const { return at(TokenKind::Keyword, t); }
  bool at_bracket(std::string_view t) const { return at(TokenKind::Bracket, t); }

  bool accept(TokenKind k, std::string_view t) {
    if (!at(k, t)) return false;
    ++pos_;
    return true;
  }
  bool accept_op(std::string_view t) { return accept(TokenKind::Operator, t); }
  bool accept_keyword(std::string_view t) { return accept(TokenKind::Keyword, t); }
  bool accept_bracket(std::string_view t) { return accept(TokenKind::Bracket, t); }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", found " + found, t.span, std::move(expected));
  }

  void expect_op(std::string_view t) {
    if (!accept_op(t)) fail("expected '" + std::string(t) + "'", {std::string(t)});
  }
  void expect_bracket(std::string_view t) {
    if (!accept_bracket(t)) fail("expected '" + std::string(t) + "'", {std::string(t)});
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing input", {"end of input"});
  }
  std::string expect_ident() {
    if (peek().kind != TokenKind::Ident) fail("expected identifier", {"identifier"});
    return tokens_[pos_++].text;
  }

  Formula formula() {
    Formula lhs = iff_expr();
    if (accept_op(":<=>")) return def_equivalence(std::move(lhs), iff_expr());
    if (accept_op(":=")) return def_equality(std::move(lhs), iff_expr());
    return lhs;
  }

  Formula iff_expr() {
    Formula lhs = impl_expr();
    while (accept_op("<=>")) lhs = equivalence(std::move(lhs), impl_expr());
    return lhs;
  }

  Formula impl_expr() {
    Formula lhs = or_expr();
    if (accept_op("=>")) return implication(std::move(lhs), impl_expr());
    return lhs;
  }

  Formula or_expr() {
    std::vector<Formula> parts{and_expr()};
    while (accept_keyword("or")) parts.push_back(and_expr());
    return parts.size() == 1 ? parts.front() : disjunction(std::move(parts));
  }

  Formula and_expr() {
    std::vector<Formula> parts{not_expr()};
    while (accept_keyword("and")) parts.push_back(not_expr());
    return parts.size() == 1 ? parts.front() : conjunction(std::move(parts));
  }

  Formula not_expr() {
    if (accept_keyword("not")) return negation(not_expr());
    return rel_expr();
  }

  bool at_relation() const {
    return at_op("=") || at_op("!=") || at_op("<=") || at_op("<") || at_op(">=") || at_op(">") ||
           at_keyword("in");
  }

  Formula rel_expr() {
    Formula lhs = add_expr();
    if (!at_relation()) return lhs;
    Kind k = relation_kind(tokens_[pos_++].text);
    Formula f = relation(k, std::move(lhs), add_expr());
    if (at_relation()) fail("relations do not chain; use 'and'", {"and"});
    return f;
  }

  Formula add_expr() {
    Formula lhs = mul_expr();
    for (;;) {
      if (accept_op("+")) {
        lhs = apply("plus", {std::move(lhs), mul_expr()});
      } else if (accept_op("-")) {
        lhs = apply("minus", {std::move(lhs), mul_expr()});
      } else {
        return lhs;
      }
    }
  }

  Formula mul_expr() {
    Formula lhs = unary();
    for (;;) {
      if (accept_op("*")) {
        lhs = apply("times", {std::move(lhs), unary()});
      } else if (accept_op("/")) {
        lhs = apply("divide", {std::move(lhs), unary()});
      } else {
        return lhs;
      }
    }
  }

  Formula unary() {
    const Span at_minus = peek().span;
    if (accept_op("-")) {
      Formula operand = unary();
      if (operand.is(Kind::Integer)) {
        if (operand.value() == std::numeric_limits<std::int64_t>::min()) {
          throw ParseError("integer literal too large", at_minus, {});
        }
        return integer(-operand.value());
      }
      if (operand.is(Kind::Rational)) return rational(-operand.numerator(), operand.denominator());
      return apply("minus", {std::move(operand)});
    }
    return pow_expr();
  }

  Formula pow_expr() {
    Formula base = postfix();
    if (accept_op("^")) return apply("power", {std::move(base), unary()});
    return base;
  }

  Formula postfix() {
    Formula f = primary();
    while (accept_op("_")) f = index_of(std::move(f), index_atom());
    return f;
  }

  Formula index_atom() {
    const Token& t = peek();
    if (t.kind == TokenKind::Ident) {
      ++pos_;
      return variable(t.text);
    }
    if (t.kind == TokenKind::Integer) {
      ++pos_;
      return integer(std::stoll(t.text));
    }
    if (accept_bracket("(")) {
      Flag reset(in_bars_, false);
      Formula f = formula();
      expect_bracket(")");
      return f;
    }
    fail("an index must be an identifier, an integer or parenthesized", {"identifier", "integer", "("});
  }

  std::vector<Formula> formula_list() {
    std::vector<Formula> items{formula()};
    while (accept_op(",")) items.push_back(formula());
    return items;
  }

  std::vector<Formula> bracket_args(std::string_view close) {
    std::vector<Formula> items;
    if (accept_bracket(close)) return items;
    items = formula_list();
    expect_bracket(close);
    return items;
  }

  Formula primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Integer:
        ++pos_;
        return integer(std::stoll(t.text));
      case TokenKind::Ident: {
        ++pos_;
        if (!at_bracket("[")) return variable(t.text);
        const Span head_span = t.span;
        const std::string head = t.text;
        ++pos_;
        Flag reset(in_bars_, false);
        std::vector<Formula> args = bracket_args("]");
        if (head == "tuple") return tuple_of(std::move(args));
        if (head == "Rational") {
          if (args.size() != 2 || !args[0].is(Kind::Integer) || !args[1].is(Kind::Integer) || args[1].value() == 0) {
            throw ParseError("Rational[n, d] needs two integers and a nonzero denominator", head_span, {});
          }
          return rational(args[0].value(), args[1].value());
        }
        return apply(head, std::move(args));
      }
      case TokenKind::Keyword:
        if (accept_keyword("True")) return truth();
        if (accept_keyword("False")) return falsity();
        if (at_keyword("forall") || at_keyword("exists")) return quantified();
        break;
      case TokenKind::Bracket: {
        if (accept_bracket("(")) {
          Flag reset(in_bars_, false);
          Formula f = formula();
          expect_bracket(")");
          return f;
        }
        if (accept_bracket("{")) {
          Flag reset(in_bars_, false);
          return set_of(bracket_args("}"));
        }
        if (accept_bracket("⟨")) {
          Flag reset(in_bars_, false);
          return tuple_of(bracket_args("⟩"));
        }
        break;
      }
      case TokenKind::Operator:
        if (at_op("|")) {
          if (in_bars_) fail("unbalanced '|' (parenthesize nested lengths)", {"(", "identifier"});
          ++pos_;
          Flag inside(in_bars_, true);
          Formula f = formula();
          if (!accept_op("|")) fail("unbalanced '|'", {"|"});
          return length_of(std::move(f));
        }
        break;
      case TokenKind::End:
        break;
    }
    fail("expected a term or formula", {"identifier", "integer", "(", "{", "|", "forall", "exists"});
  }

  Binder binder_spec() {
    Binder b;
    if (accept_bracket("{")) {
      b.vars.push_back(expect_ident());
      while (accept_op(",")) b.vars.push_back(expect_ident());
      expect_bracket("}");
      return b;
    }
    b.vars.push_back(expect_ident());
    if (accept_op("=")) {
      Formula lo = add_expr();
      if (!accept_op("..")) {
        if (at_op(",") && at(TokenKind::Operator, "..", 1) && at(TokenKind::Operator, ",", 2)) {
          pos_ += 3;
        } else {
          fail("expected '..' in range", {".."});
        }
      }
      b.range = Range{std::move(lo), add_expr()};
    }
    return b;
  }

  Formula quantified() {
    const Kind k = peek().text == "forall" ? Kind::Forall : Kind::Exists;
    ++pos_;
    if (accept_bracket("[")) {
      Flag reset(in_bars_, false);
      Binder b = binder_spec();
      if (accept_keyword("with")) {
        std::vector<Formula> items = formula_list();
        if (items.size() < 2) fail("expected ',' and a body after the condition", {","});
        Formula body = items.back();
        items.pop_back();
        b.condition = conjunction(std::move(items));
        expect_bracket("]");
        return quantifier(k, std::move(b), std::move(body));
      }
      expect_op(",");
      Formula body = formula();
      expect_bracket("]");
      return quantifier(k, std::move(b), std::move(body));
    }
    Binder b = binder_spec();
    if (accept_keyword("with")) b.condition = conjunction(formula_list());
    expect_op(":");
    return quantifier(k, std::move(b), formula());
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  bool in_bars_ = false;
};

// Printing.

enum Prec : int {
  kQuantSugar = 0,
  kDef = 1,
  kIff = 2,
  kImplies = 3,
  kOr = 4,
  kAnd = 5,
  kNot = 6,
  kRel = 7,
  kAdd = 8,
  kMul = 9,
  kUnary = 10,
  kPow = 11,
  kPostfix = 12,
  kPrimary = 13,
};

bool is_operator_app(const Formula& f, std::string_view head, std::size_t arity) {
  return f.is(Kind::App) && f.head().is(Kind::Const) && f.head().name() == head && f.args().size() == arity;
}

class Printer {
 public:
  explicit Printer(Style s) : style_(s) {}

  std::string print(const Formula& f) { return fmt(f, 0, true, false); }
  std::string print_at(const Formula& f, int ctx) { return fmt(f, ctx, false, false); }

  std::string binder(const Binder& b, bool with_condition) {
    std::string out;
    if (b.vars.size() == 1) {
      out = b.vars.front();
    } else {
      out = "{";
      for (std::size_t i = 0; i < b.vars.size(); ++i) out += (i ? ", " : "") + b.vars[i];
      out += "}";
    }
    if (b.range) {
      out += " = " + fmt(b.range->lo, kAdd, false, false);
      out += unicode() ? ",…," : "..";
      out += fmt(b.range->hi, kAdd, false, false);
    }
    if (with_condition && b.condition) out += " with " + fmt(*b.condition, 0, false, false);
    return out;
  }

 private:
  bool unicode() const { return style_ == Style::Unicode; }

  int prec(const Formula& f) const {
    switch (f.kind()) {
      case Kind::Forall:
      case Kind::Exists:
        return unicode() ? kQuantSugar : kPrimary;
      case Kind::DefIff:
      case Kind::DefEq:
        return kDef;
      case Kind::Iff: return kIff;
      case Kind::Implies: return kImplies;
      case Kind::Or: return kOr;
      case Kind::And: return kAnd;
      case Kind::Not: return kNot;
      case Kind::Integer: return f.value() < 0 ? kUnary : kPrimary;
      case Kind::App:
        if (is_operator_app(f, "plus", 2) || is_operator_app(f, "minus", 2)) return kAdd;
        if (is_operator_app(f, "times", 2) || is_operator_app(f, "divide", 2)) return kMul;
        if (is_operator_app(f, "power", 2)) return kPow;
        if (is_operator_app(f, "minus", 1) && !f.arg(0).is_literal_number()) return kUnary;
        return kPrimary;
      default:
        if (is_relation(f.kind())) return kRel;
        return kPrimary;
    }
  }

  std::string fmt(const Formula& f, int ctx, bool rightmost, bool in_bars) {
    const int p = prec(f);
    const bool sugar_ok = p == kQuantSugar && rightmost;
    if (p < ctx && !sugar_ok) return "(" + inner(f, true, false) + ")";
    return inner(f, rightmost, in_bars);
  }

  std::string list(std::span<const Formula> items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += fmt(items[i], 0, true, false);
    }
    return out;
  }

  std::string sym(std::string_view ascii, std::string_view uni) const {
    return std::string(unicode() ? uni : ascii);
  }

  std::string infix(const Formula& f, std::string_view op, int lctx, int rctx, bool rm, bool in_bars) {
    return fmt(f.lhs(), lctx, false, in_bars) + " " + std::string(op) + " " + fmt(f.rhs(), rctx, rm, in_bars);
  }

  std::string nary(const Formula& f, std::string_view op, int ctx, bool rm, bool in_bars) {
    std::string out;
    const auto items = f.args();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += " " + std::string(op) + " ";
      out += fmt(items[i], ctx, i + 1 == items.size() && rm, in_bars);
    }
    return out;
  }

  std::string inner(const Formula& f, bool rm, bool in_bars) {
    switch (f.kind()) {
      case Kind::Const:
      case Kind::Var:
        return f.name();
      case Kind::Integer:
        return std::to_string(f.value());
      case Kind::Rational:
        return "Rational[" + std::to_string(f.numerator()) + ", " + std::to_string(f.denominator()) + "]";
      case Kind::True:
        return "True";
      case Kind::False:
        return "False";
      case Kind::App: {
        if (is_operator_app(f, "plus", 2)) return infix(f, "+", kAdd, kMul, rm, in_bars);
        if (is_operator_app(f, "minus", 2)) return infix(f, "-", kAdd, kMul, rm, in_bars);
        if (is_operator_app(f, "times", 2)) return fmt(f.lhs(), kMul, false, in_bars) + "*" + fmt(f.rhs(), kUnary, rm, in_bars);
        if (is_operator_app(f, "divide", 2)) return fmt(f.lhs(), kMul, false, in_bars) + "/" + fmt(f.rhs(), kUnary, rm, in_bars);
        if (is_operator_app(f, "power", 2)) return fmt(f.lhs(), kPostfix, false, in_bars) + "^" + fmt(f.rhs(), kUnary, rm, in_bars);
        if (is_operator_app(f, "minus", 1) && !f.arg(0).is_literal_number()) return "-" + fmt(f.arg(0), kUnary, rm, in_bars);
        std::string head = f.head().is_symbol() ? f.head().name() : "(" + print(f.head()) + ")";
        return head + "[" + list(f.args()) + "]";
      }
      case Kind::Index: {
        const Formula& idx = f.arg(1);
        std::string i = idx.is_symbol() || (idx.is(Kind::Integer) && idx.value() >= 0) ? inner(idx, true, false)
                                                                                      : "(" + print(idx) + ")";
        return fmt(f.arg(0), kPostfix, false, in_bars) + "_" + i;
      }
      case Kind::Set:
        return "{" + list(f.args()) + "}";
      case Kind::Tuple:
        return unicode() ? "⟨" + list(f.args()) + "⟩" : "tuple[" + list(f.args()) + "]";
      case Kind::Length: {
        std::string s = "|" + fmt(f.arg(0), 0, true, true) + "|";
        return in_bars ? "(" + s + ")" : s;
      }
      case Kind::Not: {
        return sym("not ", "¬") + fmt(f.arg(0), kNot, rm, in_bars);
      }
      case Kind::And:
        return nary(f, sym("and", "∧"), kNot, rm, in_bars);
      case Kind::Or:
        return nary(f, sym("or", "∨"), kAnd, rm, in_bars);
      case Kind::Implies:
        return infix(f, sym("=>", "⇒"), kOr, kImplies, rm, in_bars);
      case Kind::Iff:
        return infix(f, sym("<=>", "⇔"), kIff, kImplies, rm, in_bars);
      case Kind::DefIff:
        return infix(f, sym(":<=>", ":⟺"), kIff, kIff, rm, in_bars);
      case Kind::DefEq:
        return infix(f, ":=", kIff, kIff, rm, in_bars);
      case Kind::Eq: return infix(f, "=", kAdd, kAdd, rm, in_bars);
      case Kind::Neq: return infix(f, sym("!=", "≠"), kAdd, kAdd, rm, in_bars);
      case Kind::Le: return infix(f, sym("<=", "≤"), kAdd, kAdd, rm, in_bars);
      case Kind::Lt: return infix(f, "<", kAdd, kAdd, rm, in_bars);
      case Kind::Ge: return infix(f, sym(">=", "≥"), kAdd, kAdd, rm, in_bars);
      case Kind::Gt: return infix(f, ">", kAdd, kAdd, rm, in_bars);
      case Kind::In: return infix(f, sym("in", "∈"), kAdd, kAdd, rm, in_bars);
      case Kind::Forall:
      case Kind::Exists: {
        const bool all = f.is(Kind::Forall);
        if (unicode()) {
          return std::string(all ? "∀ " : "∃ ") + binder(f.binder(), true) + " : " + fmt(f.body(), 0, rm, in_bars);
        }
        return std::string(all ? "forall[" : "exists[") + binder(f.binder(), true) + ", " + print(f.body()) + "]";
      }
    }
    return "?";
  }

  Style style_;
};

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).parse_all(); }

GlobalDeclaration parse_declaration(std::string_view text) { return Parser(text).declaration(); }

std::string format(const Formula& f, Style style) { return Printer(style).print(f); }

std::string format(const DeclarationItem& d, Style style) {
  Printer p(style);
  const bool uni = style == Style::Unicode;
  if (const auto* q = std::get_if<QuantifierDecl>(&d)) {
    if (uni) return "∀ " + p.binder(q->binder, true);
    return "forall[" + p.binder(q->binder, true) + "]";
  }
  if (const auto* i = std::get_if<ImplicationDecl>(&d)) {
    return p.print_at(i->lhs, kOr) + (uni ? " ⇒" : " =>");
  }
  const auto& l = std::get<LetDecl>(d);
  return "let " + l.name + " = " + p.print(l.replacement);
}

std::string format(const GlobalDeclaration& d, Style style) {
  std::string out;
  for (std::size_t i = 0; i < d.items.size(); ++i) {
    if (i) out += " ";
    out += format(d.items[i], style);
  }
  return out;
}

}  // namespace tma
