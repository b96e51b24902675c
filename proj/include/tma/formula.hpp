// Abstract syntax of the formula language and the core tree operations on it.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace tma {

enum class Kind {
  Const,
  Var,
  Integer,
  Rational,
  App,
  Index,
  Set,
  Tuple,
  Length,
  Not,
  And,
  Or,
  Implies,
  Iff,
  DefIff,
  DefEq,
  Eq,
  Neq,
  Le,
  Lt,
  Ge,
  Gt,
  In,
  Forall,
  Exists,
  True,
  False,
};

const char* kind_name(Kind k);
bool is_relation(Kind k);
bool is_quantifier(Kind k);
// Not, And, Or, Implies, Iff, DefIff.
bool is_connective(Kind k);

struct Node;
struct Binder;

/// Immutable, cheaply copyable handle to a formula tree. Default-constructs to True.
class Formula {
 public:
  Formula();

  Kind kind() const;
  bool is(Kind k) const { return kind() == k; }

  /// Symbol name for Const and Var.
  const std::string& name() const;
  /// Integer value, or the numerator of a Rational.
  std::int64_t value() const;
  std::int64_t numerator() const { return value(); }
  std::int64_t denominator() const;

  /// Head of an App.
  const Formula& head() const;
  /// Arguments of an App; elements of Set/Tuple; operands of every other composite node.
  std::span<const Formula> args() const;
  const Formula& arg(std::size_t i) const { return args()[i]; }
  const Formula& lhs() const { return arg(0); }
  const Formula& rhs() const { return arg(1); }

  /// Binder and body of Forall/Exists.
  const Binder& binder() const;
  const Formula& body() const;

  bool is_literal_number() const { return is(Kind::Integer) || is(Kind::Rational); }
  /// Const or Var.
  bool is_symbol() const { return is(Kind::Const) || is(Kind::Var); }
  /// Const whose name is `n`, or App whose head is such a Const.
  bool is_app_of(std::string_view n) const;

  const Node* raw() const { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend Formula make_node(Node n);
  std::shared_ptr<const Node> node_;
};

struct Range {
  Formula lo;
  Formula hi;
  friend bool operator==(const Range&, const Range&) = default;
};

/// Variables bound by a quantifier with optional condition and integer range.
/// A range binder binds exactly one variable.
struct Binder {
  std::vector<std::string> vars;
  std::optional<Formula> condition;
  std::optional<Range> range;
  friend bool operator==(const Binder&, const Binder&) = default;
};

struct Node {
  Kind kind = Kind::True;
  std::string name;
  std::int64_t num = 0;
  std::int64_t den = 1;
  // App: head followed by args. Forall/Exists: body. Others: operands/elements.
  std::vector<Formula> children;
  std::optional<Binder> binder;
};

Formula make_node(Node n);

// Constructors. All of them enforce the type invariants (normalized rationals,
// flattened conjunctions and disjunctions, single-variable range binders).
Formula constant(std::string name);
Formula variable(std::string name);
Formula integer(std::int64_t v);
/// Normalized; returns an Integer when the denominator divides the numerator.
/// Throws std::domain_error on zero denominator.
Formula rational(std::int64_t num, std::int64_t den);
Formula apply(Formula head, std::vector<Formula> args);
Formula apply(std::string head, std::vector<Formula> args);
Formula index_of(Formula base, Formula index);
Formula set_of(std::vector<Formula> elems);
Formula tuple_of(std::vector<Formula> elems);
Formula length_of(Formula arg);
Formula negation(Formula f);
/// Flattens nested conjunctions. Zero operands gives True, one gives the operand.
Formula conjunction(std::vector<Formula> fs);
Formula disjunction(std::vector<Formula> fs);
Formula implication(Formula lhs, Formula rhs);
Formula equivalence(Formula lhs, Formula rhs);
Formula def_equivalence(Formula lhs, Formula rhs);
Formula def_equality(Formula lhs, Formula rhs);
/// `k` must be one of Eq, Neq, Le, Lt, Ge, Gt, In.
Formula relation(Kind k, Formula lhs, Formula rhs);
Formula binary(Kind k, Formula lhs, Formula rhs);
Formula forall(Binder b, Formula body);
Formula exists(Binder b, Formula body);
Formula quantifier(Kind k, Binder b, Formula body);
Formula truth();
Formula falsity();

/// Rebuilds `f` with new operands, keeping kind, name, values and binder.
Formula with_children(const Formula& f, std::vector<Formula> children);
const std::vector<Formula>& children_of(const Formula& f);

using NameSet = std::set<std::string>;
using Substitution = std::map<std::string, Formula>;

/// Names of Var nodes with at least one occurrence not bound by an enclosing binder.
/// A binder scopes over its own condition, range and body.
NameSet free_variables(const Formula& f);

/// Every Const and Var name occurring anywhere, bound or not, including App heads.
NameSet symbols(const Formula& f);

/// Capture-avoiding substitution of free Var occurrences. Bound variables that would
/// capture a replacement are renamed to the name with the smallest positive integer
/// suffix not in use.
Formula substitute(const Formula& f, const Substitution& map);

/// Smallest `base` + k (k = 1, 2, ...) not in `used`; `base` itself if unused and
/// `allow_base` is set.
std::string fresh_name(const std::string& base, const NameSet& used, bool allow_base = false);

/// Equality up to consistent renaming of bound variables.
bool alpha_equal(const Formula& a, const Formula& b);

/// Turns every free Var into a Const of the same name.
Formula freeze_free_variables(const Formula& f);

/// Number of nodes, for limits and tests.
std::size_t formula_size(const Formula& f);

}  // namespace tma
