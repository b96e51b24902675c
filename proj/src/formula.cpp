#include "tma/formula.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace tma {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Const: return "Const";
    case Kind::Var: return "Var";
    case Kind::Integer: return "Integer";
    case Kind::Rational: return "Rational";
    case Kind::App: return "App";
    case Kind::Index: return "Index";
    case Kind::Set: return "Set";
    case Kind::Tuple: return "Tuple";
    case Kind::Length: return "Length";
    case Kind::Not: return "Not";
    case Kind::And: return "And";
    case Kind::Or: return "Or";
    case Kind::Implies: return "Implies";
    case Kind::Iff: return "Iff";
    case Kind::DefIff: return "DefIff";
    case Kind::DefEq: return "DefEq";
    case Kind::Eq: return "Eq";
    case Kind::Neq: return "Neq";
    case Kind::Le: return "Le";
    case Kind::Lt: return "Lt";
    case Kind::Ge: return "Ge";
    case Kind::Gt: return "Gt";
    case Kind::In: return "In";
    case Kind::Forall: return "Forall";
    case Kind::Exists: return "Exists";
    case Kind::True: return "True";
    case Kind::False: return "False";
  }
  return "?";
}

bool is_relation(Kind k) {
  switch (k) {
    case Kind::Eq:
    case Kind::Neq:
    case Kind::Le:
    case Kind::Lt:
    case Kind::Ge:
    case Kind::Gt:
    case Kind::In:
      return true;
    default:
      return false;
  }
}

bool is_quantifier(Kind k) { return k == Kind::Forall || k == Kind::Exists; }

bool is_connective(Kind k) {
  switch (k) {
    case Kind::Not:
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
    case Kind::DefIff:
      return true;
    default:
      return false;
  }
}

namespace {

const std::shared_ptr<const Node>& true_node() {
  static const auto node = std::make_shared<const Node>(Node{Kind::True, {}, 0, 1, {}, {}});
  return node;
}

}  // namespace

Formula::Formula() : node_(true_node()) {}

Kind Formula::kind() const { return node_->kind; }
const std::string& Formula::name() const { return node_->name; }
std::int64_t Formula::value() const { return node_->num; }
std::int64_t Formula::denominator() const { return node_->den; }

const Formula& Formula::head() const {
  if (kind() != Kind::App) throw std::logic_error("head() on non-application");
  return node_->children.front();
}

std::span<const Formula> Formula::args() const {
  std::span<const Formula> all(node_->children);
  if (kind() == Kind::App) return all.subspan(1);
  return all;
}

const Binder& Formula::binder() const {
  if (!node_->binder) throw std::logic_error("binder() on non-quantifier");
  return *node_->binder;
}

const Formula& Formula::body() const {
  if (!is_quantifier(kind())) throw std::logic_error("body() on non-quantifier");
  return node_->children.front();
}

bool Formula::is_app_of(std::string_view n) const {
  if (is(Kind::Const)) return name() == n;
  return is(Kind::App) && head().is(Kind::Const) && head().name() == n;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const Node& x = *a.node_;
  const Node& y = *b.node_;
  return x.kind == y.kind && x.name == y.name && x.num == y.num && x.den == y.den &&
         x.children == y.children && x.binder == y.binder;
}

Formula make_node(Node n) { return Formula(std::make_shared<const Node>(std::move(n))); }

const std::vector<Formula>& children_of(const Formula& f) { return f.raw()->children; }

Formula with_children(const Formula& f, std::vector<Formula> children) {
  Node n = *f.raw();
  n.children = std::move(children);
  return make_node(std::move(n));
}

Formula constant(std::string name) { return make_node({Kind::Const, std::move(name), 0, 1, {}, {}}); }
Formula variable(std::string name) { return make_node({Kind::Var, std::move(name), 0, 1, {}, {}}); }
Formula integer(std::int64_t v) { return make_node({Kind::Integer, {}, v, 1, {}, {}}); }

Formula rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (den == 1) return integer(num);
  return make_node({Kind::Rational, {}, num, den, {}, {}});
}

Formula apply(Formula head, std::vector<Formula> args) {
  std::vector<Formula> ch;
  ch.reserve(args.size() + 1);
  ch.push_back(std::move(head));
  for (auto& a : args) ch.push_back(std::move(a));
  return make_node({Kind::App, {}, 0, 1, std::move(ch), {}});
}

Formula apply(std::string head, std::vector<Formula> args) {
  return apply(constant(std::move(head)), std::move(args));
}

Formula index_of(Formula base, Formula index) {
  return make_node({Kind::Index, {}, 0, 1, {std::move(base), std::move(index)}, {}});
}

Formula set_of(std::vector<Formula> elems) { return make_node({Kind::Set, {}, 0, 1, std::move(elems), {}}); }
Formula tuple_of(std::vector<Formula> elems) { return make_node({Kind::Tuple, {}, 0, 1, std::move(elems), {}}); }
Formula length_of(Formula arg) { return make_node({Kind::Length, {}, 0, 1, {std::move(arg)}, {}}); }
Formula negation(Formula f) { return make_node({Kind::Not, {}, 0, 1, {std::move(f)}, {}}); }

namespace {

Formula junction(Kind k, std::vector<Formula> fs) {
  std::vector<Formula> flat;
  for (auto& f : fs) {
    if (f.is(k)) {
      for (const auto& g : f.args()) flat.push_back(g);
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (flat.empty()) return k == Kind::And ? truth() : falsity();
  if (flat.size() == 1) return flat.front();
  return make_node({k, {}, 0, 1, std::move(flat), {}});
}

}  // namespace

Formula conjunction(std::vector<Formula> fs) { return junction(Kind::And, std::move(fs)); }
Formula disjunction(std::vector<Formula> fs) { return junction(Kind::Or, std::move(fs)); }

Formula binary(Kind k, Formula lhs, Formula rhs) {
  if (k == Kind::And || k == Kind::Or) return junction(k, {std::move(lhs), std::move(rhs)});
  return make_node({k, {}, 0, 1, {std::move(lhs), std::move(rhs)}, {}});
}

Formula implication(Formula lhs, Formula rhs) { return binary(Kind::Implies, std::move(lhs), std::move(rhs)); }
Formula equivalence(Formula lhs, Formula rhs) { return binary(Kind::Iff, std::move(lhs), std::move(rhs)); }
Formula def_equivalence(Formula lhs, Formula rhs) { return binary(Kind::DefIff, std::move(lhs), std::move(rhs)); }
Formula def_equality(Formula lhs, Formula rhs) { return binary(Kind::DefEq, std::move(lhs), std::move(rhs)); }

Formula relation(Kind k, Formula lhs, Formula rhs) {
  if (!is_relation(k)) throw std::logic_error("relation() with non-relational kind");
  return binary(k, std::move(lhs), std::move(rhs));
}

Formula quantifier(Kind k, Binder b, Formula body) {
  if (!is_quantifier(k)) throw std::logic_error("quantifier() with non-quantifier kind");
  if (b.vars.empty()) throw std::invalid_argument("binder without variables");
  if (b.range && b.vars.size() != 1) throw std::invalid_argument("range binder must bind exactly one variable");
  return make_node({k, {}, 0, 1, {std::move(body)}, std::move(b)});
}

Formula forall(Binder b, Formula body) { return quantifier(Kind::Forall, std::move(b), std::move(body)); }
Formula exists(Binder b, Formula body) { return quantifier(Kind::Exists, std::move(b), std::move(body)); }

Formula truth() { return Formula(); }

Formula falsity() {
  static const Formula f = make_node({Kind::False, {}, 0, 1, {}, {}});
  return f;
}

namespace {

void collect_free(const Formula& f, std::vector<std::string>& bound, NameSet& out) {
  switch (f.kind()) {
    case Kind::Var:
      if (std::find(bound.begin(), bound.end(), f.name()) == bound.end()) out.insert(f.name());
      return;
    case Kind::Forall:
    case Kind::Exists: {
      const Binder& b = f.binder();
      const std::size_t mark = bound.size();
      bound.insert(bound.end(), b.vars.begin(), b.vars.end());
      if (b.condition) collect_free(*b.condition, bound, out);
      if (b.range) {
        collect_free(b.range->lo, bound, out);
        collect_free(b.range->hi, bound, out);
      }
      collect_free(f.body(), bound, out);
      bound.resize(mark);
      return;
    }
    default:
      for (const auto& c : children_of(f)) collect_free(c, bound, out);
  }
}

void collect_symbols(const Formula& f, NameSet& out) {
  if (f.is_symbol()) out.insert(f.name());
  if (is_quantifier(f.kind())) {
    const Binder& b = f.binder();
    out.insert(b.vars.begin(), b.vars.end());
    if (b.condition) collect_symbols(*b.condition, out);
    if (b.range) {
      collect_symbols(b.range->lo, out);
      collect_symbols(b.range->hi, out);
    }
  }
  for (const auto& c : children_of(f)) collect_symbols(c, out);
}

}  // namespace

NameSet free_variables(const Formula& f) {
  NameSet out;
  std::vector<std::string> bound;
  collect_free(f, bound, out);
  return out;
}

NameSet symbols(const Formula& f) {
  NameSet out;
  collect_symbols(f, out);
  return out;
}

std::string fresh_name(const std::string& base, const NameSet& used, bool allow_base) {
  if (allow_base && !used.count(base)) return base;
  for (std::size_t k = 1;; ++k) {
    std::string candidate = base + std::to_string(k);
    if (!used.count(candidate)) return candidate;
  }
}

namespace {

Formula subst(const Formula& f, const Substitution& map);

Binder subst_binder_parts(const Binder& b, const Substitution& map) {
  Binder out = b;
  if (out.condition) out.condition = subst(*out.condition, map);
  if (out.range) out.range = Range{subst(out.range->lo, map), subst(out.range->hi, map)};
  return out;
}

Formula subst_quantifier(const Formula& f, const Substitution& map) {
  const Binder& b = f.binder();
  NameSet scope_free = free_variables(f);
  // Only entries for variables actually free under this binder matter.
  Substitution inner;
  for (const auto& [name, repl] : map) {
    if (scope_free.count(name)) inner.emplace(name, repl);
  }
  if (inner.empty()) return f;

  NameSet repl_free;
  NameSet used = symbols(f);
  for (const auto& [name, repl] : inner) {
    NameSet fv = free_variables(repl);
    repl_free.insert(fv.begin(), fv.end());
    NameSet sy = symbols(repl);
    used.insert(sy.begin(), sy.end());
    used.insert(name);
  }

  Binder nb = b;
  Substitution renaming;
  for (auto& v : nb.vars) {
    if (repl_free.count(v)) {
      std::string nv = fresh_name(v, used);
      used.insert(nv);
      renaming.emplace(v, variable(nv));
      v = nv;
    }
  }
  Formula body = f.body();
  if (!renaming.empty()) {
    nb = subst_binder_parts(nb, renaming);
    body = subst(body, renaming);
  }
  nb = subst_binder_parts(nb, inner);
  body = subst(body, inner);
  return quantifier(f.kind(), std::move(nb), std::move(body));
}

Formula subst(const Formula& f, const Substitution& map) {
  switch (f.kind()) {
    case Kind::Var: {
      auto it = map.find(f.name());
      return it == map.end() ? f : it->second;
    }
    case Kind::Const:
    case Kind::Integer:
    case Kind::Rational:
    case Kind::True:
    case Kind::False:
      return f;
    case Kind::Forall:
    case Kind::Exists:
      return subst_quantifier(f, map);
    default: {
      const auto& ch = children_of(f);
      std::vector<Formula> out;
      out.reserve(ch.size());
      bool changed = false;
      for (const auto& c : ch) {
        out.push_back(subst(c, map));
        changed = changed || !(out.back().raw() == c.raw());
      }
      if (!changed) return f;
      if (f.is(Kind::And) || f.is(Kind::Or)) return f.is(Kind::And) ? conjunction(std::move(out)) : disjunction(std::move(out));
      return with_children(f, std::move(out));
    }
  }
}

using Scope = std::vector<std::pair<std::string, int>>;

int lookup(const Scope& s, const std::string& n) {
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    if (it->first == n) return it->second;
  }
  return -1;
}

bool alpha(const Formula& a, const Formula& b, Scope& sa, Scope& sb, int& depth) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kind::Var: {
      int ia = lookup(sa, a.name());
      int ib = lookup(sb, b.name());
      if (ia != ib) return false;
      return ia >= 0 || a.name() == b.name();
    }
    case Kind::Const:
      return a.name() == b.name();
    case Kind::Integer:
    case Kind::Rational:
      return a.numerator() == b.numerator() && a.denominator() == b.denominator();
    case Kind::True:
    case Kind::False:
      return true;
    case Kind::Forall:
    case Kind::Exists: {
      const Binder& ba = a.binder();
      const Binder& bb = b.binder();
      if (ba.vars.size() != bb.vars.size()) return false;
      if (ba.condition.has_value() != bb.condition.has_value()) return false;
      if (ba.range.has_value() != bb.range.has_value()) return false;
      const std::size_t ma = sa.size();
      const std::size_t mb = sb.size();
      for (std::size_t i = 0; i < ba.vars.size(); ++i) {
        ++depth;
        sa.emplace_back(ba.vars[i], depth);
        sb.emplace_back(bb.vars[i], depth);
      }
      bool ok = true;
      if (ba.condition) ok = alpha(*ba.condition, *bb.condition, sa, sb, depth);
      if (ok && ba.range) {
        ok = alpha(ba.range->lo, bb.range->lo, sa, sb, depth) && alpha(ba.range->hi, bb.range->hi, sa, sb, depth);
      }
      ok = ok && alpha(a.body(), b.body(), sa, sb, depth);
      sa.resize(ma);
      sb.resize(mb);
      return ok;
    }
    default: {
      const auto& ca = children_of(a);
      const auto& cb = children_of(b);
      if (ca.size() != cb.size()) return false;
      for (std::size_t i = 0; i < ca.size(); ++i) {
        if (!alpha(ca[i], cb[i], sa, sb, depth)) return false;
      }
      return true;
    }
  }
}

}  // namespace

Formula substitute(const Formula& f, const Substitution& map) {
  if (map.empty()) return f;
  return subst(f, map);
}

bool alpha_equal(const Formula& a, const Formula& b) {
  Scope sa;
  Scope sb;
  int depth = 0;
  return alpha(a, b, sa, sb, depth);
}

Formula freeze_free_variables(const Formula& f) {
  Substitution map;
  for (const auto& v : free_variables(f)) map.emplace(v, constant(v));
  return substitute(f, map);
}

std::size_t formula_size(const Formula& f) {
  std::size_t n = 1;
  if (is_quantifier(f.kind())) {
    const Binder& b = f.binder();
    if (b.condition) n += formula_size(*b.condition);
    if (b.range) n += formula_size(b.range->lo) + formula_size(b.range->hi);
  }
  for (const auto& c : children_of(f)) n += formula_size(c);
  return n;
}

}  // namespace tma
