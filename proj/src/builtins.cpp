#include "tma/builtins.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace tma {

const std::vector<BuiltinMember>& builtin_members() {
  static const std::vector<BuiltinMember> members = {
      {"plus", "builtin.plus"},           {"minus", "builtin.minus"},
      {"times", "builtin.times"},         {"divide", "builtin.divide"},
      {"power", "builtin.power"},         {"compare", "builtin.compare"},
      {"abs", "builtin.abs"},             {"equality", "builtin.equality"},
      {"connectives", "builtin.connectives"}, {"membership", "builtin.membership"},
      {"cardinality", "builtin.cardinality"}, {"union", "builtin.union"},
      {"intersection", "builtin.intersection"}, {"length", "builtin.length"},
      {"tuple_index", "builtin.tuple_index"},
  };
  return members;
}

const std::vector<BuiltinGroup>& builtin_groups() {
  static const std::vector<BuiltinGroup> groups = {
      {"arithmetic", {"plus", "minus", "times", "divide", "power", "compare", "abs", "equality"}},
      {"logic", {"connectives", "equality"}},
      {"sets", {"membership", "cardinality", "union", "intersection", "equality"}},
      {"tuples", {"length", "tuple_index", "equality"}},
  };
  return groups;
}

bool is_builtin_id(const std::string& id) {
  const auto& m = builtin_members();
  const auto& g = builtin_groups();
  return std::any_of(m.begin(), m.end(), [&](const auto& x) { return x.id == id; }) ||
         std::any_of(g.begin(), g.end(), [&](const auto& x) { return x.id == id; });
}

std::set<std::string> expand_builtins(const std::set<std::string>& ids) {
  std::set<std::string> out;
  for (const auto& id : ids) {
    bool known = false;
    for (const auto& g : builtin_groups()) {
      if (g.id == id) {
        out.insert(g.members.begin(), g.members.end());
        known = true;
      }
    }
    for (const auto& m : builtin_members()) {
      if (m.id == id) {
        out.insert(id);
        known = true;
      }
    }
    if (!known) throw std::invalid_argument("unknown built-in '" + id + "'");
  }
  return out;
}

std::set<std::string> all_builtins() {
  std::set<std::string> out;
  for (const auto& m : builtin_members()) out.insert(m.id);
  return out;
}

namespace {

using i128 = __int128;

struct Q {
  i128 num;
  i128 den;
};

std::optional<Q> number(const Formula& f) {
  if (f.is(Kind::Integer)) return Q{f.value(), 1};
  if (f.is(Kind::Rational)) return Q{f.numerator(), f.denominator()};
  return std::nullopt;
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr i128 kLimit = static_cast<i128>(INT64_MAX);

// Normalizes and converts back to a literal; nullopt when it does not fit in 64 bits.
std::optional<Formula> literal(Q q) {
  if (q.den < 0) {
    q.num = -q.num;
    q.den = -q.den;
  }
  i128 g = gcd128(q.num, q.den);
  if (g > 1) {
    q.num /= g;
    q.den /= g;
  }
  if (q.num > kLimit || q.num < -kLimit || q.den > kLimit) return std::nullopt;
  return rational(static_cast<std::int64_t>(q.num), static_cast<std::int64_t>(q.den));
}

// Products of two values below 2^63 fit in i128; anything larger than 2^63 is rejected by literal().
std::optional<Formula> add(Q a, Q b, bool subtract) {
  i128 n = a.num * b.den + (subtract ? -1 : 1) * b.num * a.den;
  return literal(Q{n, a.den * b.den});
}

int compare(Q a, Q b) {
  i128 l = a.num * b.den;
  i128 r = b.num * a.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

bool is_ground_literal(const Formula& f) {
  switch (f.kind()) {
    case Kind::Integer:
    case Kind::Rational:
    case Kind::True:
    case Kind::False:
      return true;
    case Kind::Set:
    case Kind::Tuple:
      return std::all_of(f.args().begin(), f.args().end(), is_ground_literal);
    default:
      return false;
  }
}

// Equality of ground literal values: sets compare as sets, tuples elementwise.
bool literal_equal(const Formula& a, const Formula& b) {
  auto na = number(a), nb = number(b);
  if (na && nb) return compare(*na, *nb) == 0;
  if (a.kind() != b.kind()) return false;
  if (a.is(Kind::Tuple)) {
    if (a.args().size() != b.args().size()) return false;
    for (std::size_t i = 0; i < a.args().size(); ++i) {
      if (!literal_equal(a.arg(i), b.arg(i))) return false;
    }
    return true;
  }
  if (a.is(Kind::Set)) {
    auto contains = [](const Formula& s, const Formula& x) {
      return std::any_of(s.args().begin(), s.args().end(), [&](const Formula& e) { return literal_equal(e, x); });
    };
    return std::all_of(a.args().begin(), a.args().end(), [&](const Formula& x) { return contains(b, x); }) &&
           std::all_of(b.args().begin(), b.args().end(), [&](const Formula& x) { return contains(a, x); });
  }
  return a == b;  // True/False
}

std::vector<Formula> distinct_literals(std::span<const Formula> elems) {
  std::vector<Formula> out;
  for (const auto& e : elems) {
    if (std::none_of(out.begin(), out.end(), [&](const Formula& o) { return literal_equal(o, e); })) out.push_back(e);
  }
  return out;
}

Formula negate_simple(const Formula& f) {
  if (f.is(Kind::True)) return falsity();
  if (f.is(Kind::False)) return truth();
  if (f.is(Kind::Not)) return f.arg(0);
  return negation(f);
}

class Simplifier {
 public:
  Simplifier(const std::set<std::string>& active, std::vector<BuiltinNote>* notes) : on_(active), notes_(notes) {}

  Formula run(const Formula& f) {
    Formula cur = f;
    for (int guard = 0; guard < 1000; ++guard) {
      Formula next = pass(cur);
      if (next == cur) return cur;
      cur = next;
    }
    return cur;
  }

 private:
  bool on(const char* m) const { return on_.count(m) > 0; }

  void note(const char* member, std::string detail) {
    if (notes_) notes_->push_back({member, std::move(detail)});
  }

  Formula pass(const Formula& f) {
    if (is_quantifier(f.kind())) {
      Binder b = f.binder();
      if (b.condition) b.condition = pass(*b.condition);
      if (b.range) b.range = Range{pass(b.range->lo), pass(b.range->hi)};
      return quantifier(f.kind(), std::move(b), pass(f.body()));
    }
    const auto& ch = children_of(f);
    if (ch.empty()) return f;
    std::vector<Formula> out;
    out.reserve(ch.size());
    for (const auto& c : ch) out.push_back(pass(c));
    Formula g = with_children(f, std::move(out));
    return node(g);
  }

  Formula node(const Formula& f) {
    switch (f.kind()) {
      case Kind::App: return app(f);
      case Kind::Length: return length(f);
      case Kind::Index: return index(f);
      case Kind::Not:
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff:
        return on("connectives") ? connective(f) : f;
      case Kind::Eq:
      case Kind::Neq:
      case Kind::Lt:
      case Kind::Le:
      case Kind::Gt:
      case Kind::Ge:
        return relation_node(f);
      case Kind::In: return membership(f);
      default: return f;
    }
  }

  Formula app(const Formula& f) {
    const Formula& h = f.head();
    if (!h.is(Kind::Const)) return f;
    const std::string& op = h.name();
    const auto args = f.args();
    std::vector<Q> nums;
    for (const auto& a : args) {
      auto q = number(a);
      if (!q) {
        nums.clear();
        break;
      }
      nums.push_back(*q);
    }
    const bool all_numbers = !args.empty() && nums.size() == args.size();
    if (all_numbers) {
      if (op == "plus" && on("plus")) {
        Q acc{0, 1};
        for (const auto& q : nums) {
          auto s = add(acc, q, false);
          if (!s) return f;
          acc = *number(*s);
        }
        return *literal(acc);
      }
      if (op == "minus" && on("minus")) {
        if (nums.size() == 1) return literal(Q{-nums[0].num, nums[0].den}).value_or(f);
        if (nums.size() == 2) return add(nums[0], nums[1], true).value_or(f);
      }
      if (op == "times" && on("times")) {
        Q acc{1, 1};
        for (const auto& q : nums) {
          auto p = literal(Q{acc.num * q.num, acc.den * q.den});
          if (!p) return f;
          acc = *number(*p);
        }
        return *literal(acc);
      }
      if (op == "divide" && on("divide") && nums.size() == 2) {
        if (nums[1].num == 0) {
          note("divide", "division by zero left unevaluated");
          return f;
        }
        return literal(Q{nums[0].num * nums[1].den, nums[0].den * nums[1].num}).value_or(f);
      }
      if (op == "power" && on("power") && nums.size() == 2 && nums[1].den == 1) {
        i128 e = nums[1].num;
        Q base = nums[0];
        if (e < 0) {
          if (base.num == 0) {
            note("power", "zero to a negative power left unevaluated");
            return f;
          }
          base = Q{base.den, base.num};
          e = -e;
        }
        if (e > 64) return f;
        Q acc{1, 1};
        for (i128 i = 0; i < e; ++i) {
          auto p = literal(Q{acc.num * base.num, acc.den * base.den});
          if (!p) return f;
          acc = *number(*p);
        }
        return *literal(acc);
      }
    }
    const bool sets = args.size() == 2 && args[0].is(Kind::Set) && args[1].is(Kind::Set) && is_ground_literal(args[0]) &&
                      is_ground_literal(args[1]);
    if (sets && op == "union" && on("union")) {
      std::vector<Formula> all(args[0].args().begin(), args[0].args().end());
      all.insert(all.end(), args[1].args().begin(), args[1].args().end());
      return set_of(distinct_literals(all));
    }
    if (sets && op == "intersection" && on("intersection")) {
      std::vector<Formula> out;
      for (const auto& x : args[0].args()) {
        if (std::any_of(args[1].args().begin(), args[1].args().end(), [&](const Formula& y) { return literal_equal(x, y); }))
          out.push_back(x);
      }
      return set_of(distinct_literals(out));
    }
    return f;
  }

  Formula length(const Formula& f) {
    const Formula& a = f.arg(0);
    if (a.is(Kind::Tuple) && on("length")) return integer(static_cast<std::int64_t>(a.args().size()));
    if (a.is(Kind::Set) && on("cardinality") && is_ground_literal(a)) {
      return integer(static_cast<std::int64_t>(distinct_literals(a.args()).size()));
    }
    if (auto q = number(a); q && on("abs")) return literal(Q{q->num < 0 ? -q->num : q->num, q->den}).value_or(f);
    return f;
  }

  Formula index(const Formula& f) {
    if (!on("tuple_index") || !f.lhs().is(Kind::Tuple) || !f.rhs().is(Kind::Integer)) return f;
    const auto i = f.rhs().value();
    const auto n = static_cast<std::int64_t>(f.lhs().args().size());
    if (i < 1 || i > n) {
      note("tuple_index", "index out of range left unevaluated");
      return f;
    }
    return f.lhs().arg(static_cast<std::size_t>(i - 1));
  }

  Formula membership(const Formula& f) {
    if (!on("membership") || !f.rhs().is(Kind::Set)) return f;
    const auto elems = f.rhs().args();
    for (const auto& e : elems) {
      if (alpha_equal(e, f.lhs())) return truth();
    }
    if (elems.empty()) return falsity();
    if (is_ground_literal(f.lhs()) && is_ground_literal(f.rhs())) {
      const bool found =
          std::any_of(elems.begin(), elems.end(), [&](const Formula& e) { return literal_equal(e, f.lhs()); });
      return found ? truth() : falsity();
    }
    return f;
  }

  Formula relation_node(const Formula& f) {
    const Formula &a = f.lhs(), &b = f.rhs();
    if (f.is(Kind::Eq) || f.is(Kind::Neq)) {
      if (!on("equality")) return f;
      const bool eq = f.is(Kind::Eq);
      if (alpha_equal(a, b)) return eq ? truth() : falsity();
      if (is_ground_literal(a) && is_ground_literal(b)) return literal_equal(a, b) == eq ? truth() : falsity();
      return f;
    }
    auto qa = number(a), qb = number(b);
    if (!qa || !qb || !on("compare")) return f;
    const int c = compare(*qa, *qb);
    bool r = false;
    switch (f.kind()) {
      case Kind::Lt: r = c < 0; break;
      case Kind::Le: r = c <= 0; break;
      case Kind::Gt: r = c > 0; break;
      case Kind::Ge: r = c >= 0; break;
      default: break;
    }
    return r ? truth() : falsity();
  }

  Formula connective(const Formula& f) {
    switch (f.kind()) {
      case Kind::Not: {
        const Formula& a = f.arg(0);
        if (a.is(Kind::True) || a.is(Kind::False) || a.is(Kind::Not)) return negate_simple(a);
        return f;
      }
      case Kind::And:
      case Kind::Or: {
        const bool is_and = f.is(Kind::And);
        const Kind absorbing = is_and ? Kind::False : Kind::True;
        const Kind neutral = is_and ? Kind::True : Kind::False;
        std::vector<Formula> keep;
        for (const auto& c : f.args()) {
          if (c.is(absorbing)) return c;
          if (!c.is(neutral)) keep.push_back(c);
        }
        if (keep.size() == f.args().size()) return f;
        return is_and ? conjunction(std::move(keep)) : disjunction(std::move(keep));
      }
      case Kind::Implies: {
        const Formula &l = f.lhs(), &r = f.rhs();
        if (l.is(Kind::True)) return r;
        if (l.is(Kind::False) || r.is(Kind::True)) return truth();
        if (r.is(Kind::False)) return negate_simple(l);
        return f;
      }
      case Kind::Iff: {
        const Formula &l = f.lhs(), &r = f.rhs();
        if (l.is(Kind::True)) return r;
        if (r.is(Kind::True)) return l;
        if (l.is(Kind::False)) return negate_simple(r);
        if (r.is(Kind::False)) return negate_simple(l);
        if (alpha_equal(l, r)) return truth();
        return f;
      }
      default: return f;
    }
  }

  std::set<std::string> on_;
  std::vector<BuiltinNote>* notes_;
};

}  // namespace

Formula builtin_simplify(const Formula& f, const std::set<std::string>& active, std::vector<BuiltinNote>* notes) {
  if (active.empty()) return f;
  return Simplifier(expand_builtins(active), notes).run(f);
}

}  // namespace tma
