// Truth-table oracle for propositional formulas over constant atoms.
#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tma/formula.hpp"

namespace tma::testing {

inline bool propositional(const Formula& f) {
  switch (f.kind()) {
    case Kind::Const:
    case Kind::True:
    case Kind::False:
      return true;
    case Kind::Not:
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
      return std::all_of(f.args().begin(), f.args().end(), propositional);
    default:
      return false;
  }
}

inline bool eval(const Formula& f, const std::map<std::string, bool>& v) {
  switch (f.kind()) {
    case Kind::Const: return v.at(f.name());
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Not: return !eval(f.arg(0), v);
    case Kind::And:
      for (const auto& a : f.args()) {
        if (!eval(a, v)) return false;
      }
      return true;
    case Kind::Or:
      for (const auto& a : f.args()) {
        if (eval(a, v)) return true;
      }
      return false;
    case Kind::Implies: return !eval(f.lhs(), v) || eval(f.rhs(), v);
    case Kind::Iff: return eval(f.lhs(), v) == eval(f.rhs(), v);
    default: throw std::logic_error("not propositional");
  }
}

inline std::vector<std::string> atoms(const Formula& goal, const std::vector<Formula>& kb) {
  NameSet all = symbols(goal);
  for (const auto& k : kb) {
    auto s = symbols(k);
    all.insert(s.begin(), s.end());
  }
  return {all.begin(), all.end()};
}

/// Whether the conjunction of `kb` implies `goal` under every valuation. At most four atoms.
inline bool tautology(const Formula& goal, const std::vector<Formula>& kb) {
  const auto names = atoms(goal, kb);
  if (names.size() > 4) throw std::logic_error("more than four atoms");
  for (unsigned mask = 0; mask < (1u << names.size()); ++mask) {
    std::map<std::string, bool> v;
    for (std::size_t i = 0; i < names.size(); ++i) v[names[i]] = (mask >> i) & 1u;
    const bool premises = std::all_of(kb.begin(), kb.end(), [&](const Formula& k) { return eval(k, v); });
    if (premises && !eval(goal, v)) return false;
  }
  return true;
}

}  // namespace tma::testing
