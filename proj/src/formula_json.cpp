#include "tma/formula_json.hpp"

#include <array>

#include "tma/errors.hpp"

namespace tma {

using nlohmann::json;

namespace {

constexpr std::array kAllKinds = {
    Kind::Const, Kind::Var,   Kind::Integer, Kind::Rational, Kind::App,   Kind::Index,  Kind::Set,
    Kind::Tuple, Kind::Length, Kind::Not,    Kind::And,      Kind::Or,    Kind::Implies, Kind::Iff,
    Kind::DefIff, Kind::DefEq, Kind::Eq,     Kind::Neq,      Kind::Le,    Kind::Lt,     Kind::Ge,
    Kind::Gt,    Kind::In,    Kind::Forall,  Kind::Exists,   Kind::True,  Kind::False,
};

std::string tag(Kind k) {
  if (k == Kind::Integer) return "Int";
  if (k == Kind::Rational) return "Rat";
  return kind_name(k);
}

Kind kind_from_tag(const std::string& t) {
  for (Kind k : kAllKinds) {
    if (tag(k) == t) return k;
  }
  throw FormatError("unknown formula tag '" + t + "'");
}

[[noreturn]] void bad(const std::string& why) { throw FormatError("malformed formula: " + why); }

}  // namespace

json to_json(const Formula& f) {
  json out = json::array({tag(f.kind())});
  switch (f.kind()) {
    case Kind::Const:
    case Kind::Var:
      out.push_back(f.name());
      return out;
    case Kind::Integer:
      out.push_back(f.value());
      return out;
    case Kind::Rational:
      out.push_back(f.numerator());
      out.push_back(f.denominator());
      return out;
    case Kind::Forall:
    case Kind::Exists: {
      const Binder& b = f.binder();
      json jb = {{"vars", b.vars}};
      if (b.condition) jb["cond"] = to_json(*b.condition);
      if (b.range) jb["range"] = json::array({to_json(b.range->lo), to_json(b.range->hi)});
      out.push_back(std::move(jb));
      out.push_back(to_json(f.body()));
      return out;
    }
    default:
      for (const auto& c : children_of(f)) out.push_back(to_json(c));
      return out;
  }
}

Formula formula_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_string()) bad("expected a tagged array");
  const Kind k = kind_from_tag(j[0].get<std::string>());
  auto arity = [&](std::size_t n) {
    if (j.size() != n + 1) bad(std::string(kind_name(k)) + " expects " + std::to_string(n) + " operands");
  };
  std::vector<Formula> rest;
  auto operands = [&](std::size_t from) {
    for (std::size_t i = from; i < j.size(); ++i) rest.push_back(formula_from_json(j[i]));
  };
  switch (k) {
    case Kind::Const:
    case Kind::Var:
      arity(1);
      if (!j[1].is_string()) bad("symbol name must be a string");
      return k == Kind::Const ? constant(j[1].get<std::string>()) : variable(j[1].get<std::string>());
    case Kind::Integer:
      arity(1);
      if (!j[1].is_number_integer()) bad("integer expected");
      return integer(j[1].get<std::int64_t>());
    case Kind::Rational: {
      arity(2);
      if (!j[1].is_number_integer() || !j[2].is_number_integer() || j[2].get<std::int64_t>() == 0) bad("bad rational");
      return rational(j[1].get<std::int64_t>(), j[2].get<std::int64_t>());
    }
    case Kind::True:
      arity(0);
      return truth();
    case Kind::False:
      arity(0);
      return falsity();
    case Kind::Forall:
    case Kind::Exists: {
      arity(2);
      const json& jb = j[1];
      if (!jb.is_object() || !jb.contains("vars") || !jb["vars"].is_array() || jb["vars"].empty()) bad("bad binder");
      Binder b;
      for (const auto& v : jb["vars"]) {
        if (!v.is_string()) bad("binder variable must be a string");
        b.vars.push_back(v.get<std::string>());
      }
      if (jb.contains("cond")) b.condition = formula_from_json(jb["cond"]);
      if (jb.contains("range")) {
        if (!jb["range"].is_array() || jb["range"].size() != 2 || b.vars.size() != 1) bad("bad range");
        b.range = Range{formula_from_json(jb["range"][0]), formula_from_json(jb["range"][1])};
      }
      return quantifier(k, std::move(b), formula_from_json(j[2]));
    }
    case Kind::App:
      if (j.size() < 2) bad("application without head");
      operands(1);
      return apply(rest.front(), std::vector<Formula>(rest.begin() + 1, rest.end()));
    case Kind::Index:
      arity(2);
      operands(1);
      return index_of(rest[0], rest[1]);
    case Kind::Length:
    case Kind::Not:
      arity(1);
      operands(1);
      return k == Kind::Length ? length_of(rest[0]) : negation(rest[0]);
    case Kind::Set:
    case Kind::Tuple:
      operands(1);
      return k == Kind::Set ? set_of(std::move(rest)) : tuple_of(std::move(rest));
    case Kind::And:
    case Kind::Or:
      if (j.size() < 3) bad("junction needs at least two operands");
      operands(1);
      return k == Kind::And ? conjunction(std::move(rest)) : disjunction(std::move(rest));
    default:
      arity(2);
      operands(1);
      return binary(k, rest[0], rest[1]);
  }
}

}  // namespace tma
