// The baseline inference rules and one-sided matching.
#include <algorithm>

#include "tma/builtins.hpp"
#include "tma/prover.hpp"
#include "tma/syntax.hpp"

namespace tma {

namespace {

std::string show(const Formula& f) { return format(f, Style::Unicode); }

Formula negate(const Formula& f) { return f.is(Kind::Not) ? f.arg(0) : negation(f); }

bool holds(const ProofSituation& s, const Formula& f) {
  return std::any_of(s.assumptions.begin(), s.assumptions.end(),
                     [&](const Assumption& a) { return alpha_equal(a.formula, f); });
}

// A formula follows directly from the assumptions: present, or a conjunction of present ones.
bool available(const ProofSituation& s, const Formula& f) {
  if (holds(s, f)) return true;
  if (f.is(Kind::And)) {
    return std::all_of(f.args().begin(), f.args().end(), [&](const Formula& c) { return holds(s, c); });
  }
  return false;
}

const Assumption* find_assumption(const ProofSituation& s, const Formula& f) {
  for (const auto& a : s.assumptions) {
    if (alpha_equal(a.formula, f)) return &a;
  }
  return nullptr;
}

bool is_definition(const Formula& f) {
  Formula g = f;
  while (g.is(Kind::Forall)) g = g.body();
  return g.is(Kind::DefIff) || g.is(Kind::DefEq);
}

void constant_names(const Formula& f, NameSet& out) {
  if (f.is(Kind::Const)) out.insert(f.name());
  if (is_quantifier(f.kind())) {
    if (f.binder().condition) constant_names(*f.binder().condition, out);
    if (f.binder().range) {
      constant_names(f.binder().range->lo, out);
      constant_names(f.binder().range->hi, out);
    }
  }
  for (const auto& c : children_of(f)) constant_names(c, out);
}

// Names a fresh constant must avoid. Bound variable names are free to reuse.
NameSet situation_symbols(const ProofSituation& s) {
  NameSet used;
  constant_names(s.goal, used);
  for (const auto& a : s.assumptions) constant_names(a.formula, used);
  used.insert(s.constants.begin(), s.constants.end());
  return used;
}

ProofSituation next(const ProofSituation& s) {
  ProofSituation n = s;
  n.depth = s.depth + 1;
  return n;
}

// Atomic subformulas reached through connectives. Quantified parts are skipped unless
// `into_quantifiers` is set (pattern side).
void atoms(const Formula& f, bool into_quantifiers, std::vector<Formula>& out) {
  switch (f.kind()) {
    case Kind::Not:
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
    case Kind::DefIff:
      for (const auto& c : f.args()) atoms(c, into_quantifiers, out);
      return;
    case Kind::True:
    case Kind::False:
      return;
    case Kind::Forall:
    case Kind::Exists:
      if (into_quantifiers) {
        if (f.binder().condition) atoms(*f.binder().condition, true, out);
        atoms(f.body(), true, out);
      }
      return;
    default:
      if (std::none_of(out.begin(), out.end(), [&](const Formula& o) { return o == f; })) out.push_back(f);
  }
}

void bound_names(const Formula& f, NameSet& out) {
  if (is_quantifier(f.kind())) {
    out.insert(f.binder().vars.begin(), f.binder().vars.end());
    if (f.binder().condition) bound_names(*f.binder().condition, out);
    bound_names(f.body(), out);
    return;
  }
  for (const auto& c : children_of(f)) bound_names(c, out);
}

// Ground terms usable as witnesses, in order of first occurrence.
void ground_terms(const Formula& f, std::vector<Formula>& out) {
  auto add = [&](const Formula& t) {
    if (std::none_of(out.begin(), out.end(), [&](const Formula& o) { return o == t; })) out.push_back(t);
  };
  switch (f.kind()) {
    case Kind::Const:
    case Kind::Integer:
      add(f);
      return;
    case Kind::App:
      for (const auto& a : f.args()) ground_terms(a, out);
      return;
    case Kind::Forall:
    case Kind::Exists:
      if (f.binder().condition) ground_terms(*f.binder().condition, out);
      if (f.binder().range) {
        ground_terms(f.binder().range->lo, out);
        ground_terms(f.binder().range->hi, out);
      }
      ground_terms(f.body(), out);
      return;
    default:
      for (const auto& c : children_of(f)) ground_terms(c, out);
  }
}

// Condition attached by a binder to an instance: range bounds and the condition.
Formula instance_condition(const Binder& b, const Substitution& sigma) {
  std::vector<Formula> parts;
  if (b.range) {
    const Formula& v = sigma.at(b.vars.front());
    parts.push_back(relation(Kind::Le, substitute(b.range->lo, sigma), v));
    parts.push_back(relation(Kind::Le, v, substitute(b.range->hi, sigma)));
  }
  if (b.condition) parts.push_back(substitute(*b.condition, sigma));
  return conjunction(std::move(parts));
}

// Cartesian product of per-variable candidates, capped.
std::vector<Substitution> combinations(const std::vector<std::string>& vars,
                                       const std::map<std::string, std::vector<Formula>>& cands, std::size_t cap) {
  std::vector<Substitution> out{{}};
  for (const auto& v : vars) {
    auto it = cands.find(v);
    if (it == cands.end() || it->second.empty()) return {};
    std::vector<Substitution> grown;
    for (const auto& partial : out) {
      for (const auto& c : it->second) {
        if (grown.size() >= cap) break;
        Substitution s = partial;
        s.emplace(v, c);
        grown.push_back(std::move(s));
      }
    }
    out = std::move(grown);
  }
  return out;
}

nlohmann::json labels_json(const std::vector<std::string>& labels) { return nlohmann::json(labels); }

// ---------------------------------------------------------------- termination

std::vector<RuleApplication> goal_true(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::True)) return {};
  return {RuleApplication{"goal-true", {}, {{"goal", show(s.goal)}}}};
}

std::vector<RuleApplication> goal_in_kb(const ProofSituation& s, const RuleContext&) {
  const Assumption* a = find_assumption(s, s.goal);
  if (!a) return {};
  return {RuleApplication{"goal-in-kb", {}, {{"goal", show(s.goal)}, {"label", a->label}, {"refs", labels_json({a->label})}}}};
}

std::vector<RuleApplication> kb_contradiction(const ProofSituation& s, const RuleContext&) {
  for (const auto& a : s.assumptions) {
    if (a.formula.is(Kind::False)) {
      return {RuleApplication{"kb-contradiction", {}, {{"label", a.label}, {"label2", a.label}, {"assumption", show(a.formula)},
                                                       {"refs", labels_json({a.label})}}}};
    }
  }
  for (std::size_t i = 0; i < s.assumptions.size(); ++i) {
    for (std::size_t j = 0; j < s.assumptions.size(); ++j) {
      const auto &a = s.assumptions[i], &b = s.assumptions[j];
      if (b.formula.is(Kind::Not) && alpha_equal(b.formula.arg(0), a.formula)) {
        return {RuleApplication{"kb-contradiction", {}, {{"label", a.label}, {"label2", b.label}, {"assumption", show(a.formula)},
                                                         {"refs", labels_json({a.label, b.label})}}}};
      }
    }
  }
  return {};
}

// ---------------------------------------------------------------- connectives

std::vector<RuleApplication> impl_goal_direct(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::Implies)) return {};
  ProofSituation n = next(s);
  n.goal = s.goal.rhs();
  const std::string label = n.assume(s.goal.lhs()).label;
  return {RuleApplication{"impl-goal-direct", {n},
                          {{"goal", show(s.goal)}, {"assumption", show(s.goal.lhs())}, {"label", label}, {"new_goal", show(n.goal)}}}};
}

std::vector<RuleApplication> impl_goal_contrapose(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::Implies)) return {};
  ProofSituation n = next(s);
  n.goal = negate(s.goal.lhs());
  const Formula assumed = negate(s.goal.rhs());
  const std::string label = n.assume(assumed).label;
  return {RuleApplication{"impl-goal-contrapose", {n},
                          {{"goal", show(s.goal)}, {"assumption", show(assumed)}, {"label", label}, {"new_goal", show(n.goal)}}}};
}

std::vector<RuleApplication> and_goal_split(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::And)) return {};
  RuleApplication app{"and-goal-split", {}, {{"goal", show(s.goal)}, {"count", s.goal.args().size()}}};
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& c : s.goal.args()) {
    ProofSituation n = next(s);
    n.goal = c;
    parts.push_back(show(c));
    app.produced.push_back(std::move(n));
  }
  app.payload["parts"] = parts;
  return {app};
}

std::vector<RuleApplication> and_kb_split(const ProofSituation& s, const RuleContext&) {
  for (std::size_t i = 0; i < s.assumptions.size(); ++i) {
    const Assumption& a = s.assumptions[i];
    if (!a.formula.is(Kind::And)) continue;
    ProofSituation n = next(s);
    n.assumptions.erase(n.assumptions.begin() + static_cast<std::ptrdiff_t>(i));
    std::vector<std::string> labels;
    for (const auto& c : a.formula.args()) {
      if (holds(n, c)) continue;
      labels.push_back(n.assume(c).label);
    }
    return {RuleApplication{"and-kb-split", {n},
                            {{"label", a.label}, {"assumption", show(a.formula)}, {"labels", labels},
                             {"refs", labels_json({a.label})}}}};
  }
  return {};
}

std::vector<RuleApplication> iff_goal_split(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::Iff) && !s.goal.is(Kind::DefIff)) return {};
  ProofSituation l = next(s), r = next(s);
  l.goal = implication(s.goal.lhs(), s.goal.rhs());
  r.goal = implication(s.goal.rhs(), s.goal.lhs());
  return {RuleApplication{"iff-goal-split", {l, r}, {{"goal", show(s.goal)}, {"new_goal", show(l.goal)}, {"new_goal2", show(r.goal)}}}};
}

std::vector<RuleApplication> or_goal(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::Or)) return {};
  ProofSituation n = next(s);
  const auto ds = s.goal.args();
  std::vector<std::string> labels;
  nlohmann::json assumed = nlohmann::json::array();
  for (std::size_t i = 0; i + 1 < ds.size(); ++i) {
    Formula neg = negate(ds[i]);
    assumed.push_back(show(neg));
    labels.push_back(n.assume(neg).label);
  }
  n.goal = ds.back();
  return {RuleApplication{"or-goal", {n},
                          {{"goal", show(s.goal)}, {"assumption", assumed.size() == 1 ? assumed[0] : nlohmann::json(assumed)},
                           {"labels", labels}, {"new_goal", show(n.goal)}}}};
}

std::vector<RuleApplication> not_goal(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::Not)) return {};
  ProofSituation n = next(s);
  n.goal = falsity();
  const std::string label = n.assume(s.goal.arg(0)).label;
  return {RuleApplication{"not-goal", {n},
                          {{"goal", show(s.goal)}, {"assumption", show(s.goal.arg(0))}, {"label", label}, {"new_goal", show(n.goal)}}}};
}

// ---------------------------------------------------------------- quantifiers

std::vector<RuleApplication> forall_goal_intro(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::Forall)) return {};
  const Binder& b = s.goal.binder();
  if (b.range && b.range->lo.is(Kind::Integer) && b.range->hi.is(Kind::Integer)) {
    const auto lo = b.range->lo.value(), hi = b.range->hi.value();
    if (hi - lo <= 8) {
      RuleApplication app{"forall-goal-intro", {}, {{"goal", show(s.goal)}, {"variable", b.vars.front()}, {"cases", nlohmann::json::array()}}};
      for (auto v = lo; v <= hi; ++v) {
        Substitution sigma{{b.vars.front(), integer(v)}};
        ProofSituation n = next(s);
        n.goal = b.condition ? implication(substitute(*b.condition, sigma), substitute(s.goal.body(), sigma))
                             : substitute(s.goal.body(), sigma);
        app.payload["cases"].push_back(v);
        app.produced.push_back(std::move(n));
      }
      return {app};
    }
  }
  ProofSituation n = next(s);
  NameSet used = situation_symbols(s);
  Substitution sigma;
  std::vector<std::string> names;
  for (const auto& v : b.vars) {
    std::string c = fresh_name(v, used, true);
    used.insert(c);
    n.constants.insert(c);
    names.push_back(c);
    sigma.emplace(v, constant(c));
  }
  std::vector<std::string> labels;
  nlohmann::json assumed = nlohmann::json::array();
  auto add = [&](Formula f) {
    assumed.push_back(show(f));
    labels.push_back(n.assume(std::move(f)).label);
  };
  if (b.range) {
    const Formula& c = sigma.at(b.vars.front());
    add(relation(Kind::Le, substitute(b.range->lo, sigma), c));
    add(relation(Kind::Le, c, substitute(b.range->hi, sigma)));
    add(apply("isInteger", {c}));
  }
  if (b.condition) add(substitute(*b.condition, sigma));
  n.goal = substitute(s.goal.body(), sigma);
  nlohmann::json payload = {{"goal", show(s.goal)}, {"constants", names}, {"new_goal", show(n.goal)}, {"labels", labels}};
  if (!assumed.empty()) payload["assumption"] = assumed.size() == 1 ? assumed[0] : nlohmann::json(assumed);
  return {RuleApplication{"forall-goal-intro", {n}, payload}};
}

std::vector<RuleApplication> exists_goal_instantiate(const ProofSituation& s, const RuleContext&) {
  if (!s.goal.is(Kind::Exists)) return {};
  const Binder& b = s.goal.binder();
  std::vector<Formula> terms;
  ground_terms(s.goal, terms);
  for (const auto& a : s.assumptions) ground_terms(a.formula, terms);
  for (const auto& c : s.constants) {
    if (std::none_of(terms.begin(), terms.end(), [&](const Formula& t) { return t == constant(c); })) terms.push_back(constant(c));
  }
  if (terms.size() > 8) terms.resize(8);
  std::map<std::string, std::vector<Formula>> cands;
  for (const auto& v : b.vars) cands[v] = terms;
  std::vector<RuleApplication> out;
  for (const auto& sigma : combinations(b.vars, cands, 8)) {
    ProofSituation n = next(s);
    n.goal = conjunction({instance_condition(b, sigma), substitute(s.goal.body(), sigma)});
    nlohmann::json witnesses = nlohmann::json::array();
    for (const auto& v : b.vars) witnesses.push_back(show(sigma.at(v)));
    out.push_back(RuleApplication{"exists-goal-instantiate", {n},
                                  {{"goal", show(s.goal)}, {"term", witnesses.size() == 1 ? witnesses[0] : witnesses},
                                   {"new_goal", show(n.goal)}}});
  }
  return out;
}

std::vector<RuleApplication> forall_kb_instantiate(const ProofSituation& s, const RuleContext&) {
  std::vector<Formula> targets;
  atoms(s.goal, false, targets);
  for (const auto& a : s.assumptions) atoms(a.formula, false, targets);

  ProofSituation n = next(s);
  std::vector<std::string> from, labels;
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& a : s.assumptions) {
    if (!a.formula.is(Kind::Forall) || is_definition(a.formula)) continue;
    const Binder& b = a.formula.binder();
    std::vector<Formula> patterns;
    if (b.condition) atoms(*b.condition, true, patterns);
    atoms(a.formula.body(), true, patterns);
    NameSet vars(b.vars.begin(), b.vars.end());
    NameSet wild = vars;
    bound_names(a.formula.body(), wild);
    std::map<std::string, std::vector<Formula>> cands;
    for (const auto& p : patterns) {
      for (const auto& t : targets) {
        Substitution sigma;
        if (!match(p, t, wild, sigma)) continue;
        for (const auto& v : b.vars) {
          auto it = sigma.find(v);
          if (it == sigma.end()) continue;
          auto& list = cands[v];
          if (std::none_of(list.begin(), list.end(), [&](const Formula& x) { return alpha_equal(x, it->second); }))
            list.push_back(it->second);
        }
      }
    }
    bool used = false;
    for (const auto& sigma : combinations(b.vars, cands, 16)) {
      Formula cond = instance_condition(b, sigma);
      Formula body = substitute(a.formula.body(), sigma);
      Formula inst = cond.is(Kind::True) ? body : implication(cond, body);
      if (holds(n, inst)) continue;
      instances.push_back(show(inst));
      labels.push_back(n.assume(inst).label);
      used = true;
    }
    if (used) from.push_back(a.label);
  }
  if (labels.empty()) return {};
  return {RuleApplication{"forall-kb-instantiate", {n},
                          {{"label", from.front()}, {"refs", labels_json(from)}, {"labels", labels},
                           {"instances", instances}, {"instance", instances[0]}}}};
}

// ---------------------------------------------------------------- knowledge

std::vector<RuleApplication> modus_ponens(const ProofSituation& s, const RuleContext&) {
  std::vector<RuleApplication> out;
  ProofSituation n = next(s);
  std::vector<std::string> used, labels;
  nlohmann::json facts = nlohmann::json::array();
  auto derive = [&](const Assumption& via, const Formula& fact) {
    if (holds(n, fact)) return;
    facts.push_back(show(fact));
    labels.push_back(n.assume(fact).label);
    if (std::find(used.begin(), used.end(), via.label) == used.end()) used.push_back(via.label);
  };
  for (const auto& a : s.assumptions) {
    const Formula& f = a.formula;
    if (f.is(Kind::Implies) && available(s, f.lhs())) derive(a, f.rhs());
    if (f.is(Kind::Iff) || f.is(Kind::DefIff)) {
      if (available(s, f.lhs())) derive(a, f.rhs());
      if (available(s, f.rhs())) derive(a, f.lhs());
    }
  }
  if (!labels.empty()) {
    out.push_back(RuleApplication{"modus-ponens", {n},
                                  {{"direction", "forward"}, {"label", used.front()}, {"refs", labels_json(used)},
                                   {"labels", labels}, {"facts", facts}, {"fact", facts[0]}}});
  }
  for (const auto& a : s.assumptions) {
    const Formula& f = a.formula;
    std::vector<Formula> premises;
    if (f.is(Kind::Implies) && alpha_equal(f.rhs(), s.goal)) premises.push_back(f.lhs());
    if (f.is(Kind::Iff) || f.is(Kind::DefIff)) {
      if (alpha_equal(f.rhs(), s.goal)) premises.push_back(f.lhs());
      if (alpha_equal(f.lhs(), s.goal)) premises.push_back(f.rhs());
    }
    for (const auto& p : premises) {
      ProofSituation b = next(s);
      b.goal = p;
      out.push_back(RuleApplication{"modus-ponens", {b},
                                    {{"direction", "backward"}, {"goal", show(s.goal)}, {"label", a.label},
                                     {"refs", labels_json({a.label})}, {"new_goal", show(p)}}});
    }
  }
  return out;
}

struct Definition {
  const Assumption* source;
  NameSet vars;
  std::optional<Formula> condition;
  Formula lhs, rhs;
};

std::vector<Definition> definitions(const ProofSituation& s) {
  std::vector<Definition> out;
  for (const auto& a : s.assumptions) {
    if (!is_definition(a.formula)) continue;
    Definition d{&a, {}, std::nullopt, {}, {}};
    std::vector<Formula> conds;
    Formula g = a.formula;
    while (g.is(Kind::Forall)) {
      const Binder& b = g.binder();
      d.vars.insert(b.vars.begin(), b.vars.end());
      if (b.range) {
        conds.push_back(relation(Kind::Le, b.range->lo, variable(b.vars.front())));
        conds.push_back(relation(Kind::Le, variable(b.vars.front()), b.range->hi));
      }
      if (b.condition) conds.push_back(*b.condition);
      g = g.body();
    }
    if (!conds.empty()) d.condition = conjunction(conds);
    d.lhs = g.lhs();
    d.rhs = g.rhs();
    out.push_back(d);
  }
  return out;
}

class Rewriter {
 public:
  Rewriter(const ProofSituation& s, const std::vector<Definition>& defs, const RuleContext& ctx)
      : s_(s), defs_(defs), ctx_(ctx) {}

  Formula run(const Formula& f) {
    for (const auto& d : defs_) {
      Substitution sigma;
      if (!match(d.lhs, f, d.vars, sigma)) continue;
      if (sigma.size() != d.vars.size()) continue;
      if (d.condition) {
        Formula c = substitute(*d.condition, sigma);
        if (!available(s_, c) && !builtin_simplify(c, ctx_.builtins).is(Kind::True)) continue;
      }
      if (std::find(used_.begin(), used_.end(), d.source->label) == used_.end()) used_.push_back(d.source->label);
      return substitute(d.rhs, sigma);
    }
    if (is_quantifier(f.kind())) {
      Binder b = f.binder();
      if (b.condition) b.condition = run(*b.condition);
      if (b.range) b.range = Range{run(b.range->lo), run(b.range->hi)};
      return quantifier(f.kind(), std::move(b), run(f.body()));
    }
    const auto& ch = children_of(f);
    if (ch.empty()) return f;
    std::vector<Formula> out;
    for (const auto& c : ch) out.push_back(run(c));
    return with_children(f, std::move(out));
  }

  const std::vector<std::string>& used() const { return used_; }

 private:
  const ProofSituation& s_;
  const std::vector<Definition>& defs_;
  const RuleContext& ctx_;
  std::vector<std::string> used_;
};

std::vector<RuleApplication> expand_definition(const ProofSituation& s, const RuleContext& ctx) {
  const auto defs = definitions(s);
  if (defs.empty()) return {};
  {
    Rewriter rw(s, defs, ctx);
    Formula g = rw.run(s.goal);
    if (g != s.goal) {
      ProofSituation n = next(s);
      n.goal = g;
      return {RuleApplication{"expand-definition", {n},
                              {{"target", "goal"}, {"goal", show(s.goal)}, {"new_goal", show(g)}, {"label", rw.used().front()},
                               {"refs", labels_json(rw.used())}}}};
    }
  }
  Rewriter rw(s, defs, ctx);
  ProofSituation n = next(s);
  std::vector<std::string> changed;
  nlohmann::json rewritten = nlohmann::json::array();
  for (auto& a : n.assumptions) {
    if (is_definition(a.formula)) continue;
    Formula f = rw.run(a.formula);
    if (f == a.formula) continue;
    a.formula = f;
    a.key.reset();
    changed.push_back(a.label);
    rewritten.push_back(show(f));
  }
  if (changed.empty()) return {};
  return {RuleApplication{"expand-definition", {n},
                          {{"target", "assumptions"}, {"labels", changed}, {"rewritten", rewritten},
                           {"label", rw.used().front()}, {"refs", labels_json(rw.used())}}}};
}

std::vector<RuleApplication> builtin_simplify_goal(const ProofSituation& s, const RuleContext& ctx) {
  if (ctx.builtins.empty()) return {};
  ProofSituation n = next(s);
  n.goal = builtin_simplify(s.goal, ctx.builtins);
  std::vector<std::string> changed;
  for (auto& a : n.assumptions) {
    Formula f = builtin_simplify(a.formula, ctx.builtins);
    if (f == a.formula) continue;
    a.formula = f;
    changed.push_back(a.label);
  }
  if (n.goal == s.goal && changed.empty()) return {};
  if (n.goal.is(Kind::True) && changed.empty()) {
    return {RuleApplication{"builtin-simplify-goal", {}, {{"goal", show(s.goal)}, {"new_goal", show(n.goal)}, {"labels", changed}}}};
  }
  return {RuleApplication{"builtin-simplify-goal", {n}, {{"goal", show(s.goal)}, {"new_goal", show(n.goal)}, {"labels", changed}}}};
}

InferenceRule rule(std::string id, std::string group, int prio,
                   std::function<std::vector<RuleApplication>(const ProofSituation&, const RuleContext&)> fn) {
  InferenceRule r;
  r.description_key = "rule." + id;
  r.id = std::move(id);
  r.group_path = {std::move(group)};
  r.default_priority = prio;
  r.default_explain = true;
  r.applicability = std::move(fn);
  return r;
}

}  // namespace

std::string ProofSituation::fresh_label() const {
  for (int i = 1;; ++i) {
    std::string l = "A" + std::to_string(i);
    if (std::none_of(assumptions.begin(), assumptions.end(), [&](const Assumption& a) { return a.label == l; })) return l;
  }
}

Assumption& ProofSituation::assume(Formula f) {
  assumptions.push_back(Assumption{fresh_label(), std::move(f), std::nullopt});
  return assumptions.back();
}

bool match(const Formula& pattern, const Formula& term, const NameSet& vars, Substitution& bindings) {
  static thread_local int marker_counter = 0;
  if (pattern.is(Kind::Var) && vars.count(pattern.name())) {
    auto it = bindings.find(pattern.name());
    if (it != bindings.end()) return alpha_equal(it->second, term);
    for (const auto& sym : symbols(term)) {
      if (!sym.empty() && sym[0] == '\x01') return false;  // would capture a bound variable of the term
    }
    bindings.emplace(pattern.name(), term);
    return true;
  }
  if (pattern.kind() != term.kind()) return false;
  switch (pattern.kind()) {
    case Kind::Const:
    case Kind::Var:
      return pattern.name() == term.name();
    case Kind::Integer:
    case Kind::Rational:
    case Kind::True:
    case Kind::False:
      return pattern == term;
    case Kind::Forall:
    case Kind::Exists: {
      const Binder &pb = pattern.binder(), &tb = term.binder();
      if (pb.vars.size() != tb.vars.size() || pb.condition.has_value() != tb.condition.has_value() ||
          pb.range.has_value() != tb.range.has_value()) {
        return false;
      }
      Substitution ps, ts;
      NameSet inner = vars;
      for (std::size_t i = 0; i < pb.vars.size(); ++i) {
        Formula m = constant(std::string("\x01") + std::to_string(++marker_counter));
        ps.emplace(pb.vars[i], m);
        ts.emplace(tb.vars[i], m);
        inner.erase(pb.vars[i]);
      }
      auto side = [&](const Formula& p, const Formula& t) { return match(substitute(p, ps), substitute(t, ts), inner, bindings); };
      if (pb.condition && !side(*pb.condition, *tb.condition)) return false;
      if (pb.range && (!side(pb.range->lo, tb.range->lo) || !side(pb.range->hi, tb.range->hi))) return false;
      return side(pattern.body(), term.body());
    }
    default: {
      const auto& pc = children_of(pattern);
      const auto& tc = children_of(term);
      if (pc.size() != tc.size()) return false;
      for (std::size_t i = 0; i < pc.size(); ++i) {
        if (!match(pc[i], tc[i], vars, bindings)) return false;
      }
      return true;
    }
  }
}

const std::vector<InferenceRule>& rule_list() {
  static const std::vector<InferenceRule> rules = {
      rule("goal-true", "termination", 1, goal_true),
      rule("goal-in-kb", "termination", 2, goal_in_kb),
      rule("kb-contradiction", "termination", 3, kb_contradiction),
      rule("and-goal-split", "connectives", 11, and_goal_split),
      rule("impl-goal-direct", "connectives", 10, impl_goal_direct),
      rule("impl-goal-contrapose", "connectives", 20, impl_goal_contrapose),
      rule("or-goal", "connectives", 14, or_goal),
      rule("not-goal", "connectives", 15, not_goal),
      rule("iff-goal-split", "connectives", 13, iff_goal_split),
      rule("and-kb-split", "connectives", 12, and_kb_split),
      rule("forall-goal-intro", "quantifiers", 30, forall_goal_intro),
      rule("exists-goal-instantiate", "quantifiers", 35, exists_goal_instantiate),
      rule("forall-kb-instantiate", "quantifiers", 40, forall_kb_instantiate),
      rule("modus-ponens", "knowledge", 50, modus_ponens),
      rule("expand-definition", "knowledge", 55, expand_definition),
      rule("builtin-simplify-goal", "simplify", 70, builtin_simplify_goal),
  };
  return rules;
}

const std::vector<RuleGroup>& rule_groups() {
  static const std::vector<RuleGroup> groups = [] {
    std::vector<RuleGroup> out;
    for (const auto& r : rule_list()) {
      const std::string& g = r.group_path.front();
      if (out.empty() || out.back().id != g) out.push_back(RuleGroup{g, {}});
      out.back().rule_ids.push_back(r.id);
    }
    return out;
  }();
  return groups;
}

const InferenceRule* find_rule(const std::string& id) {
  for (const auto& r : rule_list()) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

RuleStates default_rule_states() {
  RuleStates out;
  for (const auto& r : rule_list()) out.emplace(r.id, RuleState{r.id, true, r.default_priority, r.default_explain});
  return out;
}

std::vector<RuleApplication> applicable_rules(const ProofSituation& s, const RuleStates& states,
                                              const std::vector<InferenceRule>& rules, const RuleContext& ctx) {
  std::vector<std::pair<int, std::size_t>> order;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    auto it = states.find(rules[i].id);
    const RuleState st = it != states.end() ? it->second : RuleState{rules[i].id, true, rules[i].default_priority, true};
    if (st.active) order.emplace_back(st.priority, i);
  }
  std::stable_sort(order.begin(), order.end());
  std::vector<RuleApplication> out;
  for (const auto& [prio, i] : order) {
    for (auto& app : rules[i].applicability(s, ctx)) out.push_back(std::move(app));
  }
  return out;
}

}  // namespace tma
