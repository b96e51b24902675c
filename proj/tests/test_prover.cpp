#include <chrono>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "prover_suite.hpp"
#include "truth_table.hpp"
#include "tma/builtins.hpp"
#include "tma/errors.hpp"
#include "tma/prover.hpp"
#include "tma/syntax.hpp"

using namespace tma;
using namespace tma::testing;

namespace {

struct Run {
  ProofTree tree;
  std::vector<ProofEvent> events;
};

Run run(const SettingsSnapshot& snap, const std::atomic<bool>* cancel = nullptr) {
  Run r;
  r.tree = prove(snap, [&](const ProofEvent& e) { r.events.push_back(e); }, cancel);
  return r;
}

std::vector<std::string> applied_rules(const ProofTree& t) {
  std::vector<std::string> out;
  for (const auto& n : t.nodes) {
    if (n.type == NodeType::And) out.push_back(n.rule_id);
  }
  return out;
}

// Rules along the proved path, in node order.
std::vector<std::string> proof_rules(const ProofTree& t) {
  std::vector<std::string> out;
  for (const auto& n : t.nodes) {
    if (n.type == NodeType::And && n.status == NodeStatus::Proved) out.push_back(n.rule_id);
  }
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

// Status a node must have by the node invariants, written out independently.
std::optional<NodeStatus> expected_status(const std::vector<NodeStatus>& kids, NodeType type) {
  if (kids.empty()) return std::nullopt;
  auto count = [&](NodeStatus s) { return std::count(kids.begin(), kids.end(), s); };
  const auto n = static_cast<long>(kids.size());
  if (type == NodeType::And) {
    if (count(NodeStatus::Failed) > 0) return NodeStatus::Failed;
    if (count(NodeStatus::Proved) == n) return NodeStatus::Proved;
    if (count(NodeStatus::Pruned) > 0) return NodeStatus::Pruned;
    return NodeStatus::Pending;
  }
  if (count(NodeStatus::Proved) > 0) return NodeStatus::Proved;
  if (count(NodeStatus::Pruned) == n) return NodeStatus::Pruned;
  if (count(NodeStatus::Failed) + count(NodeStatus::Pruned) == n) return NodeStatus::Failed;
  return NodeStatus::Pending;
}

// Applies events one by one to a mirror tree and checks the status algebra after each.
void check_status_algebra(const std::vector<ProofEvent>& events) {
  struct Mirror {
    NodeType type;
    NodeStatus status;
    std::vector<int> kids;
  };
  std::vector<Mirror> m;
  auto kid_statuses = [&](const Mirror& x) {
    std::vector<NodeStatus> out;
    for (int k : x.kids) out.push_back(m[k].status);
    return out;
  };
  for (const auto& e : events) {
    if (e.kind == "node-added") {
      REQUIRE(e.node_id == static_cast<int>(m.size()));
      m.push_back(Mirror{*e.node_type, *e.status, {}});
      if (e.parent_id) m[*e.parent_id].kids.push_back(e.node_id);
    } else if (e.kind == "status-changed") {
      m[e.node_id].status = *e.status;
    }
    for (const auto& x : m) {
      if (x.status == NodeStatus::Pending) continue;
      auto want = expected_status(kid_statuses(x), x.type);
      if (want) CHECK(*want == x.status);
    }
  }
  REQUIRE(!events.empty());
  CHECK(events.back().kind == "finished");
  for (const auto& x : m) {
    auto want = expected_status(kid_statuses(x), x.type);
    if (want) {
      CHECK(*want == x.status);
    } else {
      CHECK(x.status != NodeStatus::Pending);
    }
  }
}

Formula random_prop(std::mt19937& rng, int depth) {
  static const char* atoms[] = {"p", "q", "r", "s"};
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 5);
  switch (pick(rng)) {
    case 0: return constant(atoms[std::uniform_int_distribution<int>(0, 3)(rng)]);
    case 1: return negation(random_prop(rng, depth - 1));
    case 2: return conjunction({random_prop(rng, depth - 1), random_prop(rng, depth - 1)});
    case 3: return disjunction({random_prop(rng, depth - 1), random_prop(rng, depth - 1)});
    case 4: return implication(random_prop(rng, depth - 1), random_prop(rng, depth - 1));
    default: return equivalence(random_prop(rng, depth - 1), random_prop(rng, depth - 1));
  }
}

SettingsSnapshot snapshot_of(const Formula& goal, const std::vector<Formula>& kb) {
  SettingsSnapshot s;
  s.goal = FormulaEntry{FormulaKey{"/r.tnb", CellId{1}}, "goal", goal, format(goal)};
  for (std::size_t i = 0; i < kb.size(); ++i) {
    s.knowledge.push_back(FormulaEntry{FormulaKey{"/r.tnb", CellId{static_cast<std::int64_t>(i) + 2}}, "K" + std::to_string(i + 1), kb[i],
                                       format(kb[i])});
  }
  s.config.goal = s.goal.key;
  return s;
}

// Forward saturation over ground instances: the independent oracle for small
// universally quantified Horn problems. Instantiates every premise with every constant.
bool saturates_to(const std::vector<Formula>& kb, const Formula& goal, const std::vector<std::string>& constants) {
  std::vector<Formula> facts;
  std::vector<std::pair<Formula, Formula>> rules;
  for (const auto& k : kb) {
    std::vector<Formula> insts;
    if (k.is(Kind::Forall)) {
      for (const auto& c : constants) insts.push_back(substitute(k.body(), {{k.binder().vars.front(), constant(c)}}));
    } else {
      insts.push_back(k);
    }
    for (const auto& i : insts) {
      if (i.is(Kind::Implies)) {
        rules.emplace_back(i.lhs(), i.rhs());
      } else {
        facts.push_back(i);
      }
    }
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [l, r] : rules) {
      bool have_l = std::find(facts.begin(), facts.end(), l) != facts.end();
      bool have_r = std::find(facts.begin(), facts.end(), r) != facts.end();
      if (have_l && !have_r) {
        facts.push_back(r);
        grew = true;
      }
    }
  }
  return std::find(facts.begin(), facts.end(), goal) != facts.end();
}

}  // namespace

TEST_CASE("rule table") {
  const auto& rules = rule_list();
  CHECK(rules.size() == 16);
  std::set<std::string> ids;
  for (const auto& r : rules) {
    CHECK(ids.insert(r.id).second);
    CHECK(r.default_priority >= 1);
    CHECK(r.default_priority <= 100);
    CHECK(r.description_key == "rule." + r.id);
  }
  std::vector<std::string> groups;
  for (const auto& g : rule_groups()) groups.push_back(g.id);
  CHECK(groups == std::vector<std::string>{"termination", "connectives", "quantifiers", "knowledge", "simplify"});
  for (const auto& r : rules) {
    const int p = r.default_priority;
    const std::string& g = r.group_path.front();
    if (g == "termination") CHECK((p >= 1 && p <= 5));
    if (g == "connectives") CHECK((p >= 10 && p <= 29));
    if (g == "quantifiers") CHECK((p >= 30 && p <= 49));
    if (g == "knowledge") CHECK((p >= 50 && p <= 69));
    if (g == "simplify") CHECK(p == 70);
  }
}

TEST_CASE("applicable_rules orders by priority and honours deactivation") {
  ProofSituation s;
  s.goal = truth();
  auto apps = applicable_rules(s, default_rule_states(), rule_list(), {});
  REQUIRE(!apps.empty());
  CHECK(apps.front().rule_id == "goal-true");

  s.goal = closed("p => q");
  apps = applicable_rules(s, default_rule_states(), rule_list(), {});
  REQUIRE(apps.size() == 2);
  CHECK(apps[0].rule_id == "impl-goal-direct");
  CHECK(apps[1].rule_id == "impl-goal-contrapose");

  auto states = default_rule_states();
  states["impl-goal-contrapose"].active = false;
  apps = applicable_rules(s, states, rule_list(), {});
  REQUIRE(apps.size() == 1);
  CHECK(apps[0].rule_id == "impl-goal-direct");

  states = default_rule_states();
  states["impl-goal-contrapose"].priority = 5;
  apps = applicable_rules(s, states, rule_list(), {});
  CHECK(apps[0].rule_id == "impl-goal-contrapose");

  // Equal priorities fall back to rule-list order, where contrapose precedes or-goal etc.
  states = default_rule_states();
  states["impl-goal-direct"].priority = 20;
  apps = applicable_rules(s, states, rule_list(), {});
  CHECK(apps[0].rule_id == "impl-goal-direct");
}

TEST_CASE("applicable_rules ordering matches a sort of the rule table") {
  std::mt19937 rng(7);
  ProofSituation s;
  s.goal = closed("(p and q) => (p or q)");
  s.assume(closed("a and b"));
  s.assume(closed("a => c"));
  s.assume(closed("forall[x, f[x] => g[x]]"));
  for (int round = 0; round < 200; ++round) {
    auto states = default_rule_states();
    for (auto& [id, st] : states) {
      st.priority = std::uniform_int_distribution<int>(1, 100)(rng);
      st.active = std::uniform_int_distribution<int>(0, 3)(rng) != 0;
    }
    auto apps = applicable_rules(s, states, rule_list(), {});
    std::vector<std::pair<int, std::size_t>> keys;
    for (const auto& a : apps) {
      CHECK(states.at(a.rule_id).active);
      std::size_t index = 0;
      while (rule_list()[index].id != a.rule_id) ++index;
      keys.emplace_back(states.at(a.rule_id).priority, index);
    }
    CHECK(std::is_sorted(keys.begin(), keys.end()));
  }
}

TEST_CASE("matching is one-sided and capture-aware") {
  Substitution sigma;
  CHECK(match(parse_formula("f[x, y]"), closed("f[a, g[b]]"), {"x", "y"}, sigma));
  CHECK(sigma.at("y") == closed("g[b]"));
  sigma.clear();
  CHECK_FALSE(match(parse_formula("f[x, x]"), closed("f[a, b]"), {"x"}, sigma));
  sigma.clear();
  CHECK_FALSE(match(closed("f[a]"), parse_formula("f[x]"), {}, sigma));
  sigma.clear();
  CHECK(match(parse_formula("forall[z, p[z, y]]"), parse_formula("forall[w, p[w, c]]"), {"y"}, sigma));
  sigma.clear();
  CHECK_FALSE(match(parse_formula("forall[z, p[z, y]]"), parse_formula("forall[w, p[w, w]]"), {"y"}, sigma));
}

TEST_CASE("identity: initial, impl-goal-direct, goal-in-kb") {
  auto r = run(problem_snapshot({"", "a => a", {}, {}}));
  REQUIRE(r.tree.proved());
  CHECK(r.tree.reason == "proved");
  CHECK(applied_rules(r.tree) == std::vector<std::string>{"impl-goal-direct", "goal-in-kb"});
  CHECK(r.tree.root().type == NodeType::Initial);
  CHECK(r.tree.root().explain);
  check_status_algebra(r.events);
}

TEST_CASE("forall goal from two quantified premises matches saturation") {
  auto snap = problem_snapshot({"", "forall[x, q[x]]", {"forall[x, p[x] => q[x]]", "forall[x, p[x]]"}, {}});
  auto r = run(snap);
  REQUIRE(r.tree.proved());
  auto used = proof_rules(r.tree);
  CHECK(contains(used, "forall-goal-intro"));
  CHECK(contains(used, "forall-kb-instantiate"));
  CHECK(contains(used, "modus-ponens"));
  // Oracle: the fresh constant introduced by the prover, saturated over ground instances.
  std::string fresh;
  for (const auto& n : r.tree.nodes) {
    if (n.situation && !n.situation->constants.empty()) fresh = *n.situation->constants.begin();
  }
  REQUIRE(!fresh.empty());
  CHECK(saturates_to({closed("forall[x, p[x] => q[x]]"), closed("forall[x, p[x]]")}, apply("q", {constant(fresh)}), {fresh}));
  CHECK_FALSE(saturates_to({closed("forall[x, p[x] => q[x]]")}, apply("q", {constant(fresh)}), {fresh}));
}

TEST_CASE("unprovable conjunction fails within a node limit") {
  auto r = run(problem_snapshot({"", "p and not p", {}, {}, false, 100}));
  CHECK(r.tree.status() == NodeStatus::Failed);
  CHECK(r.tree.nodes.size() <= 100);
  check_status_algebra(r.events);
  CHECK(replay(r.events).nodes.size() == r.tree.nodes.size());
}

TEST_CASE("prover suite") {
  const auto& suite = prover_suite();
  int provable = 0, controls = 0;
  for (const auto& p : suite) {
    CAPTURE(p.name);
    auto start = std::chrono::steady_clock::now();
    auto r = run(problem_snapshot(p));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r.tree.proved() == p.provable);
    CHECK(secs < 5.0);
    if (p.provable) {
      ++provable;
    } else {
      ++controls;
      CHECK(r.tree.status() == NodeStatus::Failed);
    }
    check_status_algebra(r.events);
    CHECK(canonical_string(replay(r.events)) == canonical_string(r.tree));
    CHECK(static_cast<int>(r.tree.nodes.size()) <= p.max_nodes);
    CHECK(r.tree.depth() <= Limits{}.max_depth);
  }
  CHECK(provable >= 20);
  CHECK(controls >= 3);
}

TEST_CASE("soundness against truth tables") {
  int checked = 0;
  for (const auto& p : prover_suite()) {
    Formula goal = closed(p.goal);
    std::vector<Formula> kb;
    for (const auto& k : p.knowledge) kb.push_back(closed(k));
    if (!propositional(goal) || !std::all_of(kb.begin(), kb.end(), propositional)) continue;
    if (run(problem_snapshot(p)).tree.proved()) {
      CAPTURE(p.name);
      CHECK(tautology(goal, kb));
      ++checked;
    }
  }
  CHECK(checked >= 10);

  std::mt19937 rng(2024);
  int proved = 0;
  for (int i = 0; i < 400; ++i) {
    Formula goal = random_prop(rng, 3);
    std::vector<Formula> kb;
    const int n = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int k = 0; k < n; ++k) kb.push_back(random_prop(rng, 2));
    auto snap = snapshot_of(goal, kb);
    snap.config.limits.max_nodes = 400;
    auto tree = prove(snap);
    if (tree.proved()) {
      ++proved;
      CAPTURE(format(goal));
      CHECK(tautology(goal, kb));
    }
  }
  CHECK(proved >= 40);
}

TEST_CASE("deactivated rules never appear") {
  for (const auto& p : prover_suite()) {
    for (const auto& r : rule_list()) {
      auto snap = problem_snapshot(p);
      snap.config.limits.max_nodes = 300;
      snap.config.rule_states[r.id].active = false;
      auto tree = prove(snap);
      CAPTURE(p.name);
      CAPTURE(r.id);
      CHECK_FALSE(contains(applied_rules(tree), r.id));
    }
  }
}

TEST_CASE("apply-first applies the best applicable rule first") {
  std::mt19937 rng(11);
  for (const auto& p : prover_suite()) {
    for (int round = 0; round < 3; ++round) {
      auto snap = problem_snapshot(p);
      snap.config.limits.max_nodes = 400;
      for (auto& [id, st] : snap.config.rule_states) st.priority = std::uniform_int_distribution<int>(1, 100)(rng);
      auto tree = prove(snap);
      for (const auto& n : tree.nodes) {
        if (!n.situation || n.children.empty()) continue;
        const auto& applicable = n.payload.at("applicable");
        std::vector<std::pair<int, std::size_t>> keys;
        for (const auto& id : applicable) {
          std::size_t index = 0;
          while (rule_list()[index].id != id.get<std::string>()) ++index;
          keys.emplace_back(snap.config.rule_states.at(id.get<std::string>()).priority, index);
        }
        CHECK(std::is_sorted(keys.begin(), keys.end()));
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          CHECK(tree.nodes[n.children[i]].rule_id == applicable.at(i).get<std::string>());
        }
      }
    }
  }
}

TEST_CASE("configuration: direct versus contraposition") {
  auto direct = run(problem_snapshot({"", "a => a", {}, {}}));
  auto snap = problem_snapshot({"", "a => a", {}, {}});
  snap.config.rule_states["impl-goal-direct"].active = false;
  auto contra = run(snap);
  REQUIRE(direct.tree.proved());
  REQUIRE(contra.tree.proved());
  auto a = applied_rules(direct.tree), b = applied_rules(contra.tree);
  CHECK(a == std::vector<std::string>{"impl-goal-direct", "goal-in-kb"});
  CHECK(b == std::vector<std::string>{"impl-goal-contrapose", "goal-in-kb"});
  REQUIRE(direct.tree.nodes.size() == contra.tree.nodes.size());
  for (std::size_t i = 0; i < direct.tree.nodes.size(); ++i) {
    CHECK(direct.tree.nodes[i].type == contra.tree.nodes[i].type);
    CHECK(direct.tree.nodes[i].status == contra.tree.nodes[i].status);
  }
}

TEST_CASE("contraposition-only goal: both strategies") {
  const Problem p{"", "p => q", {"not q => not p"}, {}};
  auto snap = problem_snapshot(p);
  snap.config.rule_states["impl-goal-contrapose"].active = false;
  CHECK_FALSE(prove(snap).proved());

  auto af = run(problem_snapshot(p));
  REQUIRE(af.tree.proved());
  const auto& root = af.tree.root();
  REQUIRE(root.children.size() == 2);
  CHECK(af.tree.nodes[root.children[0]].rule_id == "impl-goal-direct");
  CHECK(af.tree.nodes[root.children[0]].status == NodeStatus::Failed);
  CHECK(af.tree.nodes[root.children[1]].rule_id == "impl-goal-contrapose");
  CHECK(af.tree.nodes[root.children[1]].status == NodeStatus::Proved);

  snap = problem_snapshot(p);
  snap.config.strategy = kBranchAlternatives;
  auto ba = run(snap);
  REQUIRE(ba.tree.proved());
  check_status_algebra(ba.events);
  const auto& broot = ba.tree.root();
  REQUIRE(broot.children.size() == 1);
  const auto& orn = ba.tree.nodes[broot.children[0]];
  CHECK(orn.type == NodeType::Or);
  CHECK(orn.status == NodeStatus::Proved);
  std::vector<NodeStatus> kids;
  for (int c : orn.children) kids.push_back(ba.tree.nodes[c].status);
  CHECK(kids == std::vector<NodeStatus>{NodeStatus::Failed, NodeStatus::Proved});
}

TEST_CASE("branch-alternatives prunes untried alternatives") {
  auto snap = problem_snapshot({"", "q", {"p", "p => q", "r => q"}, {}});
  snap.config.strategy = kBranchAlternatives;
  auto r = run(snap);
  REQUIRE(r.tree.proved());
  check_status_algebra(r.events);
  bool pruned = false;
  for (const auto& n : r.tree.nodes) {
    if (n.type == NodeType::Or) CHECK(n.children.size() <= 4);
    if (n.status == NodeStatus::Pruned) pruned = true;
  }
  CHECK(pruned);
}

TEST_CASE("a single applicable rule gives identical trees under both strategies") {
  auto snap = problem_snapshot({"", "a => a", {}, {}});
  snap.config.rule_states["impl-goal-contrapose"].active = false;
  auto a = prove(snap);
  snap.config.strategy = kBranchAlternatives;
  auto b = prove(snap);
  CHECK(canonical_string(a) == canonical_string(b));
}

TEST_CASE("zero applicable rules fail the situation") {
  auto r = run(problem_snapshot({"", "p", {}, {}}));
  CHECK(r.tree.status() == NodeStatus::Failed);
  CHECK(r.tree.nodes.size() == 1);
  CHECK(r.tree.root().reason == "no-rule");
  CHECK(r.tree.reason == "exhausted");
}

TEST_CASE("strategies agree on the suite verdicts") {
  for (const auto& p : prover_suite()) {
    auto snap = problem_snapshot(p);
    snap.config.strategy = kBranchAlternatives;
    auto r = run(snap);
    CAPTURE(p.name);
    CHECK(r.tree.proved() == p.provable);
    check_status_algebra(r.events);
    CHECK(canonical_string(replay(r.events)) == canonical_string(r.tree));
  }
}

TEST_CASE("snapshot determinism and round-trip") {
  for (const auto& p : prover_suite()) {
    auto snap = problem_snapshot(p);
    auto first = prove(snap);
    auto restored = snapshot_from_json(nlohmann::json::parse(to_json(snap).dump()));
    CHECK(restored == snap);
    CHECK(restore_settings(restored) == snap.config);
    auto second = prove(restored);
    CAPTURE(p.name);
    CHECK(canonical_string(first) == canonical_string(second));
  }
}

TEST_CASE("invalid snapshots") {
  auto snap = problem_snapshot({"", "a => a", {}, {}});
  auto bad = snap;
  bad.config.rule_states["no-such-rule"] = RuleState{"no-such-rule", true, 5, true};
  CHECK_THROWS_AS(restore_settings(bad), InvalidSnapshot);
  CHECK_THROWS_AS(prove(bad), InvalidSnapshot);
  bad = snap;
  bad.config.strategy = "random";
  CHECK_THROWS_AS(prove(bad), UnknownStrategy);
  bad = snap;
  bad.config.rule_states["goal-true"].priority = 0;
  CHECK_THROWS_AS(restore_settings(bad), InvalidSnapshot);
  bad = snap;
  bad.config.builtins = {"astrology"};
  CHECK_THROWS_AS(restore_settings(bad), InvalidSnapshot);
  auto j = to_json(snap);
  j["config"]["rules"].push_back({{"rule_id", "bogus"}, {"active", true}, {"priority", 3}, {"explain", true}});
  CHECK_THROWS_AS(snapshot_from_json(j), InvalidSnapshot);
  CHECK_THROWS_AS(snapshot_from_json(nlohmann::json{{"version", 1}}), InvalidSnapshot);
}

TEST_CASE("snapshot from a session") {
  Session session;
  CHECK_THROWS_AS(snapshot(ProverConfig{}, session), InvalidSnapshot);
  ProverConfig c;
  c.goal = FormulaKey{"/nowhere.tnb", CellId{1}};
  CHECK_THROWS_AS(snapshot(c, session), InvalidSnapshot);
}

TEST_CASE("limits bound the tree") {
  for (int nodes : {5, 20, 60}) {
    for (int depth : {2, 4, 8}) {
      for (const auto& p : prover_suite()) {
        auto snap = problem_snapshot(p);
        snap.config.limits.max_nodes = nodes;
        snap.config.limits.max_depth = depth;
        auto r = run(snap);
        CAPTURE(p.name);
        CHECK(static_cast<int>(r.tree.nodes.size()) <= nodes);
        CHECK(r.tree.depth() <= depth);
        CHECK(r.tree.status() != NodeStatus::Pending);
        check_status_algebra(r.events);
        CHECK(canonical_string(replay(r.events)) == canonical_string(r.tree));
      }
    }
  }
}

TEST_CASE("node limit, timeout and cancellation are reported") {
  auto snap = problem_snapshot(prover_suite()[18]);
  snap.config.limits.max_nodes = 3;
  auto r = run(snap);
  CHECK(r.tree.status() == NodeStatus::Failed);
  CHECK(r.tree.reason == "limit");
  check_status_algebra(r.events);

  snap = problem_snapshot({"", "forall[x, q[x]]", {"forall[x, p[x] => q[x]]", "forall[x, p[x]]"}, {}});
  snap.config.limits.timeout_seconds = 1e-9;
  r = run(snap);
  CHECK(r.tree.status() == NodeStatus::Failed);
  CHECK(r.tree.reason == "limit");

  std::atomic<bool> cancel{true};
  snap.config.limits.timeout_seconds = 10;
  r = run(snap, &cancel);
  CHECK(r.tree.reason == "cancelled");
  CHECK(r.events.back().reason == "cancelled");
}

TEST_CASE("events serialize and replay") {
  auto r = run(problem_snapshot(prover_suite()[13]));
  std::vector<ProofEvent> parsed;
  std::int64_t seq = 0;
  for (const auto& e : r.events) {
    CHECK(e.seq == seq++);
    parsed.push_back(event_from_json(nlohmann::json::parse(to_json(e).dump())));
  }
  CHECK(canonical_string(replay(parsed)) == canonical_string(r.tree));
  CHECK(r.events.front().kind == "node-added");
  CHECK_FALSE(r.events.front().parent_id.has_value());
}

TEST_CASE("explain flags are copied from rule states") {
  auto snap = problem_snapshot({"", "a => a", {}, {}});
  snap.config.rule_states["goal-in-kb"].explain = false;
  auto t = prove(snap);
  for (const auto& n : t.nodes) {
    if (n.type == NodeType::And) CHECK(n.explain == (n.rule_id != "goal-in-kb"));
    if (n.type == NodeType::Situation) CHECK_FALSE(n.explain);
  }
}

TEST_CASE("range goals") {
  auto t = prove(problem_snapshot({"", "forall[j = 1..3, j >= 1]", {}, {"arithmetic"}}));
  REQUIRE(t.proved());
  const auto& intro = t.nodes[t.root().children[0]];
  CHECK(intro.rule_id == "forall-goal-intro");
  CHECK(intro.children.size() == 3);
  CHECK(prove(problem_snapshot({"", "forall[j = 3..1, p[j]]", {}, {}})).proved());
  auto open = prove(problem_snapshot({"", "forall[j = 1..n, j >= 1]", {}, {"arithmetic"}}));
  const auto& step = open.nodes[open.root().children[0]];
  CHECK(step.rule_id == "forall-goal-intro");
  REQUIRE(step.children.size() == 1);
  const auto& s = *open.nodes[step.children[0]].situation;
  CHECK(s.assumptions.size() == 3);
  CHECK(s.assumptions[2].formula == closed("isInteger[j]"));
}

TEST_CASE("builtins are uninterpreted unless selected") {
  CHECK_FALSE(prove(problem_snapshot({"", "1 + 1 = 2", {}, {}})).proved());
  CHECK(prove(problem_snapshot({"", "1 + 1 = 2", {}, {"arithmetic"}})).proved());
}

TEST_CASE("compute") {
  std::vector<FormulaEntry> kb = {problem_entry("forall[x, f[x] := x + 1]", 2, "succ")};
  auto r = compute(closed("f[2]"), kb, {"arithmetic"});
  CHECK(r.result == integer(3));
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[0].kind == "rewrite");
  CHECK(r.trace[0].rule == "succ");
  CHECK(r.trace[0].position.empty());
  CHECK(r.trace[0].result == closed("2 + 1"));
  CHECK(r.trace[1].kind == "builtin");
  CHECK(r.trace[1].result == integer(3));

  auto none = compute(closed("f[2]"), {}, {});
  CHECK(none.result == closed("f[2]"));
  CHECK(none.trace.empty());

  auto noarith = compute(closed("f[2]"), kb, {});
  CHECK(noarith.result == closed("2 + 1"));

  std::vector<FormulaEntry> loop = {problem_entry("a := b", 2, "L1"), problem_entry("b := a", 3, "L2")};
  try {
    compute(closed("a"), loop, {}, 10);
    FAIL("expected StepLimitExceeded");
  } catch (const StepLimitExceeded& e) {
    CHECK(e.partial().trace.size() == 10);
    CHECK(e.partial().result == closed("a"));
  }

  auto nested = compute(closed("g[f[1], f[f[0]]]"), kb, {"arithmetic"});
  CHECK(nested.result == closed("g[2, 2]"));
  CHECK(nested.trace[0].position == std::vector<int>{1});
}
