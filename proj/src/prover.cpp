#include "tma/prover.hpp"

#include <algorithm>
#include <chrono>

#include "tma/builtins.hpp"
#include "tma/errors.hpp"
#include "tma/formula_json.hpp"

namespace tma {

using nlohmann::json;

// ---------------------------------------------------------------- settings

const std::vector<std::string>& strategy_ids() {
  static const std::vector<std::string> ids = {kApplyFirst, kBranchAlternatives};
  return ids;
}

void validate_config(const ProverConfig& c) {
  for (const auto& [id, st] : c.rule_states) {
    if (!find_rule(id) || st.rule_id != id) throw InvalidSnapshot("unknown rule id: " + id);
    if (st.priority < 1 || st.priority > 100) throw InvalidSnapshot("priority out of range for " + id);
  }
  if (std::find(strategy_ids().begin(), strategy_ids().end(), c.strategy) == strategy_ids().end()) {
    throw UnknownStrategy("unknown strategy: " + c.strategy);
  }
  for (const auto& b : c.builtins) {
    if (!is_builtin_id(b)) throw InvalidSnapshot("unknown built-in: " + b);
  }
  if (c.limits.max_depth < 1 || c.limits.max_nodes < 1 || !(c.limits.timeout_seconds > 0)) {
    throw InvalidSnapshot("limits must be positive");
  }
}

SettingsSnapshot snapshot(const ProverConfig& config, const Session& session) {
  if (!config.goal) throw InvalidSnapshot("no goal selected");
  SettingsSnapshot s{config, {}, {}};
  const FormulaEntry* g = session.entry(*config.goal);
  if (!g) throw InvalidSnapshot("goal not in session: " + to_string(*config.goal));
  s.goal = *g;
  for (const auto& k : config.knowledge) {
    const FormulaEntry* e = session.entry(k);
    if (!e) throw InvalidSnapshot("knowledge formula not in session: " + to_string(k));
    s.knowledge.push_back(*e);
  }
  return s;
}

ProverConfig restore_settings(const SettingsSnapshot& snap) {
  validate_config(snap.config);
  if (snap.config.goal && *snap.config.goal != snap.goal.key) throw InvalidSnapshot("goal entry does not match the goal key");
  return snap.config;
}

json to_json(const RuleState& r) {
  return {{"rule_id", r.rule_id}, {"active", r.active}, {"priority", r.priority}, {"explain", r.explain}};
}

json to_json(const Limits& l) {
  return {{"max_depth", l.max_depth}, {"max_nodes", l.max_nodes}, {"timeout_seconds", l.timeout_seconds}};
}

json to_json(const ProverConfig& c) {
  json j;
  j["goal"] = c.goal ? json(to_string(*c.goal)) : json(nullptr);
  j["knowledge"] = json::array();
  for (const auto& k : c.knowledge) j["knowledge"].push_back(to_string(k));
  j["builtins"] = c.builtins;
  j["rules"] = json::array();
  for (const auto& [id, st] : c.rule_states) j["rules"].push_back(to_json(st));
  j["strategy"] = c.strategy;
  j["limits"] = to_json(c.limits);
  j["language"] = c.language;
  return j;
}

namespace {

json entry_json(const FormulaEntry& e) {
  return {{"key", to_string(e.key)}, {"label", e.label}, {"source", e.source_text}, {"ast", to_json(e.formula)}};
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const InvalidSnapshot&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidSnapshot(std::string("malformed settings: ") + e.what());
  }
}

FormulaEntry entry_from_json(const json& j) {
  return guarded([&] {
    return FormulaEntry{parse_formula_key(j.at("key").get<std::string>()), j.at("label").get<std::string>(),
                        formula_from_json(j.at("ast")), j.value("source", std::string())};
  });
}

}  // namespace

json to_json(const SettingsSnapshot& s) {
  json j = {{"version", 1}, {"config", to_json(s.config)}, {"goal", entry_json(s.goal)}, {"knowledge", json::array()}};
  for (const auto& e : s.knowledge) j["knowledge"].push_back(entry_json(e));
  return j;
}

ProverConfig config_from_json(const json& j) {
  return guarded([&] {
    ProverConfig c;
    if (j.contains("goal") && !j.at("goal").is_null()) c.goal = parse_formula_key(j.at("goal").get<std::string>());
    for (const auto& k : j.value("knowledge", json::array())) c.knowledge.insert(parse_formula_key(k.get<std::string>()));
    c.builtins = j.value("builtins", std::set<std::string>{});
    for (const auto& r : j.value("rules", json::array())) {
      RuleState st{r.at("rule_id").get<std::string>(), r.value("active", true), r.value("priority", 50), r.value("explain", true)};
      c.rule_states[st.rule_id] = st;
    }
    c.strategy = j.value("strategy", std::string(kApplyFirst));
    if (j.contains("limits")) {
      const json& l = j.at("limits");
      c.limits.max_depth = l.value("max_depth", c.limits.max_depth);
      c.limits.max_nodes = l.value("max_nodes", c.limits.max_nodes);
      c.limits.timeout_seconds = l.value("timeout_seconds", c.limits.timeout_seconds);
    }
    c.language = j.value("language", std::string("en"));
    validate_config(c);
    return c;
  });
}

SettingsSnapshot snapshot_from_json(const json& j) {
  return guarded([&] {
    if (j.value("version", 0) != 1) throw InvalidSnapshot("unsupported snapshot version");
    SettingsSnapshot s;
    s.config = config_from_json(j.at("config"));
    s.goal = entry_from_json(j.at("goal"));
    for (const auto& e : j.at("knowledge")) s.knowledge.push_back(entry_from_json(e));
    restore_settings(s);
    return s;
  });
}

// ---------------------------------------------------------------- trees and events

const char* to_string(NodeType t) {
  switch (t) {
    case NodeType::Initial: return "initial";
    case NodeType::Situation: return "situation";
    case NodeType::And: return "and";
    case NodeType::Or: return "or";
    case NodeType::Terminal: return "terminal";
  }
  return "?";
}

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Pending: return "pending";
    case NodeStatus::Proved: return "proved";
    case NodeStatus::Failed: return "failed";
    case NodeStatus::Pruned: return "pruned";
  }
  return "?";
}

NodeType node_type_from_string(const std::string& s) {
  for (auto t : {NodeType::Initial, NodeType::Situation, NodeType::And, NodeType::Or, NodeType::Terminal}) {
    if (s == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown node type: " + s);
}

NodeStatus node_status_from_string(const std::string& s) {
  for (auto t : {NodeStatus::Pending, NodeStatus::Proved, NodeStatus::Failed, NodeStatus::Pruned}) {
    if (s == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown node status: " + s);
}

int ProofTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) {
    if (n.situation) d = std::max(d, n.situation->depth);
  }
  return d;
}

json situation_to_json(const ProofSituation& s) {
  json j = {{"goal", to_json(s.goal)}, {"assumptions", json::array()}, {"constants", s.constants}, {"depth", s.depth}};
  for (const auto& a : s.assumptions) {
    json aj = {{"label", a.label}, {"formula", to_json(a.formula)}};
    if (a.key) aj["key"] = to_string(*a.key);
    j["assumptions"].push_back(aj);
  }
  return j;
}

ProofSituation situation_from_json(const json& j) {
  ProofSituation s;
  s.goal = formula_from_json(j.at("goal"));
  for (const auto& a : j.at("assumptions")) {
    Assumption x{a.at("label").get<std::string>(), formula_from_json(a.at("formula")), std::nullopt};
    if (a.contains("key")) x.key = parse_formula_key(a.at("key").get<std::string>());
    s.assumptions.push_back(std::move(x));
  }
  s.constants = j.at("constants").get<std::set<std::string>>();
  s.depth = j.at("depth").get<int>();
  return s;
}

json to_json(const ProofEvent& e) {
  json j = {{"seq", e.seq}, {"kind", e.kind}, {"node_id", e.node_id}};
  if (e.parent_id) j["parent_id"] = *e.parent_id;
  if (e.node_type) j["node_type"] = to_string(*e.node_type);
  if (e.status) j["status"] = to_string(*e.status);
  if (e.rule_id) j["rule_id"] = *e.rule_id;
  if (e.explain) j["explain"] = *e.explain;
  if (!e.payload.is_null()) j["payload"] = e.payload;
  if (!e.reason.empty()) j["reason"] = e.reason;
  return j;
}

ProofEvent event_from_json(const json& j) {
  ProofEvent e;
  e.seq = j.at("seq").get<std::int64_t>();
  e.kind = j.at("kind").get<std::string>();
  e.node_id = j.at("node_id").get<int>();
  if (j.contains("parent_id")) e.parent_id = j.at("parent_id").get<int>();
  if (j.contains("node_type")) e.node_type = node_type_from_string(j.at("node_type").get<std::string>());
  if (j.contains("status")) e.status = node_status_from_string(j.at("status").get<std::string>());
  if (j.contains("rule_id")) e.rule_id = j.at("rule_id").get<std::string>();
  if (j.contains("explain")) e.explain = j.at("explain").get<bool>();
  if (j.contains("payload")) e.payload = j.at("payload");
  e.reason = j.value("reason", std::string());
  return e;
}

json tree_to_json(const ProofTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    json j = {{"id", n.id},
              {"parent", n.parent},
              {"type", to_string(n.type)},
              {"status", to_string(n.status)},
              {"explain", n.explain},
              {"children", n.children},
              {"payload", n.payload}};
    if (!n.rule_id.empty()) j["rule_id"] = n.rule_id;
    if (!n.reason.empty()) j["reason"] = n.reason;
    nodes.push_back(std::move(j));
  }
  return {{"reason", t.reason}, {"status", to_string(t.status())}, {"nodes", nodes}};
}

std::string canonical_string(const ProofTree& t) { return tree_to_json(t).dump(); }

ProofTree replay(const std::vector<ProofEvent>& events) {
  ProofTree t;
  for (const auto& e : events) {
    if (e.kind == "node-added") {
      if (e.node_id != static_cast<int>(t.nodes.size())) throw FormatError("event stream out of order");
      ProofNode n;
      n.id = e.node_id;
      n.parent = e.parent_id.value_or(-1);
      n.type = e.node_type.value_or(NodeType::Situation);
      n.status = e.status.value_or(NodeStatus::Pending);
      n.explain = e.explain.value_or(false);
      n.rule_id = e.rule_id.value_or("");
      n.payload = e.payload;
      if (n.payload.is_object() && n.payload.contains("situation")) n.situation = situation_from_json(n.payload.at("situation"));
      if (n.parent >= 0) t.nodes.at(n.parent).children.push_back(n.id);
      t.nodes.push_back(std::move(n));
    } else if (e.kind == "status-changed") {
      ProofNode& n = t.nodes.at(e.node_id);
      if (e.status) n.status = *e.status;
      if (!e.reason.empty()) n.reason = e.reason;
    } else if (e.kind == "finished") {
      t.reason = e.reason;
    } else {
      throw FormatError("unknown event kind: " + e.kind);
    }
  }
  return t;
}

std::optional<NodeStatus> folded_status(const ProofTree& t, const ProofNode& n) {
  if (n.children.empty()) return std::nullopt;
  std::size_t proved = 0, failed = 0, pruned = 0;
  for (int c : n.children) {
    switch (t.nodes.at(c).status) {
      case NodeStatus::Proved: ++proved; break;
      case NodeStatus::Failed: ++failed; break;
      case NodeStatus::Pruned: ++pruned; break;
      case NodeStatus::Pending: break;
    }
  }
  const std::size_t all = n.children.size();
  if (n.type == NodeType::And) {
    if (failed) return NodeStatus::Failed;
    if (proved == all) return NodeStatus::Proved;
    if (pruned) return NodeStatus::Pruned;
    return NodeStatus::Pending;
  }
  if (proved) return NodeStatus::Proved;
  if (pruned == all) return NodeStatus::Pruned;
  if (failed + pruned == all) return NodeStatus::Failed;
  return NodeStatus::Pending;
}

ProofSituation initial_situation(const FormulaEntry& goal, const std::vector<FormulaEntry>& knowledge) {
  ProofSituation s;
  s.goal = goal.formula;
  for (const auto& k : knowledge) {
    std::string label = k.label;
    const bool taken = std::any_of(s.assumptions.begin(), s.assumptions.end(), [&](const Assumption& a) { return a.label == label; });
    if (label.empty() || taken) label = s.fresh_label();
    s.assumptions.push_back(Assumption{label, k.formula, k.key});
  }
  return s;
}

// ---------------------------------------------------------------- search

namespace {

constexpr std::size_t kBranchWidth = 4;

struct Abort {
  std::string reason;
};

bool same_situation(const ProofSituation& a, const ProofSituation& b) {
  if (!alpha_equal(a.goal, b.goal) || a.assumptions.size() != b.assumptions.size()) return false;
  auto covered = [](const ProofSituation& x, const ProofSituation& y) {
    return std::all_of(x.assumptions.begin(), x.assumptions.end(), [&](const Assumption& p) {
      return std::any_of(y.assumptions.begin(), y.assumptions.end(), [&](const Assumption& q) { return alpha_equal(p.formula, q.formula); });
    });
  };
  return covered(a, b) && covered(b, a);
}

class Search {
 public:
  Search(const ProverConfig& config, RuleContext ctx, const EventSink& sink, const std::atomic<bool>* cancel)
      : config_(config), ctx_(std::move(ctx)), sink_(sink), cancel_(cancel), start_(std::chrono::steady_clock::now()) {
    states_ = default_rule_states();
    for (const auto& [id, st] : config.rule_states) states_[id] = st;
  }

  ProofTree run(const ProofSituation& init) {
    try {
      const int root = add_situation(-1, init, NodeType::Initial);
      solve(root);
      tree_.reason = tree_.proved() ? "proved" : "exhausted";
    } catch (const Abort& a) {
      for (auto it = tree_.nodes.rbegin(); it != tree_.nodes.rend(); ++it) {
        if (it->status != NodeStatus::Pending) continue;
        auto folded = folded_status(tree_, *it);
        if (!folded) {
          set_status(it->id, NodeStatus::Failed, it->type == NodeType::And ? "" : a.reason);
        } else {
          set_status(it->id, *folded == NodeStatus::Pending ? NodeStatus::Failed : *folded);
        }
      }
      tree_.reason = tree_.proved() ? "proved" : a.reason == "cancelled" ? "cancelled" : "limit";
    }
    ProofEvent fin;
    fin.kind = "finished";
    fin.node_id = 0;
    fin.status = tree_.status();
    fin.reason = tree_.reason;
    emit(std::move(fin));
    return std::move(tree_);
  }

 private:
  void emit(ProofEvent e) {
    e.seq = seq_++;
    if (sink_) sink_(e);
  }

  void check_limits() {
    if (cancel_ && cancel_->load()) throw Abort{"cancelled"};
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (elapsed > config_.limits.timeout_seconds) throw Abort{"timeout"};
  }

  int add(int parent, NodeType type, NodeStatus status, bool explain, const std::string& rule_id, json payload) {
    if (!tree_.nodes.empty()) check_limits();
    if (static_cast<int>(tree_.nodes.size()) >= config_.limits.max_nodes) throw Abort{"node-limit"};
    ProofNode n;
    n.id = static_cast<int>(tree_.nodes.size());
    n.parent = parent;
    n.type = type;
    n.status = status;
    n.explain = explain;
    n.rule_id = rule_id;
    n.payload = std::move(payload);
    if (n.payload.is_object() && n.payload.contains("situation")) n.situation = situation_from_json(n.payload.at("situation"));
    if (parent >= 0) tree_.nodes[parent].children.push_back(n.id);
    ProofEvent e;
    e.kind = "node-added";
    e.node_id = n.id;
    if (parent >= 0) e.parent_id = parent;
    e.node_type = type;
    e.status = status;
    if (!rule_id.empty()) e.rule_id = rule_id;
    e.explain = explain;
    e.payload = n.payload;
    tree_.nodes.push_back(std::move(n));
    emit(std::move(e));
    return tree_.nodes.back().id;
  }

  void set_status(int id, NodeStatus st, const std::string& reason = "") {
    ProofNode& n = tree_.nodes[id];
    if (n.status == st && reason.empty()) return;
    n.status = st;
    if (!reason.empty()) n.reason = reason;
    ProofEvent e;
    e.kind = "status-changed";
    e.node_id = id;
    e.status = st;
    e.reason = reason;
    emit(std::move(e));
  }

  // Situations on the path from the root down to `id`.
  std::vector<const ProofSituation*> lineage(int id) const {
    std::vector<const ProofSituation*> out;
    for (int cur = id; cur >= 0; cur = tree_.nodes[cur].parent) {
      if (tree_.nodes[cur].situation) out.push_back(&*tree_.nodes[cur].situation);
    }
    return out;
  }

  int add_situation(int parent, const ProofSituation& s, NodeType type) {
    std::vector<RuleApplication> apps;
    if (s.depth < config_.limits.max_depth) {
      auto path = lineage(parent);
      for (auto& app : applicable_rules(s, states_, rule_list(), ctx_)) {
        const bool loops = std::any_of(app.produced.begin(), app.produced.end(), [&](const ProofSituation& p) {
          return same_situation(p, s) || std::any_of(path.begin(), path.end(), [&](const ProofSituation* q) { return same_situation(p, *q); });
        });
        if (!loops) apps.push_back(std::move(app));
      }
    }
    json applicable = json::array();
    for (const auto& a : apps) applicable.push_back(a.rule_id);
    const int id = add(parent, type, NodeStatus::Pending, type == NodeType::Initial, "",
                       {{"situation", situation_to_json(s)}, {"applicable", applicable}});
    apps_[id] = std::move(apps);
    return id;
  }

  int add_and(int parent, const RuleApplication& app) {
    const int id = add(parent, NodeType::And, NodeStatus::Pending, states_.at(app.rule_id).explain, app.rule_id, app.payload);
    if (app.produced.empty()) {
      add(id, NodeType::Terminal, NodeStatus::Proved, false, "", json::object());
    } else {
      for (const auto& p : app.produced) add_situation(id, p, NodeType::Situation);
    }
    return id;
  }

  bool explore_and(int id) {
    const std::vector<int> kids = tree_.nodes[id].children;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (tree_.nodes[kids[i]].type == NodeType::Terminal) continue;
      if (solve(kids[i]) == NodeStatus::Failed) {
        for (std::size_t k = i + 1; k < kids.size(); ++k) set_status(kids[k], NodeStatus::Pruned);
        set_status(id, NodeStatus::Failed);
        return false;
      }
    }
    set_status(id, NodeStatus::Proved);
    return true;
  }

  void prune(int id) {
    for (int c : tree_.nodes[id].children) prune(c);
    if (tree_.nodes[id].status == NodeStatus::Pending) set_status(id, NodeStatus::Pruned);
  }

  NodeStatus solve(int sid) {
    check_limits();
    const ProofSituation& s = *tree_.nodes[sid].situation;
    if (s.depth >= config_.limits.max_depth) {
      set_status(sid, NodeStatus::Failed, "depth");
      return NodeStatus::Failed;
    }
    const std::vector<RuleApplication> apps = apps_[sid];
    if (apps.empty()) {
      set_status(sid, NodeStatus::Failed, "no-rule");
      return NodeStatus::Failed;
    }
    if (config_.strategy == kBranchAlternatives && apps.size() >= 2) {
      const std::size_t width = std::min(apps.size(), kBranchWidth);
      const int or_id = add(sid, NodeType::Or, NodeStatus::Pending, false, "", {{"alternatives", width}});
      std::vector<int> alts;
      for (std::size_t i = 0; i < width; ++i) alts.push_back(add_and(or_id, apps[i]));
      for (std::size_t i = 0; i < alts.size(); ++i) {
        if (explore_and(alts[i])) {
          for (std::size_t k = i + 1; k < alts.size(); ++k) prune(alts[k]);
          set_status(or_id, NodeStatus::Proved);
          set_status(sid, NodeStatus::Proved);
          return NodeStatus::Proved;
        }
      }
      set_status(or_id, NodeStatus::Failed);
      set_status(sid, NodeStatus::Failed, "exhausted");
      return NodeStatus::Failed;
    }
    for (const auto& app : apps) {
      if (explore_and(add_and(sid, app))) {
        set_status(sid, NodeStatus::Proved);
        return NodeStatus::Proved;
      }
    }
    set_status(sid, NodeStatus::Failed, "exhausted");
    return NodeStatus::Failed;
  }

  const ProverConfig& config_;
  RuleContext ctx_;
  const EventSink& sink_;
  const std::atomic<bool>* cancel_;
  std::chrono::steady_clock::time_point start_;
  RuleStates states_;
  ProofTree tree_;
  std::map<int, std::vector<RuleApplication>> apps_;
  std::int64_t seq_ = 0;
};

}  // namespace

ProofTree prove(const FormulaEntry& goal, const std::vector<FormulaEntry>& knowledge, const SettingsSnapshot& snap,
                const EventSink& sink, const std::atomic<bool>* cancel) {
  validate_config(snap.config);
  RuleContext ctx{expand_builtins(snap.config.builtins)};
  Search search(snap.config, std::move(ctx), sink, cancel);
  return search.run(initial_situation(goal, knowledge));
}

ProofTree prove(const SettingsSnapshot& snap, const EventSink& sink, const std::atomic<bool>* cancel) {
  restore_settings(snap);
  return prove(snap.goal, snap.knowledge, snap, sink, cancel);
}

// ---------------------------------------------------------------- compute

namespace {

struct RewriteRule {
  std::string label;
  NameSet vars;
  std::optional<Formula> condition;
  Formula lhs, rhs;
};

std::vector<RewriteRule> rewrite_rules(const std::vector<FormulaEntry>& knowledge) {
  std::vector<RewriteRule> out;
  for (const auto& k : knowledge) {
    RewriteRule r{k.label, {}, std::nullopt, {}, {}};
    std::vector<Formula> conds;
    Formula g = k.formula;
    while (g.is(Kind::Forall)) {
      const Binder& b = g.binder();
      r.vars.insert(b.vars.begin(), b.vars.end());
      if (b.range) {
        conds.push_back(relation(Kind::Le, b.range->lo, variable(b.vars.front())));
        conds.push_back(relation(Kind::Le, variable(b.vars.front()), b.range->hi));
      }
      if (b.condition) conds.push_back(*b.condition);
      g = g.body();
    }
    if (!g.is(Kind::Eq) && !g.is(Kind::DefEq) && !g.is(Kind::DefIff) && !g.is(Kind::Iff)) continue;
    if (!conds.empty()) r.condition = conjunction(conds);
    r.lhs = g.lhs();
    r.rhs = g.rhs();
    out.push_back(std::move(r));
  }
  return out;
}

// Leftmost-outermost rewrite. Fills `step` and returns the new term, or nullopt.
std::optional<Formula> rewrite_once(const Formula& f, const std::vector<RewriteRule>& rules, const std::set<std::string>& builtins,
                                    std::vector<int>& path, ComputeStep& step) {
  for (const auto& r : rules) {
    Substitution sigma;
    if (!match(r.lhs, f, r.vars, sigma) || sigma.size() != r.vars.size()) continue;
    if (r.condition && !builtin_simplify(substitute(*r.condition, sigma), builtins).is(Kind::True)) continue;
    step.kind = "rewrite";
    step.rule = r.label;
    step.position = path;
    return substitute(r.rhs, sigma);
  }
  if (is_quantifier(f.kind())) {
    path.push_back(0);
    auto body = rewrite_once(f.body(), rules, builtins, path, step);
    path.pop_back();
    if (body) return quantifier(f.kind(), f.binder(), *body);
    return std::nullopt;
  }
  const auto& ch = children_of(f);
  for (std::size_t i = f.is(Kind::App) ? 1 : 0; i < ch.size(); ++i) {
    path.push_back(static_cast<int>(i));
    auto sub = rewrite_once(ch[i], rules, builtins, path, step);
    path.pop_back();
    if (sub) {
      std::vector<Formula> next(ch.begin(), ch.end());
      next[i] = *sub;
      return with_children(f, std::move(next));
    }
  }
  return std::nullopt;
}

}  // namespace

ComputeResult compute(const Formula& expr, const std::vector<FormulaEntry>& knowledge, const std::set<std::string>& builtins,
                      int max_steps) {
  const auto rules = rewrite_rules(knowledge);
  ComputeResult res{expr, {}};
  for (;;) {
    ComputeStep step;
    std::vector<int> path;
    auto next = rewrite_once(res.result, rules, builtins, path, step);
    if (!next) {
      std::vector<BuiltinNote> notes;
      Formula s = builtin_simplify(res.result, builtins, &notes);
      if (s == res.result) return res;
      step.kind = "builtin";
      step.rule = "builtins";
      next = s;
    }
    if (static_cast<int>(res.trace.size()) >= max_steps) throw StepLimitExceeded(res);
    step.result = *next;
    res.result = *next;
    res.trace.push_back(std::move(step));
  }
}

}  // namespace tma
