// Generic proof search over proof situations, driven by a nested inference-rule
// list and a strategy. Also the Compute activity's rewriting.
#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tma/formula.hpp"
#include "tma/session.hpp"

namespace tma {

class InvalidSnapshot : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownStrategy : public InvalidSnapshot {
 public:
  using InvalidSnapshot::InvalidSnapshot;
};

// ---------------------------------------------------------------- situations

struct Assumption {
  std::string label;
  Formula formula;
  std::optional<FormulaKey> key;  // set for knowledge-base formulas
  friend bool operator==(const Assumption&, const Assumption&) = default;
};

struct ProofSituation {
  Formula goal;
  std::vector<Assumption> assumptions;
  std::set<std::string> constants;  // introduced by the proof
  int depth = 0;
  friend bool operator==(const ProofSituation&, const ProofSituation&) = default;

  /// Label not yet used by any assumption: "A1", "A2", ...
  std::string fresh_label() const;
  Assumption& assume(Formula f);
};

// ---------------------------------------------------------------- rules

struct RuleApplication {
  std::string rule_id;
  std::vector<ProofSituation> produced;  // empty: goal discharged
  nlohmann::json payload = nlohmann::json::object();  // template slots for the presenter
};

struct RuleContext {
  std::set<std::string> builtins;  // expanded member ids
};

struct InferenceRule {
  std::string id;
  std::vector<std::string> group_path;
  int default_priority = 50;
  bool default_explain = true;
  std::string description_key;
  std::function<std::vector<RuleApplication>(const ProofSituation&, const RuleContext&)> applicability;
};

struct RuleGroup {
  std::string id;
  std::vector<std::string> rule_ids;
};

/// The baseline rule list in list order.
const std::vector<InferenceRule>& rule_list();
/// Top-level groups of the rule list.
const std::vector<RuleGroup>& rule_groups();
const InferenceRule* find_rule(const std::string& id);

struct RuleState {
  std::string rule_id;
  bool active = true;
  int priority = 50;  // 1..100, smaller is tried earlier
  bool explain = true;
  friend bool operator==(const RuleState&, const RuleState&) = default;
};

using RuleStates = std::map<std::string, RuleState>;
RuleStates default_rule_states();

/// Active rules' applications in ascending priority, ties broken by list order.
std::vector<RuleApplication> applicable_rules(const ProofSituation& s, const RuleStates& states,
                                              const std::vector<InferenceRule>& rules, const RuleContext& ctx);

/// One-sided matching: Vars in `vars` match any term, everything else literally.
bool match(const Formula& pattern, const Formula& term, const NameSet& vars, Substitution& bindings);

// ---------------------------------------------------------------- settings

struct Limits {
  int max_depth = 32;
  int max_nodes = 5000;
  double timeout_seconds = 10.0;
  friend bool operator==(const Limits&, const Limits&) = default;
};

inline const char* kApplyFirst = "apply-first";
inline const char* kBranchAlternatives = "branch-alternatives";
const std::vector<std::string>& strategy_ids();

/// The interactive prover configuration.
struct ProverConfig {
  std::optional<FormulaKey> goal;
  std::set<FormulaKey> knowledge;
  std::set<std::string> builtins;
  RuleStates rule_states = default_rule_states();
  std::string strategy = kApplyFirst;
  Limits limits;
  std::string language = "en";
  friend bool operator==(const ProverConfig&, const ProverConfig&) = default;
};

/// Everything needed to rerun a proof, including the formulas themselves.
struct SettingsSnapshot {
  ProverConfig config;
  FormulaEntry goal;
  std::vector<FormulaEntry> knowledge;
  friend bool operator==(const SettingsSnapshot&, const SettingsSnapshot&) = default;
};

/// Throws InvalidSnapshot when the goal or a knowledge key is not in the session.
SettingsSnapshot snapshot(const ProverConfig& config, const Session& session);
/// Validates ids and ranges. Throws InvalidSnapshot / UnknownStrategy.
ProverConfig restore_settings(const SettingsSnapshot& snap);
void validate_config(const ProverConfig& config);

nlohmann::json to_json(const RuleState& r);
nlohmann::json to_json(const Limits& l);
nlohmann::json to_json(const ProverConfig& c);
nlohmann::json to_json(const SettingsSnapshot& s);
ProverConfig config_from_json(const nlohmann::json& j);
SettingsSnapshot snapshot_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- proof trees

enum class NodeType { Initial, Situation, And, Or, Terminal };
enum class NodeStatus { Pending, Proved, Failed, Pruned };

const char* to_string(NodeType t);
const char* to_string(NodeStatus s);
NodeType node_type_from_string(const std::string& s);
NodeStatus node_status_from_string(const std::string& s);

struct ProofNode {
  int id = 0;
  int parent = -1;
  NodeType type = NodeType::Situation;
  NodeStatus status = NodeStatus::Pending;
  std::vector<int> children;
  bool explain = false;
  std::string rule_id;                   // And nodes
  std::optional<ProofSituation> situation;  // Initial and Situation nodes
  nlohmann::json payload = nlohmann::json::object();
  std::string reason;  // why a situation failed: no-rule, exhausted, depth, node-limit, timeout, cancelled
};

struct ProofTree {
  std::vector<ProofNode> nodes;
  std::string reason;  // overall: proved, exhausted, limit, cancelled

  const ProofNode& root() const { return nodes.at(0); }
  NodeStatus status() const { return nodes.empty() ? NodeStatus::Pending : root().status; }
  bool proved() const { return status() == NodeStatus::Proved; }
  int depth() const;
};

struct ProofEvent {
  std::int64_t seq = 0;
  std::string kind;  // node-added | status-changed | finished
  int node_id = 0;
  std::optional<int> parent_id;
  std::optional<NodeType> node_type;
  std::optional<NodeStatus> status;
  std::optional<std::string> rule_id;
  std::optional<bool> explain;
  nlohmann::json payload;  // node-added: situation and rule payload
  std::string reason;       // finished / failed situations
};

nlohmann::json to_json(const ProofEvent& e);
ProofEvent event_from_json(const nlohmann::json& j);

using EventSink = std::function<void(const ProofEvent&)>;

/// Canonical serialization (stable key order, no whitespace differences).
nlohmann::json tree_to_json(const ProofTree& t);
std::string canonical_string(const ProofTree& t);
/// Rebuilds a tree from its event stream.
ProofTree replay(const std::vector<ProofEvent>& events);

/// Status a node must have given its children; nullopt when the node is a leaf.
/// For situations whose children all failed this returns Failed; callers that check
/// mid-search also accept Pending there.
std::optional<NodeStatus> folded_status(const ProofTree& t, const ProofNode& n);

nlohmann::json situation_to_json(const ProofSituation& s);
ProofSituation situation_from_json(const nlohmann::json& j);

/// The initial situation: goal plus knowledge formulas as labelled assumptions.
ProofSituation initial_situation(const FormulaEntry& goal, const std::vector<FormulaEntry>& knowledge);

/// Runs the configured strategy. Throws InvalidSnapshot for unknown rule or strategy ids.
ProofTree prove(const FormulaEntry& goal, const std::vector<FormulaEntry>& knowledge, const SettingsSnapshot& snap,
                const EventSink& sink = {}, const std::atomic<bool>* cancel = nullptr);
ProofTree prove(const SettingsSnapshot& snap, const EventSink& sink = {}, const std::atomic<bool>* cancel = nullptr);

// ---------------------------------------------------------------- compute

struct ComputeStep {
  std::string kind;  // rewrite | builtin
  std::string rule;  // label of the knowledge formula, or the built-in members involved
  std::vector<int> position;
  Formula result;
};

struct ComputeResult {
  Formula result;
  std::vector<ComputeStep> trace;
};

class StepLimitExceeded : public std::runtime_error {
 public:
  StepLimitExceeded(ComputeResult partial)
      : std::runtime_error("step limit exceeded"), partial_(std::move(partial)) {}
  const ComputeResult& partial() const { return partial_; }

 private:
  ComputeResult partial_;
};

ComputeResult compute(const Formula& expr, const std::vector<FormulaEntry>& knowledge,
                      const std::set<std::string>& builtins, int max_steps = 1000);

}  // namespace tma
