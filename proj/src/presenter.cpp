#include "tma/presenter.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "tma/errors.hpp"
#include "tma/syntax.hpp"

namespace tma {

using nlohmann::json;

namespace {

bool is_label_slot(const std::string& slot) {
  return slot == "label" || slot == "label2" || slot == "labels" || slot == "refs";
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

std::string scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

std::vector<std::string> items(const json& v) {
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(scalar(x));
  } else {
    out.push_back(scalar(v));
  }
  return out;
}

std::string template_id(const ProofNode& n) {
  const json& p = n.payload;
  if (n.rule_id == "modus-ponens" && p.contains("direction")) return n.rule_id + "." + p["direction"].get<std::string>();
  if (n.rule_id == "expand-definition" && p.contains("target")) return n.rule_id + "." + p["target"].get<std::string>();
  if (n.rule_id == "forall-goal-intro") {
    if (p.contains("cases")) return n.rule_id + ".cases";
    if (p.contains("assumption")) return n.rule_id + ".conditioned";
  }
  return n.rule_id;
}

// The situation a node was derived from: the node's own, or the nearest ancestor's.
const ProofSituation* situation_of(const ProofTree& t, int id) {
  for (int cur = id; cur >= 0; cur = t.nodes[cur].parent) {
    if (t.nodes[cur].situation) return &*t.nodes[cur].situation;
  }
  return nullptr;
}

class Renderer {
 public:
  Renderer(const ProofTree& t, const I18n& i18n, const std::string& lang) : t_(t), i18n_(i18n), lang_(lang) {
    doc_.language = i18n.effective_language(lang);
    doc_.success = t.proved();
  }

  ProofDocument run() {
    if (t_.nodes.empty()) return doc_;
    visit(0, 0);
    if (t_.root().explain) add(0, 0, conclusion(), {});
    return std::move(doc_);
  }

 private:
  void add(int node, int level, std::string text, std::vector<LabelRef> refs) {
    TextBlock b{static_cast<int>(doc_.blocks.size()), node, level, std::move(text), std::move(refs)};
    doc_.navigation.node_to_blocks[node].push_back(b.block_id);
    doc_.navigation.block_to_node[b.block_id] = node;
    doc_.blocks.push_back(std::move(b));
  }

  // "(L)" for each label; keyed labels are also returned as references.
  std::string labels(const std::vector<std::string>& ls, const ProofSituation* s, std::vector<LabelRef>& refs) {
    std::vector<std::string> shown;
    for (const auto& l : ls) {
      shown.push_back("(" + l + ")");
      if (!s) continue;
      for (const auto& a : s->assumptions) {
        if (a.label != l || !a.key) continue;
        LabelRef r{l, *a.key, format(a.formula, Style::Unicode)};
        if (std::find(refs.begin(), refs.end(), r) == refs.end()) refs.push_back(r);
      }
    }
    return join(shown);
  }

  void visit(int id, int level) {
    const ProofNode& n = t_.nodes[id];
    if (n.explain) {
      std::vector<LabelRef> refs;
      std::string text;
      const ProofSituation* s = situation_of(t_, id);
      if (n.type == NodeType::Initial || n.type == NodeType::Situation) {
        std::vector<std::string> kb;
        for (const auto& a : n.situation->assumptions) kb.push_back(a.label);
        Slots slots{{"goal", format(n.situation->goal, Style::Unicode)}};
        if (kb.empty()) {
          text = i18n_.text("proof.intro", lang_, slots);
        } else {
          slots["refs"] = labels(kb, s, refs);
          text = i18n_.text("proof.intro_kb", lang_, slots);
        }
      } else if (n.type == NodeType::And) {
        text = step_text(n, situation_of(t_, n.parent), refs);
      } else {
        text = i18n_.lookup(std::string("node.") + to_string(n.type), lang_);
      }
      add(id, level, std::move(text), std::move(refs));
    }
    for (int c : n.children) visit(c, level + (n.explain ? 1 : 0));
  }

  std::string step_text(const ProofNode& n, const ProofSituation* s, std::vector<LabelRef>& refs) {
    auto pattern = i18n_.template_text(template_id(n), lang_);
    if (!pattern) pattern = i18n_.template_text(n.rule_id, lang_);
    if (!pattern) pattern = i18n_.lookup("rule." + n.rule_id, lang_) + ".";
    Slots slots;
    for (const auto& [key, value] : n.payload.items()) {
      slots[key] = is_label_slot(key) ? labels(items(value), s, refs) : join(items(value));
    }
    std::string text = fill(*pattern, slots);
    if (n.status == NodeStatus::Failed) text += " " + i18n_.lookup("proof.attempt_failed", lang_);
    if (n.status == NodeStatus::Pruned) text += " " + i18n_.lookup("proof.attempt_pruned", lang_);
    if (n.status == NodeStatus::Pending) text += " " + i18n_.lookup("proof.attempt_open", lang_);
    return text;
  }

  std::string conclusion() {
    if (t_.proved()) return i18n_.lookup("proof.success", lang_);
    const ProofNode* deepest = &t_.root();
    for (const auto& n : t_.nodes) {
      if (n.situation && n.status == NodeStatus::Failed && n.situation->depth > deepest->situation->depth) deepest = &n;
    }
    return i18n_.text("proof.failure", lang_,
                      {{"depth", std::to_string(deepest->situation->depth)}, {"goal", format(deepest->situation->goal, Style::Unicode)}});
  }

  const ProofTree& t_;
  const I18n& i18n_;
  const std::string& lang_;
  ProofDocument doc_;
};

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ProofDocument render_proof(const ProofTree& tree, const I18n& i18n, const std::string& language) {
  return Renderer(tree, i18n, language).run();
}

const std::vector<int>& blocks_for_node(const NavigationMap& map, int node_id) {
  auto it = map.node_to_blocks.find(node_id);
  if (it == map.node_to_blocks.end()) throw UnknownId("node has no text: " + std::to_string(node_id));
  return it->second;
}

int node_for_block(const NavigationMap& map, int block_id) {
  auto it = map.block_to_node.find(block_id);
  if (it == map.block_to_node.end()) throw UnknownId("unknown block: " + std::to_string(block_id));
  return it->second;
}

std::string to_text(const ProofDocument& doc) {
  std::string out;
  for (const auto& b : doc.blocks) out += std::string(2 * static_cast<std::size_t>(b.level), ' ') + b.text + "\n";
  return out;
}

std::string to_html(const ProofDocument& doc) {
  std::string out = "<!DOCTYPE html>\n<html lang=\"" + html_escape(doc.language) + "\">\n<head><meta charset=\"utf-8\"></head>\n<body>\n";
  out += "<div class=\"proof\">\n";
  for (const auto& b : doc.blocks) {
    std::string text = html_escape(b.text);
    for (const auto& r : b.refs) {
      const std::string shown = "(" + html_escape(r.label) + ")";
      const std::string span = "<span class=\"label\" title=\"" + html_escape(r.formula) + "\" data-key=\"" +
                               html_escape(to_string(r.key)) + "\">" + shown + "</span>";
      std::string replaced;
      std::size_t pos = 0, hit;
      while ((hit = text.find(shown, pos)) != std::string::npos) {
        replaced += text.substr(pos, hit - pos) + span;
        pos = hit + shown.size();
      }
      text = replaced + text.substr(pos);
    }
    out += "<p class=\"block\" id=\"block-" + std::to_string(b.block_id) + "\" data-node=\"" + std::to_string(b.node_id) +
           "\" style=\"margin-left:" + std::to_string(b.level * 2) + "em\">" + text + "</p>\n";
  }
  out += "</div>\n</body>\n</html>\n";
  return out;
}

json to_json(const ProofDocument& doc) {
  json blocks = json::array();
  for (const auto& b : doc.blocks) {
    json refs = json::array();
    for (const auto& r : b.refs) refs.push_back({{"label", r.label}, {"key", to_string(r.key)}, {"formula", r.formula}});
    blocks.push_back({{"block_id", b.block_id}, {"node_id", b.node_id}, {"level", b.level}, {"text", b.text}, {"refs", refs}});
  }
  json n2b = json::object(), b2n = json::object();
  for (const auto& [n, bs] : doc.navigation.node_to_blocks) n2b[std::to_string(n)] = bs;
  for (const auto& [b, n] : doc.navigation.block_to_node) b2n[std::to_string(b)] = n;
  return {{"language", doc.language},
          {"success", doc.success},
          {"blocks", blocks},
          {"navigation", {{"node_to_blocks", n2b}, {"block_to_node", b2n}}}};
}

ProofResultRecord make_record(const std::string& proof_id, const ProofTree& tree, const SettingsSnapshot& snap,
                              const I18n& i18n, const std::string& language) {
  ProofResultRecord r{proof_id, tree.proved(), snap, utc_now(), {}};
  RuleStates states = default_rule_states();
  for (const auto& [id, st] : snap.config.rule_states) states[id] = st;
  const auto active = std::count_if(states.begin(), states.end(), [](const auto& kv) { return kv.second.active; });
  std::vector<std::string> builtins(snap.config.builtins.begin(), snap.config.builtins.end());
  r.summary = i18n.lookup(r.success ? "summary.proved" : "summary.failed", language) + ". " +
              i18n.text("summary.settings", language,
                        {{"strategy", snap.config.strategy},
                         {"rules", std::to_string(active)},
                         {"kb", std::to_string(snap.knowledge.size())},
                         {"builtins", builtins.empty() ? i18n.lookup("proof.none", language) : join(builtins)}});
  return r;
}

json to_json(const ProofResultRecord& r) {
  return {{"proof_id", r.proof_id},
          {"success", r.success},
          {"snapshot", to_json(r.snapshot)},
          {"timestamp", r.timestamp},
          {"summary", r.summary},
          {"goal_cell", r.snapshot.goal.key.cell_id.serial}};
}

ProofResultRecord record_from_json(const json& j) {
  try {
    return ProofResultRecord{j.at("proof_id").get<std::string>(), j.at("success").get<bool>(), snapshot_from_json(j.at("snapshot")),
                             j.at("timestamp").get<std::string>(), j.at("summary").get<std::string>()};
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed proof record: ") + e.what());
  }
}

CellId write_back(Document& doc, CellId goal_cell, const ProofResultRecord& record) {
  if (!find_cell(doc, goal_cell)) throw UnknownCellId("unknown goal cell: " + std::to_string(goal_cell.serial));
  auto [group, index] = locate(doc, goal_cell);
  json rec = to_json(record);
  rec["goal_cell"] = goal_cell.serial;
  if (index + 1 < group->children.size()) {
    if (auto* next = std::get_if<Cell>(&group->children[index + 1]);
        next && next->kind == CellKind::ProofResult && next->record.value("goal_cell", std::int64_t{-1}) == goal_cell.serial) {
      next->record = rec;
      next->text = record.summary;
      return next->id;
    }
  }
  const CellId id = insert_cell(doc, group->id, index + 1, CellKind::ProofResult, record.summary);
  find_cell(doc, id)->record = rec;
  return id;
}

}  // namespace tma
