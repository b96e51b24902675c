// Natural-language rendering of proof trees, node/text navigation, and the
// proof-result record written back next to the goal cell.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tma/document.hpp"
#include "tma/i18n.hpp"
#include "tma/prover.hpp"

namespace tma {

/// A formula label in the text together with the formula it stands for.
struct LabelRef {
  std::string label;
  FormulaKey key;
  std::string formula;
  friend bool operator==(const LabelRef&, const LabelRef&) = default;
};

struct TextBlock {
  int block_id = 0;
  int node_id = 0;
  int level = 0;  // number of explained ancestors
  std::string text;
  std::vector<LabelRef> refs;
  friend bool operator==(const TextBlock&, const TextBlock&) = default;
};

struct NavigationMap {
  std::map<int, std::vector<int>> node_to_blocks;
  std::map<int, int> block_to_node;
};

struct ProofDocument {
  std::string language;
  bool success = false;
  std::vector<TextBlock> blocks;
  NavigationMap navigation;
};

/// Blocks in depth-first order, one or more per explained node. Unexplained nodes
/// produce nothing; their descendants are told at the nearest explained ancestor's level.
ProofDocument render_proof(const ProofTree& tree, const I18n& i18n, const std::string& language);

/// Throw UnknownId for nodes without text and for unknown blocks.
const std::vector<int>& blocks_for_node(const NavigationMap& map, int node_id);
int node_for_block(const NavigationMap& map, int block_id);

std::string to_text(const ProofDocument& doc);
std::string to_html(const ProofDocument& doc);
nlohmann::json to_json(const ProofDocument& doc);

struct ProofResultRecord {
  std::string proof_id;
  bool success = false;
  SettingsSnapshot snapshot;
  std::string timestamp;  // ISO 8601, UTC
  std::string summary;
};

ProofResultRecord make_record(const std::string& proof_id, const ProofTree& tree, const SettingsSnapshot& snap,
                              const I18n& i18n, const std::string& language);
nlohmann::json to_json(const ProofResultRecord& r);
ProofResultRecord record_from_json(const nlohmann::json& j);

/// Puts the record in a proof-result cell right after the goal cell, replacing the
/// record of an earlier proof of the same goal. Throws UnknownCellId.
CellId write_back(Document& doc, CellId goal_cell, const ProofResultRecord& record);

}  // namespace tma
