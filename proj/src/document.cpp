#include "tma/document.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "tma/errors.hpp"

namespace tma {

using nlohmann::json;

const char* to_string(CellKind k) {
  switch (k) {
    case CellKind::Formula: return "formula";
    case CellKind::Declaration: return "declaration";
    case CellKind::Text: return "text";
    case CellKind::ProofResult: return "proof_result";
  }
  return "?";
}

const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::Root: return "root";
    case GroupKind::Section: return "section";
    case GroupKind::Environment: return "environment";
  }
  return "?";
}

const char* to_string(EnvKind k) {
  switch (k) {
    case EnvKind::Definition: return "definition";
    case EnvKind::Theorem: return "theorem";
    case EnvKind::Lemma: return "lemma";
    case EnvKind::Proposition: return "proposition";
    case EnvKind::Corollary: return "corollary";
  }
  return "?";
}

std::optional<EnvKind> env_kind_from_string(std::string_view s) {
  for (EnvKind k : {EnvKind::Definition, EnvKind::Theorem, EnvKind::Lemma, EnvKind::Proposition, EnvKind::Corollary}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

CellId element_id(const Element& e) {
  if (const auto* c = std::get_if<Cell>(&e)) return c->id;
  return std::get<Box<CellGroup>>(e)->id;
}

std::string normalize_path(const std::string& path) {
  return std::filesystem::absolute(std::filesystem::path(path)).lexically_normal().string();
}

Document make_document(const std::string& path) {
  Document d;
  d.path = normalize_path(path);
  return d;
}

namespace {

std::int64_t read_id(const json& j) {
  if (!j.contains("id") || !j["id"].is_number_integer()) throw FormatError("element without integer 'id'");
  std::int64_t id = j["id"].get<std::int64_t>();
  if (id <= 0) throw FormatError("cell ids must be positive");
  return id;
}

std::string read_string(const json& j, const char* key, bool required = true) {
  if (!j.contains(key)) {
    if (required) throw FormatError(std::string("missing '") + key + "'");
    return {};
  }
  if (!j[key].is_string()) throw FormatError(std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

Element element_from_json(const json& j, GroupKind parent_kind, std::set<std::int64_t>& seen) {
  if (!j.is_object()) throw FormatError("element must be an object");
  const std::int64_t id = read_id(j);
  if (!seen.insert(id).second) throw DuplicateCellId("duplicate cell id " + std::to_string(id));
  const std::string kind = read_string(j, "kind");
  if (kind == "section" || kind == "environment") {
    CellGroup g;
    g.id = CellId{id};
    g.title = read_string(j, "title", false);
    if (kind == "section") {
      if (parent_kind == GroupKind::Environment) throw FormatError("a section cannot be nested in an environment");
      g.kind = GroupKind::Section;
      g.level = j.value("level", 1);
    } else {
      g.kind = GroupKind::Environment;
      auto env = env_kind_from_string(read_string(j, "env"));
      if (!env) throw FormatError("unknown environment kind '" + read_string(j, "env") + "'");
      g.env = *env;
    }
    if (j.contains("children")) {
      if (!j["children"].is_array()) throw FormatError("'children' must be an array");
      for (const auto& c : j["children"]) g.children.push_back(element_from_json(c, g.kind, seen));
    }
    return Box<CellGroup>(std::move(g));
  }
  Cell c;
  c.id = CellId{id};
  if (kind == "formula") {
    c.kind = CellKind::Formula;
    c.text = read_string(j, "text");
    if (j.contains("label")) c.label = read_string(j, "label");
  } else if (kind == "declaration") {
    c.kind = CellKind::Declaration;
    c.text = read_string(j, "text");
  } else if (kind == "text") {
    c.kind = CellKind::Text;
    c.text = read_string(j, "text");
  } else if (kind == "proof_result") {
    c.kind = CellKind::ProofResult;
    if (!j.contains("record") || !j["record"].is_object()) throw FormatError("proof_result without record");
    c.record = j["record"];
  } else {
    throw FormatError("unknown element kind '" + kind + "'");
  }
  return c;
}

json element_to_json(const Element& e) {
  if (const auto* c = std::get_if<Cell>(&e)) {
    json j = {{"id", c->id.serial}, {"kind", to_string(c->kind)}};
    if (c->kind == CellKind::ProofResult) {
      j["record"] = c->record;
    } else {
      j["text"] = c->text;
    }
    if (c->label) j["label"] = *c->label;
    return j;
  }
  const CellGroup& g = *std::get<Box<CellGroup>>(e);
  json j = {{"id", g.id.serial}, {"kind", to_string(g.kind)}, {"title", g.title}};
  if (g.kind == GroupKind::Section) j["level"] = g.level;
  if (g.kind == GroupKind::Environment) j["env"] = to_string(g.env);
  json children = json::array();
  for (const auto& c : g.children) children.push_back(element_to_json(c));
  j["children"] = std::move(children);
  return j;
}

template <class G, class F>
bool walk(G& group, F&& visit) {
  for (auto& e : group.children) {
    if (visit(e)) return true;
    if (auto* g = std::get_if<Box<CellGroup>>(&e)) {
      if (walk(**g, visit)) return true;
    }
  }
  return false;
}

bool path_to(const CellGroup& g, CellId id, std::vector<const CellGroup*>& chain) {
  chain.push_back(&g);
  for (const auto& e : g.children) {
    if (element_id(e) == id) return true;
    if (const auto* sub = std::get_if<Box<CellGroup>>(&e)) {
      if (path_to(**sub, id, chain)) return true;
    }
  }
  chain.pop_back();
  return false;
}

}  // namespace

Document document_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw FormatError("document must be a JSON object");
  if (!j.contains("version") || !j["version"].is_number_integer()) throw FormatError("document without version");
  if (j["version"].get<int>() != 1) throw VersionMismatch("unsupported document version " + j["version"].dump());
  Document d;
  d.path = normalize_path(path);
  std::set<std::int64_t> seen;
  if (j.contains("cells")) {
    if (!j["cells"].is_array()) throw FormatError("'cells' must be an array");
    for (const auto& c : j["cells"]) d.root.children.push_back(element_from_json(c, GroupKind::Root, seen));
  }
  const std::int64_t max_id = seen.empty() ? 0 : *seen.rbegin();
  d.next_cell_serial = std::max<std::int64_t>(j.value("next_cell_serial", std::int64_t{1}), max_id + 1);
  d.label_counter = j.value("label_counter", std::int64_t{0});
  return d;
}

json document_to_json(const Document& doc) {
  json cells = json::array();
  for (const auto& e : doc.root.children) cells.push_back(element_to_json(e));
  return {{"version", 1}, {"next_cell_serial", doc.next_cell_serial}, {"label_counter", doc.label_counter},
          {"cells", std::move(cells)}};
}

Document load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return document_from_json(j, path);
}

void save_document(const Document& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << document_to_json(doc).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

const Cell* find_cell(const Document& doc, CellId id) {
  const Cell* found = nullptr;
  walk(doc.root, [&](const Element& e) {
    if (const auto* c = std::get_if<Cell>(&e); c && c->id == id) found = c;
    return found != nullptr;
  });
  return found;
}

Cell* find_cell(Document& doc, CellId id) {
  return const_cast<Cell*>(find_cell(static_cast<const Document&>(doc), id));
}

const CellGroup* find_group(const Document& doc, CellId id) {
  if (id == kRootGroupId) return &doc.root;
  const CellGroup* found = nullptr;
  walk(doc.root, [&](const Element& e) {
    if (const auto* g = std::get_if<Box<CellGroup>>(&e); g && (*g)->id == id) found = &**g;
    return found != nullptr;
  });
  return found;
}

CellGroup* find_group(Document& doc, CellId id) {
  return const_cast<CellGroup*>(find_group(static_cast<const Document&>(doc), id));
}

std::vector<const CellGroup*> enclosing_groups(const Document& doc, CellId id) {
  std::vector<const CellGroup*> chain;
  if (!path_to(doc.root, id, chain)) throw UnknownCellId("unknown cell id " + std::to_string(id.serial));
  return chain;
}

std::vector<const Cell*> cells_in_group(const CellGroup& group) {
  std::vector<const Cell*> out;
  walk(group, [&](const Element& e) {
    if (const auto* c = std::get_if<Cell>(&e)) out.push_back(c);
    return false;
  });
  return out;
}

std::vector<const Cell*> cells_in_order(const Document& doc) { return cells_in_group(doc.root); }

std::size_t document_position(const Document& doc, CellId id) {
  std::size_t pos = 0;
  bool found = walk(doc.root, [&](const Element& e) {
    if (element_id(e) == id) return true;
    ++pos;
    return false;
  });
  if (!found) throw UnknownCellId("unknown cell id " + std::to_string(id.serial));
  return pos;
}

namespace {

CellGroup& require_group(Document& doc, CellId id) {
  CellGroup* g = find_group(doc, id);
  if (!g) throw UnknownGroup("unknown group " + std::to_string(id.serial));
  return *g;
}

CellId insert_element(Document& doc, CellId parent, std::size_t position, Element e) {
  CellGroup& g = require_group(doc, parent);
  if (const auto* sub = std::get_if<Box<CellGroup>>(&e);
      sub && (*sub)->kind == GroupKind::Section && g.kind == GroupKind::Environment) {
    throw FormatError("a section cannot be nested in an environment");
  }
  position = std::min(position, g.children.size());
  const CellId id = element_id(e);
  g.children.insert(g.children.begin() + static_cast<std::ptrdiff_t>(position), std::move(e));
  ++doc.next_cell_serial;
  return id;
}

}  // namespace

CellId insert_cell(Document& doc, CellId parent_group, std::size_t position, CellKind kind, std::string text,
                   std::optional<std::string> label) {
  require_group(doc, parent_group);
  Cell c;
  c.id = CellId{doc.next_cell_serial};
  c.kind = kind;
  c.text = std::move(text);
  c.label = std::move(label);
  return insert_element(doc, parent_group, position, std::move(c));
}

CellId insert_section(Document& doc, CellId parent_group, std::size_t position, int level, std::string title) {
  CellGroup g;
  g.id = CellId{doc.next_cell_serial};
  g.kind = GroupKind::Section;
  g.level = level;
  g.title = std::move(title);
  return insert_element(doc, parent_group, position, Box<CellGroup>(std::move(g)));
}

CellId insert_environment(Document& doc, CellId parent_group, std::size_t position, EnvKind env, std::string title) {
  CellGroup g;
  g.id = CellId{doc.next_cell_serial};
  g.kind = GroupKind::Environment;
  g.env = env;
  g.title = std::move(title);
  return insert_element(doc, parent_group, position, Box<CellGroup>(std::move(g)));
}

std::pair<CellGroup*, std::size_t> locate(Document& doc, CellId id) {
  auto chain = enclosing_groups(doc, id);
  auto* parent = const_cast<CellGroup*>(chain.back());
  for (std::size_t i = 0; i < parent->children.size(); ++i) {
    if (element_id(parent->children[i]) == id) return {parent, i};
  }
  throw UnknownCellId("unknown cell id " + std::to_string(id.serial));
}

void remove_element(Document& doc, CellId id) {
  auto [parent, index] = locate(doc, id);
  parent->children.erase(parent->children.begin() + static_cast<std::ptrdiff_t>(index));
}

}  // namespace tma
