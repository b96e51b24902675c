#include "tma/session.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "tma/errors.hpp"
#include "tma/formula_json.hpp"

namespace tma {

using nlohmann::json;

std::string to_string(const FormulaKey& k) { return k.doc_path + "#" + std::to_string(k.cell_id.serial); }

FormulaKey parse_formula_key(const std::string& text) {
  const auto hash = text.rfind('#');
  if (hash == std::string::npos || hash == 0 || hash + 1 == text.size()) {
    throw std::invalid_argument("expected path#serial, got '" + text + "'");
  }
  const std::string num = text.substr(hash + 1);
  if (!std::all_of(num.begin(), num.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw std::invalid_argument("cell serial must be a number in '" + text + "'");
  }
  return FormulaKey{normalize_path(text.substr(0, hash)), CellId{std::stoll(num)}};
}

const char* to_string(CheckState s) {
  switch (s) {
    case CheckState::Unchecked: return "unchecked";
    case CheckState::Checked: return "checked";
    case CheckState::Partial: return "partial";
  }
  return "?";
}

namespace {

Formula apply_item(const Formula& f, const DeclarationItem& item) {
  if (const auto* let = std::get_if<LetDecl>(&item)) {
    return substitute(f, {{let->name, let->replacement}});
  }
  if (const auto* imp = std::get_if<ImplicationDecl>(&item)) {
    return implication(imp->lhs, f);
  }
  const Binder& b = std::get<QuantifierDecl>(item).binder;
  const NameSet free = free_variables(f);
  std::vector<std::string> keep;
  for (const auto& v : b.vars) {
    if (free.count(v)) keep.push_back(v);
  }
  if (keep.empty()) return f;
  // Variables of a multi-variable binder that its condition mentions go along.
  if (b.condition && keep.size() < b.vars.size()) {
    const NameSet in_cond = free_variables(*b.condition);
    std::vector<std::string> extended;
    for (const auto& v : b.vars) {
      if (free.count(v) || in_cond.count(v)) extended.push_back(v);
    }
    keep = std::move(extended);
  }
  Binder nb = b;
  nb.vars = std::move(keep);
  return forall(std::move(nb), f);
}

}  // namespace

Formula apply_declarations(const Formula& f, const std::vector<GlobalDeclaration>& decls) {
  Formula result = f;
  for (auto d = decls.rbegin(); d != decls.rend(); ++d) {
    for (auto item = d->items.rbegin(); item != d->items.rend(); ++item) result = apply_item(result, *item);
  }
  return result;
}

Document& Session::open_document(const std::string& path) { return add_document(load_document(path)); }

Document& Session::add_document(Document doc) {
  std::string p = doc.path;
  auto [it, inserted] = documents_.insert_or_assign(p, std::move(doc));
  return it->second;
}

Document* Session::document(const std::string& path) {
  auto it = documents_.find(path);
  if (it == documents_.end()) it = documents_.find(normalize_path(path));
  return it == documents_.end() ? nullptr : &it->second;
}

const Document* Session::document(const std::string& path) const {
  return const_cast<Session*>(this)->document(path);
}

void Session::save_document(const std::string& path) const {
  const Document* d = document(path);
  if (!d) throw UnknownUnit("document not open: " + path);
  tma::save_document(*d, d->path);
}

std::vector<GlobalDeclaration> Session::declarations_at(const std::string& doc_path, CellId cell) const {
  const Document* doc = document(doc_path);
  if (!doc) throw UnknownUnit("document not open: " + doc_path);
  const auto chain = enclosing_groups(*doc, cell);
  const std::size_t pos = document_position(*doc, cell);
  std::vector<GlobalDeclaration> out;
  for (const Cell* c : cells_in_order(*doc)) {
    if (c->kind != CellKind::Declaration) continue;
    if (document_position(*doc, c->id) >= pos) break;
    const CellGroup* scope = enclosing_groups(*doc, c->id).back();
    if (std::find(chain.begin(), chain.end(), scope) == chain.end()) continue;
    DeclarationOrigin origin{doc->path, c->id.serial};
    try {
      GlobalDeclaration d = parse_declaration(c->text);
      d.origin = origin;
      out.push_back(std::move(d));
    } catch (const ParseError& e) {
      throw CellParseError(e, origin);
    }
  }
  return out;
}

void Session::store(FormulaEntry e) {
  auto it = entries_.find(e.key);
  if (it == entries_.end()) {
    order_.push_back(e.key);
    entries_.emplace(e.key, std::move(e));
  } else {
    it->second = std::move(e);
  }
}

SubmitResult Session::submit_cell(const std::string& doc_path, CellId cell_id) {
  Document* doc = document(doc_path);
  if (!doc) throw UnknownUnit("document not open: " + doc_path);
  const Cell* cell = find_cell(*doc, cell_id);
  if (!cell) throw UnknownCellId("unknown cell id " + std::to_string(cell_id.serial));
  if (cell->kind != CellKind::Formula) throw NotAFormulaCell("cell " + std::to_string(cell_id.serial) + " is not a formula");

  Formula parsed;
  try {
    parsed = parse_formula(cell->text);
  } catch (const ParseError& e) {
    throw CellParseError(e, DeclarationOrigin{doc->path, cell_id.serial});
  }
  const Formula elaborated = freeze_free_variables(apply_declarations(parsed, declarations_at(doc->path, cell_id)));

  const FormulaKey key{doc->path, cell_id};
  SubmitResult result;
  std::string label;
  if (cell->label) {
    label = *cell->label;
    for (const auto& [k, e] : entries_) {
      if (k != key && e.label == label) {
        result.warnings.push_back(Warning{"warning.duplicate_label", {{"label", label}, {"other", to_string(k)}}});
        break;
      }
    }
  } else if (const auto* prior = entry(key)) {
    label = prior->label;
  } else {
    label = std::to_string(++doc->label_counter);
  }
  result.entry = FormulaEntry{key, label, elaborated, cell->text};
  store(result.entry);
  return result;
}

std::vector<SubmitResult> Session::submit_document(const std::string& doc_path) {
  const Document* doc = document(doc_path);
  if (!doc) throw UnknownUnit("document not open: " + doc_path);
  std::vector<CellId> ids;
  for (const Cell* c : cells_in_order(*doc)) {
    if (c->kind == CellKind::Formula) ids.push_back(c->id);
  }
  std::vector<SubmitResult> out;
  for (CellId id : ids) out.push_back(submit_cell(doc_path, id));
  return out;
}

std::vector<FormulaEntry> Session::all_formulae() const {
  std::vector<FormulaEntry> out;
  out.reserve(order_.size());
  for (const auto& k : order_) out.push_back(entries_.at(k));
  return out;
}

const FormulaEntry* Session::entry(const FormulaKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<FormulaEntry> Session::entries(const std::set<FormulaKey>& keys) const {
  std::vector<FormulaEntry> out;
  for (const auto& k : order_) {
    if (keys.count(k)) out.push_back(entries_.at(k));
  }
  return out;
}

void Session::save_archive(const std::set<FormulaKey>& selection, const std::string& path) const {
  if (selection.empty()) throw std::invalid_argument("cannot save an empty archive");
  json entries = json::array();
  for (const auto& k : selection) {
    const FormulaEntry* e = entry(k);
    if (!e) throw UnknownUnit("no formula with key " + to_string(k));
  }
  for (const auto& e : this->entries(selection)) {
    entries.push_back({{"doc_path", e.key.doc_path},
                       {"cell_id", e.key.cell_id.serial},
                       {"label", e.label},
                       {"source", e.source_text},
                       {"ast", to_json(e.formula)}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << json{{"version", 1}, {"entries", std::move(entries)}}.dump() << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::vector<FormulaEntry> Session::load_archive(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer()) {
    throw FormatError("archive without version");
  }
  if (j["version"].get<int>() != 1) throw VersionMismatch("unsupported archive version " + j["version"].dump());
  if (!j.contains("entries") || !j["entries"].is_array()) throw FormatError("archive without entries");
  std::vector<FormulaEntry> loaded;
  for (const auto& je : j["entries"]) {
    if (!je.is_object() || !je.contains("doc_path") || !je["doc_path"].is_string() || !je.contains("cell_id") ||
        !je["cell_id"].is_number_integer() || !je.contains("label") || !je["label"].is_string() || !je.contains("ast")) {
      throw FormatError("malformed archive entry");
    }
    FormulaEntry e;
    e.key = FormulaKey{je["doc_path"].get<std::string>(), CellId{je["cell_id"].get<std::int64_t>()}};
    e.label = je["label"].get<std::string>();
    e.formula = formula_from_json(je["ast"]);
    e.source_text = je.value("source", std::string{});
    loaded.push_back(std::move(e));
  }
  std::vector<FormulaKey> keys;
  for (const auto& e : loaded) {
    keys.push_back(e.key);
    store(e);
  }
  archives_[normalize_path(path)] = std::move(keys);
  return loaded;
}

std::vector<FormulaKey> Session::keys_of(const SelectionUnit& unit) const {
  switch (unit.kind) {
    case UnitKind::Formula: {
      const Document* d = document(unit.path);
      FormulaKey k{d ? d->path : unit.path, unit.id};
      if (!entry(k)) throw UnknownUnit("no formula with key " + to_string(k));
      return {k};
    }
    case UnitKind::Archive: {
      auto it = archives_.find(normalize_path(unit.path));
      if (it == archives_.end()) throw UnknownUnit("archive not loaded: " + unit.path);
      return it->second;
    }
    case UnitKind::Document:
    case UnitKind::Environment:
    case UnitKind::Section: {
      const Document* d = document(unit.path);
      if (!d) throw UnknownUnit("document not open: " + unit.path);
      const CellGroup* g = &d->root;
      if (unit.kind != UnitKind::Document) {
        g = find_group(*d, unit.id);
        const GroupKind want = unit.kind == UnitKind::Section ? GroupKind::Section : GroupKind::Environment;
        if (!g || g->kind != want) throw UnknownUnit("no such group " + std::to_string(unit.id.serial));
      }
      std::vector<FormulaKey> out;
      for (const Cell* c : cells_in_group(*g)) {
        FormulaKey k{d->path, c->id};
        if (c->kind == CellKind::Formula && entry(k)) out.push_back(k);
      }
      return out;
    }
  }
  return {};
}

const std::set<FormulaKey>& Session::set_selection(SelectionContext ctx, const SelectionUnit& unit, bool selected) {
  auto keys = keys_of(unit);
  auto& sel = ctx == SelectionContext::Prove ? prove_selection_ : compute_selection_;
  for (const auto& k : keys) {
    if (selected) {
      sel.insert(k);
    } else {
      sel.erase(k);
    }
  }
  return sel;
}

const std::set<FormulaKey>& Session::selection(SelectionContext ctx) const {
  return ctx == SelectionContext::Prove ? prove_selection_ : compute_selection_;
}

void Session::replace_selection(SelectionContext ctx, std::set<FormulaKey> keys) {
  for (const auto& k : keys) {
    if (!entry(k)) throw UnknownUnit("no formula with key " + to_string(k));
  }
  (ctx == SelectionContext::Prove ? prove_selection_ : compute_selection_) = std::move(keys);
}

CheckState Session::unit_state(SelectionContext ctx, const SelectionUnit& unit) const {
  const auto keys = keys_of(unit);
  const auto& sel = selection(ctx);
  const auto n = std::count_if(keys.begin(), keys.end(), [&](const FormulaKey& k) { return sel.count(k) > 0; });
  if (n == 0) return CheckState::Unchecked;
  return static_cast<std::size_t>(n) == keys.size() ? CheckState::Checked : CheckState::Partial;
}

const std::set<std::string>& Session::builtin_selection(SelectionContext ctx) const {
  return ctx == SelectionContext::Prove ? prove_builtins_ : compute_builtins_;
}

void Session::set_builtin_selection(SelectionContext ctx, std::set<std::string> ids) {
  (ctx == SelectionContext::Prove ? prove_builtins_ : compute_builtins_) = std::move(ids);
}

}  // namespace tma
