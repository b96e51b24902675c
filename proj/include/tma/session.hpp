// The formula session: elaboration of submitted cells under the global
// declarations in scope, labels and keys, knowledge selections and archives.
#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tma/document.hpp"
#include "tma/formula.hpp"
#include "tma/syntax.hpp"

namespace tma {

struct FormulaKey {
  std::string doc_path;
  CellId cell_id;
  friend auto operator<=>(const FormulaKey&, const FormulaKey&) = default;
};

/// "path#serial"
std::string to_string(const FormulaKey& k);
/// Inverse of to_string; throws std::invalid_argument.
FormulaKey parse_formula_key(const std::string& text);

struct FormulaEntry {
  FormulaKey key;
  std::string label;
  Formula formula;
  std::string source_text;
  friend bool operator==(const FormulaEntry&, const FormulaEntry&) = default;
};

/// A user-facing warning. `code` is a catalog key, `args` fill its slots.
struct Warning {
  std::string code;
  std::map<std::string, std::string> args;
  friend bool operator==(const Warning&, const Warning&) = default;
};

struct SubmitResult {
  FormulaEntry entry;
  std::vector<Warning> warnings;
};

/// A parse error in a specific cell.
class CellParseError : public ParseError {
 public:
  CellParseError(const ParseError& e, DeclarationOrigin origin)
      : ParseError(e.what(), e.span(), e.expected()), origin_(std::move(origin)) {}
  const DeclarationOrigin& origin() const { return origin_; }

 private:
  DeclarationOrigin origin_;
};

/// Applies declarations innermost (last) first. Lets substitute, orphaned implications
/// prepend their left-hand side, quantifiers wrap only the variables that are free.
Formula apply_declarations(const Formula& f, const std::vector<GlobalDeclaration>& decls);

enum class SelectionContext { Prove, Compute };
enum class UnitKind { Formula, Environment, Section, Document, Archive };
enum class CheckState { Unchecked, Checked, Partial };

const char* to_string(CheckState s);

struct SelectionUnit {
  UnitKind kind = UnitKind::Formula;
  std::string path;  // document or archive path
  CellId id;         // formula cell or group id
};

class Session {
 public:
  /// Loads (or reloads) a document from disk.
  Document& open_document(const std::string& path);
  /// Adds an in-memory document, replacing one with the same path.
  Document& add_document(Document doc);
  Document* document(const std::string& path);
  const Document* document(const std::string& path) const;
  const std::map<std::string, Document>& documents() const { return documents_; }
  void save_document(const std::string& path) const;

  /// Declaration cells whose scope covers `cell`, in document order.
  /// Throws UnknownCellId and CellParseError.
  std::vector<GlobalDeclaration> declarations_at(const std::string& doc_path, CellId cell) const;

  /// Elaborates and stores a formula cell. Throws UnknownCellId, NotAFormulaCell, CellParseError.
  SubmitResult submit_cell(const std::string& doc_path, CellId cell);
  /// Submits every formula cell of a document in document order.
  std::vector<SubmitResult> submit_document(const std::string& doc_path);

  std::vector<FormulaEntry> all_formulae() const;
  const FormulaEntry* entry(const FormulaKey& key) const;
  std::vector<FormulaEntry> entries(const std::set<FormulaKey>& keys) const;
  std::size_t size() const { return order_.size(); }

  /// Throws std::invalid_argument on an empty selection, IoError, UnknownUnit for unknown keys.
  void save_archive(const std::set<FormulaKey>& selection, const std::string& path) const;
  /// Throws FormatError / VersionMismatch / IoError.
  std::vector<FormulaEntry> load_archive(const std::string& path);
  const std::map<std::string, std::vector<FormulaKey>>& archives() const { return archives_; }

  /// Formula keys covered by a unit. Throws UnknownUnit.
  std::vector<FormulaKey> keys_of(const SelectionUnit& unit) const;
  const std::set<FormulaKey>& set_selection(SelectionContext ctx, const SelectionUnit& unit, bool selected);
  const std::set<FormulaKey>& selection(SelectionContext ctx) const;
  void replace_selection(SelectionContext ctx, std::set<FormulaKey> keys);
  CheckState unit_state(SelectionContext ctx, const SelectionUnit& unit) const;

  const std::set<std::string>& builtin_selection(SelectionContext ctx) const;
  void set_builtin_selection(SelectionContext ctx, std::set<std::string> ids);

 private:
  void store(FormulaEntry e);

  std::map<std::string, Document> documents_;
  std::map<FormulaKey, FormulaEntry> entries_;
  std::vector<FormulaKey> order_;
  std::map<std::string, std::vector<FormulaKey>> archives_;
  std::set<FormulaKey> prove_selection_, compute_selection_;
  std::set<std::string> prove_builtins_, compute_builtins_;
};

}  // namespace tma
