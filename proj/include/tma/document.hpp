// Hierarchical documents: nested sections and environments holding formula,
// declaration, prose and proof-result cells with persistent integer ids.
//
// File format (".tnb", UTF-8 JSON):
//   {"version": 1, "next_cell_serial": 12, "label_counter": 3,
//    "cells": [
//      {"id": 1, "kind": "section", "level": 1, "title": "Vickrey", "children": [...]},
//      {"id": 2, "kind": "environment", "env": "definition", "title": "...", "children": [...]},
//      {"id": 3, "kind": "formula", "text": "...", "label": "optional"},
//      {"id": 4, "kind": "declaration", "text": "..."},
//      {"id": 5, "kind": "text", "text": "..."},
//      {"id": 6, "kind": "proof_result", "record": {...}}]}
// The root group is implicit and always has id 0.
#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace tma {

struct CellId {
  std::int64_t serial = 0;
  friend auto operator<=>(const CellId&, const CellId&) = default;
};

inline constexpr CellId kRootGroupId{0};

enum class CellKind { Formula, Declaration, Text, ProofResult };
enum class GroupKind { Root, Section, Environment };
enum class EnvKind { Definition, Theorem, Lemma, Proposition, Corollary };

const char* to_string(CellKind k);
const char* to_string(GroupKind k);
const char* to_string(EnvKind k);
std::optional<EnvKind> env_kind_from_string(std::string_view s);

struct Cell {
  CellId id;
  CellKind kind = CellKind::Formula;
  std::string text;
  std::optional<std::string> label;
  // Proof-result cells only.
  nlohmann::json record;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct CellGroup;

/// Owning pointer with value semantics, for the recursive group structure.
template <class T>
class Box {
 public:
  Box(T v) : p_(std::make_unique<T>(std::move(v))) {}  // NOLINT: implicit by intent
  Box(const Box& o) : p_(std::make_unique<T>(*o.p_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& o) {
    if (this != &o) p_ = std::make_unique<T>(*o.p_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  T& operator*() { return *p_; }
  const T& operator*() const { return *p_; }
  T* operator->() { return p_.get(); }
  const T* operator->() const { return p_.get(); }
  friend bool operator==(const Box& a, const Box& b) { return *a.p_ == *b.p_; }

 private:
  std::unique_ptr<T> p_;
};

using Element = std::variant<Cell, Box<CellGroup>>;

struct CellGroup {
  CellId id;
  GroupKind kind = GroupKind::Root;
  int level = 0;                       // sections
  EnvKind env = EnvKind::Definition;   // environments
  std::string title;
  std::vector<Element> children;
  friend bool operator==(const CellGroup&, const CellGroup&) = default;
};

CellId element_id(const Element& e);

struct Document {
  std::string path;  // absolute, normalized
  CellGroup root{kRootGroupId, GroupKind::Root, 0, EnvKind::Definition, {}, {}};
  std::int64_t next_cell_serial = 1;
  std::int64_t label_counter = 0;
  friend bool operator==(const Document&, const Document&) = default;
};

std::string normalize_path(const std::string& path);

Document make_document(const std::string& path);

Document load_document(const std::string& path);
/// Parses the JSON form; `path` is recorded as the document's path.
Document document_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json document_to_json(const Document& doc);
void save_document(const Document& doc, const std::string& path);

const Cell* find_cell(const Document& doc, CellId id);
Cell* find_cell(Document& doc, CellId id);
const CellGroup* find_group(const Document& doc, CellId id);
CellGroup* find_group(Document& doc, CellId id);

/// Groups containing `id`, outermost first; the last entry is the tightest one.
/// Throws UnknownCellId.
std::vector<const CellGroup*> enclosing_groups(const Document& doc, CellId id);

/// All cells in document (pre-order) order.
std::vector<const Cell*> cells_in_order(const Document& doc);
/// Cells inside `group`, in document order, any depth.
std::vector<const Cell*> cells_in_group(const CellGroup& group);

/// Position of `id` in the pre-order traversal of all elements (groups and cells).
std::size_t document_position(const Document& doc, CellId id);

/// Inserts a new cell at `position` among the parent's children (clamped to the end).
/// Throws UnknownGroup.
CellId insert_cell(Document& doc, CellId parent_group, std::size_t position, CellKind kind, std::string text,
                   std::optional<std::string> label = std::nullopt);

CellId insert_section(Document& doc, CellId parent_group, std::size_t position, int level, std::string title);
CellId insert_environment(Document& doc, CellId parent_group, std::size_t position, EnvKind env, std::string title);

/// Removes a cell or group. Serials are never reused. Throws UnknownCellId.
void remove_element(Document& doc, CellId id);

/// Parent group of `id` and the index of `id` in its children.
std::pair<CellGroup*, std::size_t> locate(Document& doc, CellId id);

}  // namespace tma
