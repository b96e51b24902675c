// Built-in computational knowledge: toggleable simplifiers for ground subterms.
//
// Members are grouped thematically; a member may sit in several groups. A selection
// is a set of member ids; group ids in a selection stand for all their members.
#pragma once

#include <set>
#include <string>
#include <vector>

#include "tma/formula.hpp"

namespace tma {

struct BuiltinMember {
  std::string id;
  std::string description_key;
};

struct BuiltinGroup {
  std::string id;  // arithmetic | logic | sets | tuples
  std::vector<std::string> members;
};

const std::vector<BuiltinMember>& builtin_members();
const std::vector<BuiltinGroup>& builtin_groups();

/// True for known member or group ids.
bool is_builtin_id(const std::string& id);

/// Expands group ids to their members. Throws std::invalid_argument on unknown ids.
std::set<std::string> expand_builtins(const std::set<std::string>& ids);

/// Every member id.
std::set<std::string> all_builtins();

/// Notes produced while simplifying (e.g. a division by zero that was left alone).
struct BuiltinNote {
  std::string member;
  std::string detail;
};

/// Bottom-up normalization with the active members, iterated to a fixpoint.
/// `active` may contain member or group ids. Symbols without active semantics stay untouched.
Formula builtin_simplify(const Formula& f, const std::set<std::string>& active, std::vector<BuiltinNote>* notes = nullptr);

}  // namespace tma
