// Prefix-form JSON encoding of formulas, used by archives, snapshots and the service.
#pragma once

#include "json.hpp"
#include "tma/formula.hpp"

namespace tma {

/// ["Forall", {"vars": [...], "cond": ..., "range": [lo, hi]}, body], ["App", head, args...],
/// ["Int", 3], ["Rat", 1, 2], ["Const", "f"], ["Var", "x"], ["True"], ...
nlohmann::json to_json(const Formula& f);

/// Throws FormatError on anything that is not a well-formed encoding.
Formula formula_from_json(const nlohmann::json& j);

}  // namespace tma
