// Error types shared across modules. Syntax errors live in syntax.hpp.
#pragma once

#include <stdexcept>
#include <string>

namespace tma {

/// Malformed document, archive, snapshot or catalog content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A referenced entity (cell, group, unit, proof, rule, key) does not exist.
class UnknownId : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownCellId : public UnknownId {
 public:
  using UnknownId::UnknownId;
};

class UnknownGroup : public UnknownId {
 public:
  using UnknownId::UnknownId;
};

class DuplicateCellId : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tma

namespace tma {

/// A selection unit (formula key, group, document, archive) that cannot be resolved.
class UnknownUnit : public UnknownId {
 public:
  using UnknownId::UnknownId;
};

class NotAFormulaCell : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tma
