#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gdl {

enum class ErrorKind {
  // schema and facts
  InvalidSchema,
  UnknownRelation,
  UnknownAttribute,
  ArityMismatch,
  TypeMismatch,
  SchemaMismatch,
  NonFiniteReal,
  // distributions and functions
  ParamOutOfDomain,
  ParamTypeMismatch,
  Unsupported,
  DomainError,
  OverflowToNonFinite,
  // programs
  SyntaxError,
  UnsafeVariable,
  HeadRelationExtensional,
  DistParamArity,
  MissingVariable,
  // chase
  RuntimeParamError,
  NondeterministicProgram,
  EDBSchemaMismatch,
  // queries
  NonNumericAggregate,
  InvalidQuery,
  // estimation
  AllWorldsCensored,
  InsufficientWorlds,
  DuplicateGroupRow,
  // plumbing
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

struct SourcePos {
  int line = 0;
  int column = 0;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

// Every failure surfaced by the library is a gdl::Error carrying a kind that
// callers (tests, CLI exit codes) can branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  Error(ErrorKind kind, const std::string& message, SourcePos pos);

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<SourcePos>& pos() const noexcept { return pos_; }
  // Message without the "Kind: " prefix and position.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::optional<SourcePos> pos_;
  std::string detail_;
};

}  // namespace gdl
