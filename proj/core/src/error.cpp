#include "gdl/error.hpp"

namespace gdl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSchema: return "InvalidSchema";
    case ErrorKind::UnknownRelation: return "UnknownRelation";
    case ErrorKind::UnknownAttribute: return "UnknownAttribute";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::NonFiniteReal: return "NonFiniteReal";
    case ErrorKind::ParamOutOfDomain: return "ParamOutOfDomain";
    case ErrorKind::ParamTypeMismatch: return "ParamTypeMismatch";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::OverflowToNonFinite: return "OverflowToNonFinite";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnsafeVariable: return "UnsafeVariable";
    case ErrorKind::HeadRelationExtensional: return "HeadRelationExtensional";
    case ErrorKind::DistParamArity: return "DistParamArity";
    case ErrorKind::MissingVariable: return "MissingVariable";
    case ErrorKind::RuntimeParamError: return "RuntimeParamError";
    case ErrorKind::NondeterministicProgram: return "NondeterministicProgram";
    case ErrorKind::EDBSchemaMismatch: return "EDBSchemaMismatch";
    case ErrorKind::NonNumericAggregate: return "NonNumericAggregate";
    case ErrorKind::InvalidQuery: return "InvalidQuery";
    case ErrorKind::AllWorldsCensored: return "AllWorldsCensored";
    case ErrorKind::InsufficientWorlds: return "InsufficientWorlds";
    case ErrorKind::DuplicateGroupRow: return "DuplicateGroupRow";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string render(ErrorKind kind, const std::string& message,
                   const std::optional<SourcePos>& pos) {
  std::string out(to_string(kind));
  if (pos) {
    out += " at line " + std::to_string(pos->line) + ", column " +
           std::to_string(pos->column);
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(render(kind, message, std::nullopt)),
      kind_(kind),
      detail_(message) {}

Error::Error(ErrorKind kind, const std::string& message, SourcePos pos)
    : std::runtime_error(render(kind, message, pos)),
      kind_(kind),
      pos_(pos),
      detail_(message) {}

}  // namespace gdl
