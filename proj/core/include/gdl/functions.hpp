#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "gdl/value.hpp"

namespace gdl {

// Deterministic scalar functions usable inside head terms.
enum class FnOp { Add, Sub, Mul, Div, Ln, Exp, Neg };

std::string_view to_string(FnOp op);
std::optional<FnOp> fn_from_name(std::string_view name);  // "ln", "exp"
std::size_t arity(FnOp op);

// Integer (+, -, *, neg) on integers stays integer with overflow checked;
// division, ln, and exp always yield reals; mixed operands widen to real.
// Returns nullopt when the operand types are not admissible.
std::optional<ValueType> fn_result_type(FnOp op, std::span<const ValueType> args);

// Errors: TypeMismatch (wrong arity or operand types), DomainError (ln of a
// nonpositive value, division by zero), OverflowToNonFinite.
Value apply_fn(FnOp op, std::span<const Value> args);

}  // namespace gdl
