#include "gdl/functions.hpp"

#include <cmath>

#include "gdl/error.hpp"

namespace gdl {

std::string_view to_string(FnOp op) {
  switch (op) {
    case FnOp::Add: return "+";
    case FnOp::Sub: return "-";
    case FnOp::Mul: return "*";
    case FnOp::Div: return "/";
    case FnOp::Ln: return "ln";
    case FnOp::Exp: return "exp";
    case FnOp::Neg: return "neg";
  }
  return "?";
}

std::optional<FnOp> fn_from_name(std::string_view name) {
  if (name == "ln") return FnOp::Ln;
  if (name == "exp") return FnOp::Exp;
  return std::nullopt;
}

std::size_t arity(FnOp op) {
  switch (op) {
    case FnOp::Ln:
    case FnOp::Exp:
    case FnOp::Neg: return 1;
    default: return 2;
  }
}

std::optional<ValueType> fn_result_type(FnOp op, std::span<const ValueType> args) {
  if (args.size() != arity(op)) return std::nullopt;
  for (auto t : args) {
    if (!is_numeric(t)) return std::nullopt;
  }
  switch (op) {
    case FnOp::Div:
    case FnOp::Ln:
    case FnOp::Exp: return ValueType::Real;
    case FnOp::Neg: return args[0];
    default:
      return args[0] == ValueType::Integer && args[1] == ValueType::Integer ? ValueType::Integer
                                                                           : ValueType::Real;
  }
}

namespace {

Value finite_real(double x, FnOp op) {
  if (!std::isfinite(x)) {
    throw Error(ErrorKind::OverflowToNonFinite,
                "result of '" + std::string(to_string(op)) + "' is not finite");
  }
  return Value::real(x);
}

[[noreturn]] void int_overflow(FnOp op) {
  throw Error(ErrorKind::OverflowToNonFinite,
              "integer overflow in '" + std::string(to_string(op)) + "'");
}

}  // namespace

Value apply_fn(FnOp op, std::span<const Value> args) {
  ValueType types[2] = {ValueType::Real, ValueType::Real};
  if (args.size() != arity(op)) {
    throw Error(ErrorKind::TypeMismatch, "'" + std::string(to_string(op)) + "' takes " +
                                             std::to_string(arity(op)) + " arguments");
  }
  for (std::size_t i = 0; i < args.size(); ++i) types[i] = args[i].type();
  auto result = fn_result_type(op, std::span<const ValueType>(types, args.size()));
  if (!result) {
    throw Error(ErrorKind::TypeMismatch,
                "'" + std::string(to_string(op)) + "' needs numeric arguments");
  }

  if (*result == ValueType::Integer) {
    std::int64_t a = args[0].as_integer(), out = 0;
    if (op == FnOp::Neg) {
      if (__builtin_sub_overflow(std::int64_t{0}, a, &out)) int_overflow(op);
      return Value::integer(out);
    }
    std::int64_t b = args[1].as_integer();
    bool overflow = false;
    switch (op) {
      case FnOp::Add: overflow = __builtin_add_overflow(a, b, &out); break;
      case FnOp::Sub: overflow = __builtin_sub_overflow(a, b, &out); break;
      case FnOp::Mul: overflow = __builtin_mul_overflow(a, b, &out); break;
      default: break;
    }
    if (overflow) int_overflow(op);
    return Value::integer(out);
  }

  double a = args[0].as_number();
  switch (op) {
    case FnOp::Neg: return finite_real(-a, op);
    case FnOp::Ln:
      if (!(a > 0)) {
        throw Error(ErrorKind::DomainError, "ln of nonpositive value " + format_real(a));
      }
      return finite_real(std::log(a), op);
    case FnOp::Exp: return finite_real(std::exp(a), op);
    default: break;
  }
  double b = args[1].as_number();
  switch (op) {
    case FnOp::Add: return finite_real(a + b, op);
    case FnOp::Sub: return finite_real(a - b, op);
    case FnOp::Mul: return finite_real(a * b, op);
    case FnOp::Div:
      if (b == 0) throw Error(ErrorKind::DomainError, "division by zero");
      return finite_real(a / b, op);
    default: break;
  }
  throw Error(ErrorKind::Unsupported, "unknown function");
}

}  // namespace gdl
