#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace gdl {

enum class ValueType : std::uint8_t { Real = 0, Integer = 1, String = 2, Boolean = 3 };

std::string_view to_string(ValueType type);
std::optional<ValueType> value_type_from_name(std::string_view name);

inline bool is_numeric(ValueType t) {
  return t == ValueType::Real || t == ValueType::Integer;
}

// An element of the universe: a finite real, a 64-bit integer, a UTF-8
// string, or a boolean. Reals are finite and -0.0 is stored as +0.0.
class Value {
 public:
  Value() : v_(std::int64_t{0}) {}

  static Value real(double x);
  static Value integer(std::int64_t x) { return Value(Payload(x)); }
  static Value string(std::string s) { return Value(Payload(std::move(s))); }
  static Value boolean(bool b) { return Value(Payload(b)); }

  ValueType type() const noexcept { return static_cast<ValueType>(v_.index()); }
  bool is_real() const noexcept { return type() == ValueType::Real; }
  bool is_integer() const noexcept { return type() == ValueType::Integer; }
  bool is_numeric() const noexcept { return gdl::is_numeric(type()); }

  // Typed accessors throw TypeMismatch on the wrong alternative.
  double as_real() const;
  std::int64_t as_integer() const;
  const std::string& as_string() const;
  bool as_boolean() const;
  // Real or integer widened to double.
  double as_number() const;

  friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

  std::size_t hash() const noexcept;

 private:
  using Payload = std::variant<double, std::int64_t, std::string, bool>;
  explicit Value(Payload p) : v_(std::move(p)) {}
  Payload v_;
};

// Integer-to-real widening where the target type is real; identity otherwise.
// Throws TypeMismatch when the value cannot inhabit `target`.
Value coerce(const Value& v, ValueType target);
bool assignable(ValueType from, ValueType to);

// Shortest round-trip decimal form that always carries a '.' or exponent.
std::string format_real(double x);
// Literal syntax: reals via format_real, strings double-quoted and escaped.
std::string to_string(const Value& v);

// Tagged canonical byte encoding: tag byte, then IEEE bits (real) or
// two's-complement (integer) big-endian, 8-byte length + bytes (string),
// or one byte (boolean).
void append_u64_be(std::string& out, std::uint64_t x);
void encode_value(std::string& out, const Value& v);

}  // namespace gdl

template <>
struct std::hash<gdl::Value> {
  std::size_t operator()(const gdl::Value& v) const noexcept { return v.hash(); }
};
