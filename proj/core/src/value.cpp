#include "gdl/value.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>

#include "gdl/error.hpp"

namespace gdl {

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::Real: return "real";
    case ValueType::Integer: return "integer";
    case ValueType::String: return "string";
    case ValueType::Boolean: return "boolean";
  }
  return "?";
}

std::optional<ValueType> value_type_from_name(std::string_view name) {
  if (name == "real") return ValueType::Real;
  if (name == "integer") return ValueType::Integer;
  if (name == "string") return ValueType::String;
  if (name == "boolean") return ValueType::Boolean;
  return std::nullopt;
}

Value Value::real(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorKind::NonFiniteReal, "real values must be finite");
  }
  if (x == 0.0) x = 0.0;  // drops the sign of -0.0
  return Value(Payload(x));
}

namespace {

[[noreturn]] void wrong_type(ValueType want, ValueType got) {
  throw Error(ErrorKind::TypeMismatch, "expected " + std::string(to_string(want)) +
                                           ", got " + std::string(to_string(got)));
}

}  // namespace

double Value::as_real() const {
  if (auto* p = std::get_if<double>(&v_)) return *p;
  wrong_type(ValueType::Real, type());
}

std::int64_t Value::as_integer() const {
  if (auto* p = std::get_if<std::int64_t>(&v_)) return *p;
  wrong_type(ValueType::Integer, type());
}

const std::string& Value::as_string() const {
  if (auto* p = std::get_if<std::string>(&v_)) return *p;
  wrong_type(ValueType::String, type());
}

bool Value::as_boolean() const {
  if (auto* p = std::get_if<bool>(&v_)) return *p;
  wrong_type(ValueType::Boolean, type());
}

double Value::as_number() const {
  if (auto* p = std::get_if<double>(&v_)) return *p;
  if (auto* p = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*p);
  throw Error(ErrorKind::TypeMismatch,
              "expected a number, got " + std::string(to_string(type())));
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.v_.index() != b.v_.index()) return a.v_.index() <=> b.v_.index();
  switch (a.type()) {
    case ValueType::Real: {
      // No NaNs can exist, so the partial order is total.
      double x = std::get<double>(a.v_), y = std::get<double>(b.v_);
      if (x < y) return std::strong_ordering::less;
      if (x > y) return std::strong_ordering::greater;
      return std::strong_ordering::equal;
    }
    case ValueType::Integer:
      return std::get<std::int64_t>(a.v_) <=> std::get<std::int64_t>(b.v_);
    case ValueType::String:
      return std::get<std::string>(a.v_).compare(std::get<std::string>(b.v_)) <=> 0;
    case ValueType::Boolean:
      return std::get<bool>(a.v_) <=> std::get<bool>(b.v_);
  }
  return std::strong_ordering::equal;
}

std::size_t Value::hash() const noexcept {
  std::size_t h = 0;
  switch (type()) {
    case ValueType::Real:
      h = std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(std::get<double>(v_)));
      break;
    case ValueType::Integer:
      h = std::hash<std::int64_t>{}(std::get<std::int64_t>(v_));
      break;
    case ValueType::String:
      h = std::hash<std::string>{}(std::get<std::string>(v_));
      break;
    case ValueType::Boolean:
      h = std::get<bool>(v_) ? 0x9e3779b97f4a7c15ULL : 0x7f4a7c159e3779b9ULL;
      break;
  }
  return h ^ (static_cast<std::size_t>(v_.index()) * 0xff51afd7ed558ccdULL);
}

bool assignable(ValueType from, ValueType to) {
  return from == to || (from == ValueType::Integer && to == ValueType::Real);
}

Value coerce(const Value& v, ValueType target) {
  if (v.type() == target) return v;
  if (v.is_integer() && target == ValueType::Real) {
    return Value::real(static_cast<double>(v.as_integer()));
  }
  throw Error(ErrorKind::TypeMismatch, "cannot use " + std::string(to_string(v.type())) +
                                           " value " + to_string(v) + " as " +
                                           std::string(to_string(target)));
}

std::string format_real(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string to_string(const Value& v) {
  switch (v.type()) {
    case ValueType::Real: return format_real(v.as_real());
    case ValueType::Integer: return std::to_string(v.as_integer());
    case ValueType::Boolean: return v.as_boolean() ? "true" : "false";
    case ValueType::String: {
      std::string out = "\"";
      for (char c : v.as_string()) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          default: out += c;
        }
      }
      out += '"';
      return out;
    }
  }
  return "?";
}

void append_u64_be(std::string& out, std::uint64_t x) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((x >> shift) & 0xff));
  }
}

void encode_value(std::string& out, const Value& v) {
  out.push_back(static_cast<char>(v.type()));
  switch (v.type()) {
    case ValueType::Real:
      append_u64_be(out, std::bit_cast<std::uint64_t>(v.as_real()));
      break;
    case ValueType::Integer:
      append_u64_be(out, static_cast<std::uint64_t>(v.as_integer()));
      break;
    case ValueType::String:
      append_u64_be(out, v.as_string().size());
      out += v.as_string();
      break;
    case ValueType::Boolean:
      out.push_back(v.as_boolean() ? 1 : 0);
      break;
  }
}

}  // namespace gdl
