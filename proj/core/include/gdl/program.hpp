#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gdl/distribution.hpp"
#include "gdl/error.hpp"
#include "gdl/functions.hpp"
#include "gdl/schema.hpp"
#include "gdl/value.hpp"

namespace gdl {

// Head/body term tree. Const and Var appear anywhere; Fn and Dist only in
// heads. Each Dist node is its own sampling site.
struct Term {
  enum class Kind { Const, Var, Fn, Dist };

  Kind kind = Kind::Const;
  Value constant;                        // Const
  std::string var;                       // Var
  FnOp fn = FnOp::Add;                   // Fn
  DistFamily family = DistFamily::Normal;  // Dist
  // Dist: parameter names as written, parallel to `children`. After
  // validation they follow the family's signature order.
  std::vector<std::string> param_names;
  // Dist(discrete): literal lists.
  std::vector<Value> list_values;
  std::vector<double> list_weights;
  std::vector<Term> children;
  SourcePos pos;

  // Filled in by validation.
  int var_index = -1;               // Var: index into CheckedRule::variables
  int site = -1;                    // Dist: pre-order site index within the head
  std::optional<DistSpec> spec;     // Dist
  ValueType type = ValueType::Real; // static type

  static Term make_const(Value v, SourcePos pos = {});
  static Term make_var(std::string name, SourcePos pos = {});
  static Term make_fn(FnOp op, std::vector<Term> args, SourcePos pos = {});
  static Term make_dist(DistFamily family, std::vector<std::string> names,
                        std::vector<Term> params, SourcePos pos = {});

  // Structural equality: ignores positions and validation annotations.
  friend bool operator==(const Term& a, const Term& b);
};

struct Atom {
  std::string relation;
  std::vector<Term> args;
  SourcePos pos;

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.relation == b.relation && a.args == b.args;
  }
};

struct Rule {
  Atom head;
  std::vector<Atom> body;
  SourcePos pos;

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.head == b.head && a.body == b.body;
  }
};

struct RuleOccurrence {
  std::size_t id = 0;
  Rule rule;

  friend bool operator==(const RuleOccurrence&, const RuleOccurrence&) = default;
};

// A bag of rules: occurrences are numbered 0..k-1 in file order, so repeated
// rules stay distinct.
struct Program {
  std::vector<RuleOccurrence> occurrences;

  friend bool operator==(const Program&, const Program&) = default;
};

// Errors: SyntaxError with position and the expected-token set.
Program parse_program(std::string_view text);

// Canonical concrete syntax; parse_program(to_string(p)) == p.
std::string to_string(const Term& t);
std::string to_string(const Rule& r);
std::string to_string(const Program& p);

struct BodySlot {
  bool is_var = false;
  std::size_t var = 0;  // when is_var
  Value constant;       // otherwise, already coerced to the attribute type
};

struct CheckedAtom {
  std::string relation;
  std::vector<BodySlot> slots;
};

struct CheckedRule {
  std::size_t occurrence_id = 0;
  Rule rule;                             // annotated copy
  std::vector<std::string> variables;    // body variables, first-appearance order
  std::vector<ValueType> var_types;
  std::vector<CheckedAtom> body;
  // Distinct head variables in first-appearance (pre-order) order, as
  // indices into `variables`.
  std::vector<std::size_t> head_vars;
  std::vector<ValueType> head_attr_types;
  std::size_t dist_sites = 0;

  std::vector<std::string> head_var_names() const;
};

class CheckedProgram {
 public:
  CheckedProgram(Program source, std::shared_ptr<const Schema> schema,
                 std::vector<CheckedRule> rules);

  const Program& source() const { return source_; }
  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  const std::vector<CheckedRule>& rules() const { return rules_; }

  // Relations in some rule head, and the rest of the schema.
  const std::vector<std::string>& intensional() const { return intensional_; }
  const std::vector<std::string>& extensional() const { return extensional_; }
  bool is_intensional(std::string_view relation) const;

  std::size_t dist_sites() const;
  bool deterministic() const { return dist_sites() == 0; }

 private:
  Program source_;
  std::shared_ptr<const Schema> schema_;
  std::vector<CheckedRule> rules_;
  std::vector<std::string> intensional_;
  std::vector<std::string> extensional_;
};

// Errors (positioned): UnknownRelation, ArityMismatch, HeadRelationExtensional,
// UnsafeVariable, TypeMismatch, DistParamArity, ParamOutOfDomain for constant
// parameters outside their domain.
CheckedProgram validate_program(const Program& program, std::shared_ptr<const Schema> schema);

// occurrence_id as 8 bytes big-endian, then each head variable's tagged
// canonical encoding (see encode_value) in head-variable order.
std::string head_instantiation_signature(const CheckedRule& rule,
                                         const std::map<std::string, Value>& assignment);
std::string signature_from_values(std::uint64_t occurrence_id, std::span<const Value> head_values);

struct DecodedSignature {
  std::uint64_t occurrence_id = 0;
  std::vector<Value> head_values;
};
DecodedSignature decode_signature(std::string_view sig);

std::string to_hex(std::string_view bytes);

}  // namespace gdl
