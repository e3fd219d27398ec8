#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gdl/instance.hpp"

namespace gdl {

enum class Cmp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(Cmp cmp);
bool is_order_cmp(Cmp cmp);
template <typename T>
bool compare(const T& a, Cmp cmp, const T& b) {
  switch (cmp) {
    case Cmp::Eq: return a == b;
    case Cmp::Ne: return !(a == b);
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Gt: return a > b;
    case Cmp::Ge: return a >= b;
  }
  return false;
}

// attr CMP constant
struct AttrConst {
  std::string attr;
  Cmp cmp = Cmp::Eq;
  Value value;
};

// attr = attr or attr != attr
struct AttrAttr {
  std::string left;
  Cmp cmp = Cmp::Eq;
  std::string right;
};

using Constraint = std::variant<AttrConst, AttrAttr>;

// A box-shaped fact set: the facts of one relation satisfying a conjunction
// of constraints.
struct FactPredicate {
  std::string relation;
  std::vector<Constraint> constraints;
};

// A FactPredicate resolved against a relation schema. Integer constants
// compared with real attributes are widened once here.
class BoundPredicate {
 public:
  // Errors: SchemaMismatch for unknown relation/attribute, operand type
  // mismatch, or an order comparison on a non-numeric attribute.
  BoundPredicate(const Schema& schema, const FactPredicate& pred);

  const std::string& relation() const { return relation_; }
  bool matches(const Fact& f) const;

 private:
  struct ConstCheck {
    std::size_t attr;
    Cmp cmp;
    Value value;
  };
  struct PairCheck {
    std::size_t left;
    Cmp cmp;
    std::size_t right;
  };
  std::string relation_;
  std::vector<ConstCheck> const_checks_;
  std::vector<PairCheck> pair_checks_;
};

// |D|_F: sum of multiplicities of facts of `instance` in the fact set.
std::uint64_t multiplicity(const Instance& instance, const FactPredicate& pred);

// #(F, n) generalized to any comparison against n.
struct CountingAtom {
  FactPredicate pred;
  Cmp cmp = Cmp::Eq;
  std::uint64_t n = 0;
};

class EventExpr {
 public:
  enum class Kind { Atom, And, Or, Not };

  static EventExpr atom(CountingAtom a);
  static EventExpr conj(std::vector<EventExpr> children);
  static EventExpr disj(std::vector<EventExpr> children);
  static EventExpr negate(EventExpr child);

  Kind kind() const { return kind_; }
  const CountingAtom& counting_atom() const { return *atom_; }
  const std::vector<EventExpr>& children() const { return children_; }

 private:
  Kind kind_ = Kind::Atom;
  std::shared_ptr<const CountingAtom> atom_;
  std::vector<EventExpr> children_;
};

// Pre-bound event for repeated evaluation against instances of one schema.
class CompiledEvent {
 public:
  CompiledEvent(const Schema& schema, const EventExpr& event);
  bool holds(const Instance& instance) const;

 private:
  struct Node {
    EventExpr::Kind kind;
    std::size_t atom = 0;  // index into atoms_ when kind == Atom
    Cmp cmp = Cmp::Eq;
    std::uint64_t n = 0;
    std::vector<std::size_t> children;
  };
  std::size_t build(const Schema& schema, const EventExpr& e);
  bool eval(std::size_t node, const std::vector<std::uint64_t>& counts) const;

  std::vector<BoundPredicate> atoms_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

bool event_holds(const Instance& instance, const EventExpr& event);

// Text form:
//   event := disj ; disj := conj ('or' conj)* ; conj := unary ('and' unary)*
//   unary := 'not' unary | '(' event ')' | atom
//   atom  := 'count' '(' REL ['where' cond ('and' cond)*] ')' CMP INT
//   cond  := ATTR CMP (literal | ATTR)
// Literals: integers, reals, "strings", true, false.
EventExpr parse_event(std::string_view text);
std::string to_string(const EventExpr& e);

}  // namespace gdl
