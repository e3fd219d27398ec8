#include "gdl/event.hpp"

#include <charconv>

#include "gdl/error.hpp"
#include "lexer.hpp"

namespace gdl {

std::string_view to_string(Cmp cmp) {
  switch (cmp) {
    case Cmp::Eq: return "=";
    case Cmp::Ne: return "!=";
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
  }
  return "?";
}

bool is_order_cmp(Cmp cmp) { return cmp != Cmp::Eq && cmp != Cmp::Ne; }

BoundPredicate::BoundPredicate(const Schema& schema, const FactPredicate& pred)
    : relation_(pred.relation) {
  const auto* rel = schema.find(pred.relation);
  if (rel == nullptr) {
    throw Error(ErrorKind::SchemaMismatch,
                "predicate relation '" + pred.relation + "' is not in the schema");
  }
  auto attr_index = [&](const std::string& name) {
    auto idx = rel->index_of(name);
    if (!idx) {
      throw Error(ErrorKind::SchemaMismatch,
                  "relation '" + rel->name + "' has no attribute '" + name + "'");
    }
    return *idx;
  };
  for (const auto& c : pred.constraints) {
    if (const auto* ac = std::get_if<AttrConst>(&c)) {
      std::size_t i = attr_index(ac->attr);
      ValueType t = rel->attrs[i].type;
      if (!assignable(ac->value.type(), t)) {
        throw Error(ErrorKind::SchemaMismatch,
                    "attribute '" + ac->attr + "' is " + std::string(to_string(t)) +
                        " but is compared with " + to_string(ac->value));
      }
      if (is_order_cmp(ac->cmp) && !is_numeric(t)) {
        throw Error(ErrorKind::SchemaMismatch,
                    "order comparison on non-numeric attribute '" + ac->attr + "'");
      }
      const_checks_.push_back({i, ac->cmp, coerce(ac->value, t)});
    } else {
      const auto& aa = std::get<AttrAttr>(c);
      std::size_t l = attr_index(aa.left), r = attr_index(aa.right);
      if (aa.cmp != Cmp::Eq && aa.cmp != Cmp::Ne) {
        throw Error(ErrorKind::SchemaMismatch,
                    "attribute-attribute constraints support only = and !=");
      }
      if (rel->attrs[l].type != rel->attrs[r].type) {
        throw Error(ErrorKind::SchemaMismatch, "attributes '" + aa.left + "' and '" +
                                                   aa.right + "' have different types");
      }
      pair_checks_.push_back({l, aa.cmp, r});
    }
  }
}

bool BoundPredicate::matches(const Fact& f) const {
  if (f.relation != relation_) return false;
  for (const auto& c : const_checks_) {
    if (!compare(f.values[c.attr], c.cmp, c.value)) return false;
  }
  for (const auto& c : pair_checks_) {
    if (!compare(f.values[c.left], c.cmp, f.values[c.right])) return false;
  }
  return true;
}

namespace {

std::uint64_t count_matching(const Instance& instance, const BoundPredicate& bound) {
  std::uint64_t total = 0;
  auto it = instance.facts().lower_bound(Fact{bound.relation(), {}});
  for (; it != instance.facts().end() && it->first.relation == bound.relation(); ++it) {
    if (bound.matches(it->first)) total += it->second;
  }
  return total;
}

}  // namespace

std::uint64_t multiplicity(const Instance& instance, const FactPredicate& pred) {
  return count_matching(instance, BoundPredicate(instance.schema(), pred));
}

EventExpr EventExpr::atom(CountingAtom a) {
  EventExpr e;
  e.kind_ = Kind::Atom;
  e.atom_ = std::make_shared<const CountingAtom>(std::move(a));
  return e;
}

EventExpr EventExpr::conj(std::vector<EventExpr> children) {
  if (children.empty()) throw Error(ErrorKind::InvalidArgument, "empty conjunction");
  EventExpr e;
  e.kind_ = Kind::And;
  e.children_ = std::move(children);
  return e;
}

EventExpr EventExpr::disj(std::vector<EventExpr> children) {
  if (children.empty()) throw Error(ErrorKind::InvalidArgument, "empty disjunction");
  EventExpr e;
  e.kind_ = Kind::Or;
  e.children_ = std::move(children);
  return e;
}

EventExpr EventExpr::negate(EventExpr child) {
  EventExpr e;
  e.kind_ = Kind::Not;
  e.children_.push_back(std::move(child));
  return e;
}

CompiledEvent::CompiledEvent(const Schema& schema, const EventExpr& event) {
  root_ = build(schema, event);
}

std::size_t CompiledEvent::build(const Schema& schema, const EventExpr& e) {
  Node node{e.kind()};
  if (e.kind() == EventExpr::Kind::Atom) {
    node.atom = atoms_.size();
    atoms_.emplace_back(schema, e.counting_atom().pred);
    node.cmp = e.counting_atom().cmp;
    node.n = e.counting_atom().n;
  } else {
    for (const auto& c : e.children()) node.children.push_back(build(schema, c));
  }
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

bool CompiledEvent::eval(std::size_t idx, const std::vector<std::uint64_t>& counts) const {
  const Node& node = nodes_[idx];
  switch (node.kind) {
    case EventExpr::Kind::Atom: return compare(counts[node.atom], node.cmp, node.n);
    case EventExpr::Kind::And:
      for (auto c : node.children) {
        if (!eval(c, counts)) return false;
      }
      return true;
    case EventExpr::Kind::Or:
      for (auto c : node.children) {
        if (eval(c, counts)) return true;
      }
      return false;
    case EventExpr::Kind::Not: return !eval(node.children.front(), counts);
  }
  return false;
}

bool CompiledEvent::holds(const Instance& instance) const {
  std::vector<std::uint64_t> counts;
  counts.reserve(atoms_.size());
  for (const auto& a : atoms_) counts.push_back(count_matching(instance, a));
  return eval(root_, counts);
}

bool event_holds(const Instance& instance, const EventExpr& event) {
  return CompiledEvent(instance.schema(), event).holds(instance);
}

// ---------------------------------------------------------------------------
// Text syntax

namespace {

using detail::Tok;
using detail::TokenCursor;

std::optional<Cmp> cmp_from_token(const detail::Token& t) {
  if (t.kind != Tok::Punct) return std::nullopt;
  if (t.text == "=") return Cmp::Eq;
  if (t.text == "!=" || t.text == "<>") return Cmp::Ne;
  if (t.text == "<") return Cmp::Lt;
  if (t.text == "<=") return Cmp::Le;
  if (t.text == ">") return Cmp::Gt;
  if (t.text == ">=") return Cmp::Ge;
  return std::nullopt;
}

const std::vector<std::string> kCmpTokens = {"'='", "'!='", "'<'", "'<='", "'>'", "'>='"};

Value parse_number(const detail::Token& t, bool negative) {
  if (t.kind == Tok::Integer) {
    std::int64_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc()) {
      throw Error(ErrorKind::SyntaxError, "integer literal out of range", t.pos);
    }
    return Value::integer(negative ? -v : v);
  }
  double v = std::stod(t.text);
  return Value::real(negative ? -v : v);
}

class EventParser {
 public:
  explicit EventParser(std::string_view text) : cur_(detail::tokenize(text, {"#", '"'})) {}

  EventExpr parse() {
    auto e = disjunction();
    if (!cur_.at_end()) cur_.fail({"'and'", "'or'", "end of input"});
    return e;
  }

 private:
  EventExpr disjunction() {
    std::vector<EventExpr> parts{conjunction()};
    while (cur_.accept_keyword("or")) parts.push_back(conjunction());
    return parts.size() == 1 ? std::move(parts.front()) : EventExpr::disj(std::move(parts));
  }

  EventExpr conjunction() {
    std::vector<EventExpr> parts{unary()};
    while (cur_.accept_keyword("and")) parts.push_back(unary());
    return parts.size() == 1 ? std::move(parts.front()) : EventExpr::conj(std::move(parts));
  }

  EventExpr unary() {
    if (cur_.accept_keyword("not")) return EventExpr::negate(unary());
    if (cur_.accept_punct("(")) {
      auto e = disjunction();
      cur_.expect_punct(")");
      return e;
    }
    if (cur_.is_keyword("count")) return atom();
    cur_.fail({"'count'", "'not'", "'('"});
  }

  EventExpr atom() {
    cur_.expect_keyword("count");
    cur_.expect_punct("(");
    CountingAtom a;
    a.pred.relation = cur_.expect_ident("relation name").text;
    if (cur_.accept_keyword("where")) {
      a.pred.constraints.push_back(condition());
      while (cur_.accept_keyword("and")) a.pred.constraints.push_back(condition());
    }
    cur_.expect_punct(")");
    auto cmp = cmp_from_token(cur_.peek());
    if (!cmp) cur_.fail(kCmpTokens);
    cur_.next();
    const auto& n = cur_.peek();
    if (n.kind != Tok::Integer) cur_.fail({"nonnegative integer"});
    a.cmp = *cmp;
    a.n = std::stoull(n.text);
    cur_.next();
    return EventExpr::atom(std::move(a));
  }

  Constraint condition() {
    std::string left = cur_.expect_ident("attribute name").text;
    auto cmp = cmp_from_token(cur_.peek());
    if (!cmp) cur_.fail(kCmpTokens);
    cur_.next();
    const auto& t = cur_.peek();
    if (t.kind == Tok::Ident && !cur_.is_keyword("true") && !cur_.is_keyword("false")) {
      std::string right = cur_.next().text;
      return AttrAttr{std::move(left), *cmp, std::move(right)};
    }
    return AttrConst{std::move(left), *cmp, literal()};
  }

  Value literal() {
    bool negative = cur_.accept_punct("-");
    const auto& t = cur_.peek();
    if (t.kind == Tok::Integer || t.kind == Tok::Real) {
      cur_.next();
      return parse_number(t, negative);
    }
    if (!negative) {
      if (t.kind == Tok::String) {
        cur_.next();
        return Value::string(t.text);
      }
      if (cur_.accept_keyword("true")) return Value::boolean(true);
      if (cur_.accept_keyword("false")) return Value::boolean(false);
    }
    cur_.fail({"number", "string", "boolean", "attribute name"});
  }

  TokenCursor cur_;
};

void print(std::string& out, const EventExpr& e, int parent_prec) {
  switch (e.kind()) {
    case EventExpr::Kind::Atom: {
      const auto& a = e.counting_atom();
      out += "count(" + a.pred.relation;
      for (std::size_t i = 0; i < a.pred.constraints.size(); ++i) {
        out += i == 0 ? " where " : " and ";
        std::visit(
            [&](const auto& c) {
              using T = std::decay_t<decltype(c)>;
              if constexpr (std::is_same_v<T, AttrConst>) {
                out += c.attr + " " + std::string(to_string(c.cmp)) + " " + to_string(c.value);
              } else {
                out += c.left + " " + std::string(to_string(c.cmp)) + " " + c.right;
              }
            },
            a.pred.constraints[i]);
      }
      out += ") " + std::string(to_string(a.cmp)) + " " + std::to_string(a.n);
      return;
    }
    case EventExpr::Kind::Not:
      out += "not ";
      print(out, e.children().front(), 3);
      return;
    case EventExpr::Kind::And:
    case EventExpr::Kind::Or: {
      int prec = e.kind() == EventExpr::Kind::And ? 2 : 1;
      bool parens = prec <= parent_prec;
      if (parens) out += "(";
      for (std::size_t i = 0; i < e.children().size(); ++i) {
        if (i) out += prec == 2 ? " and " : " or ";
        print(out, e.children()[i], prec);
      }
      if (parens) out += ")";
      return;
    }
  }
}

}  // namespace

EventExpr parse_event(std::string_view text) { return EventParser(text).parse(); }

std::string to_string(const EventExpr& e) {
  std::string out;
  print(out, e, 0);
  return out;
}

}  // namespace gdl
