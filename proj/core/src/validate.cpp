#include <algorithm>
#include <bit>
#include <set>

#include "gdl/program.hpp"

namespace gdl {

std::vector<std::string> CheckedRule::head_var_names() const {
  std::vector<std::string> out;
  for (auto v : head_vars) out.push_back(variables[v]);
  return out;
}

CheckedProgram::CheckedProgram(Program source, std::shared_ptr<const Schema> schema,
                               std::vector<CheckedRule> rules)
    : source_(std::move(source)), schema_(std::move(schema)), rules_(std::move(rules)) {
  std::set<std::string> heads;
  for (const auto& r : rules_) heads.insert(r.rule.head.relation);
  for (const auto& rel : schema_->relations()) {
    (heads.contains(rel.name) ? intensional_ : extensional_).push_back(rel.name);
  }
}

bool CheckedProgram::is_intensional(std::string_view relation) const {
  return std::find(intensional_.begin(), intensional_.end(), relation) != intensional_.end();
}

std::size_t CheckedProgram::dist_sites() const {
  std::size_t n = 0;
  for (const auto& r : rules_) n += r.dist_sites;
  return n;
}

namespace {

class RuleChecker {
 public:
  RuleChecker(const Schema& schema, const RuleOccurrence& occ) : schema_(schema) {
    out_.occurrence_id = occ.id;
    out_.rule = occ.rule;
  }

  CheckedRule run() {
    Rule& rule = out_.rule;
    const auto& head_rel = lookup(rule.head.relation, rule.head.pos);
    if (head_rel.kind == RelationKind::Extensional) {
      throw Error(ErrorKind::HeadRelationExtensional,
                  "relation '" + head_rel.name + "' is extensional and cannot be a rule head",
                  rule.head.pos);
    }
    check_arity(head_rel, rule.head);
    for (const auto& atom : rule.body) check_body_atom(atom);

    std::vector<int> seen(out_.variables.size(), 0);
    for (std::size_t i = 0; i < rule.head.args.size(); ++i) {
      ValueType want = head_rel.attrs[i].type;
      Term& t = rule.head.args[i];
      ValueType got = check_head_term(t, seen);
      if (!assignable(got, want)) {
        throw Error(ErrorKind::TypeMismatch,
                    "head position " + std::to_string(i) + " of " + head_rel.name + " (" +
                        head_rel.attrs[i].name + ") expects " + std::string(to_string(want)) +
                        ", term has type " + std::string(to_string(got)),
                    t.pos);
      }
      out_.head_attr_types.push_back(want);
    }
    return std::move(out_);
  }

 private:
  const RelationSchema& lookup(const std::string& name, SourcePos pos) {
    const auto* rel = schema_.find(name);
    if (rel == nullptr) {
      throw Error(ErrorKind::UnknownRelation, "unknown relation '" + name + "'", pos);
    }
    return *rel;
  }

  void check_arity(const RelationSchema& rel, const Atom& atom) {
    if (atom.args.size() != rel.arity()) {
      throw Error(ErrorKind::ArityMismatch, rel.name + " has arity " +
                                                std::to_string(rel.arity()) + ", used with " +
                                                std::to_string(atom.args.size()) + " arguments",
                  atom.pos);
    }
  }

  void check_body_atom(const Atom& atom) {
    const auto& rel = lookup(atom.relation, atom.pos);
    check_arity(rel, atom);
    CheckedAtom checked{rel.name, {}};
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const Term& t = atom.args[i];
      ValueType want = rel.attrs[i].type;
      BodySlot slot;
      if (t.kind == Term::Kind::Var) {
        auto it = std::find(out_.variables.begin(), out_.variables.end(), t.var);
        if (it == out_.variables.end()) {
          out_.variables.push_back(t.var);
          out_.var_types.push_back(want);
          slot.var = out_.variables.size() - 1;
        } else {
          slot.var = static_cast<std::size_t>(it - out_.variables.begin());
          if (out_.var_types[slot.var] != want) {
            throw Error(ErrorKind::TypeMismatch,
                        "variable '" + t.var + "' is used as " +
                            std::string(to_string(out_.var_types[slot.var])) + " and as " +
                            std::string(to_string(want)),
                        t.pos);
          }
        }
        slot.is_var = true;
      } else if (t.kind == Term::Kind::Const) {
        if (!assignable(t.constant.type(), want)) {
          throw Error(ErrorKind::TypeMismatch,
                      "constant " + to_string(t.constant) + " in " + rel.name + " position " +
                          std::to_string(i) + " must be " + std::string(to_string(want)),
                      t.pos);
        }
        slot.constant = coerce(t.constant, want);
      } else {
        throw Error(ErrorKind::TypeMismatch,
                    "body atoms take only variables and constants", t.pos);
      }
      checked.slots.push_back(std::move(slot));
    }
    out_.body.push_back(std::move(checked));
  }

  ValueType check_head_term(Term& t, std::vector<int>& seen) {
    switch (t.kind) {
      case Term::Kind::Const: t.type = t.constant.type(); return t.type;
      case Term::Kind::Var: {
        auto it = std::find(out_.variables.begin(), out_.variables.end(), t.var);
        if (it == out_.variables.end()) {
          throw Error(ErrorKind::UnsafeVariable,
                      "variable '" + t.var + "' occurs in the head but not in the body", t.pos);
        }
        auto idx = static_cast<std::size_t>(it - out_.variables.begin());
        if (!seen[idx]) {
          seen[idx] = 1;
          out_.head_vars.push_back(idx);
        }
        t.var_index = static_cast<int>(idx);
        t.type = out_.var_types[idx];
        return t.type;
      }
      case Term::Kind::Fn: {
        std::vector<ValueType> args;
        for (auto& c : t.children) args.push_back(check_head_term(c, seen));
        auto result = fn_result_type(t.fn, args);
        if (!result) {
          throw Error(ErrorKind::TypeMismatch,
                      "'" + std::string(to_string(t.fn)) + "' needs numeric arguments", t.pos);
        }
        t.type = *result;
        return t.type;
      }
      case Term::Kind::Dist: return check_dist(t, seen);
    }
    return ValueType::Real;
  }

  ValueType check_dist(Term& t, std::vector<int>& seen) {
    t.site = static_cast<int>(out_.dist_sites++);
    std::string name(to_string(t.family));
    std::set<std::string> given;
    for (const auto& n : t.param_names) {
      if (!given.insert(n).second) {
        throw Error(ErrorKind::DistParamArity, name + ": parameter '" + n + "' given twice",
                    t.pos);
      }
    }
    if (t.family == DistFamily::Discrete) {
      if (given != std::set<std::string>{"values", "weights"}) {
        throw Error(ErrorKind::DistParamArity, "discrete takes exactly values=[...] and weights=[...]",
                    t.pos);
      }
      try {
        t.spec = DistSpec::discrete(t.list_values, t.list_weights);
      } catch (const Error& e) {
        throw Error(e.kind(), e.detail(), t.pos);
      }
      // Canonical order: values, then weights.
      t.param_names = {"values", "weights"};
      t.type = t.spec->result_type();
      return t.type;
    }

    DistSpec spec = DistSpec::of(t.family);
    auto sig = spec.params();
    std::set<std::string> expected;
    for (const auto& p : sig) expected.emplace(p.name);
    if (given != expected) {
      std::string want;
      for (const auto& p : sig) want += (want.empty() ? "" : ", ") + std::string(p.name);
      throw Error(ErrorKind::DistParamArity, name + " takes parameters (" + want + ")", t.pos);
    }
    std::vector<Term> ordered;
    std::vector<std::string> names;
    for (const auto& p : sig) {
      auto at = std::find(t.param_names.begin(), t.param_names.end(), p.name);
      ordered.push_back(std::move(t.children[static_cast<std::size_t>(at - t.param_names.begin())]));
      names.emplace_back(p.name);
    }
    t.children = std::move(ordered);
    t.param_names = std::move(names);

    bool all_const = true;
    std::vector<Value> consts;
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      ValueType pt = check_head_term(t.children[i], seen);
      if (!is_numeric(pt)) {
        throw Error(ErrorKind::TypeMismatch,
                    name + ": parameter '" + t.param_names[i] + "' must be numeric, got " +
                        std::string(to_string(pt)),
                    t.children[i].pos);
      }
      if (t.children[i].kind == Term::Kind::Const) {
        consts.push_back(t.children[i].constant);
      } else {
        all_const = false;
      }
    }
    if (all_const) {
      try {
        validate_params(spec, consts);
      } catch (const Error& e) {
        throw Error(e.kind(), e.detail(), t.pos);
      }
    }
    t.spec = spec;
    t.type = spec.result_type();
    return t.type;
  }

  const Schema& schema_;
  CheckedRule out_;
};

}  // namespace

CheckedProgram validate_program(const Program& program, std::shared_ptr<const Schema> schema) {
  if (!schema) throw Error(ErrorKind::InvalidArgument, "validation needs a schema");
  std::vector<CheckedRule> rules;
  for (std::size_t i = 0; i < program.occurrences.size(); ++i) {
    const auto& occ = program.occurrences[i];
    if (occ.id != i) {
      throw Error(ErrorKind::InvalidArgument, "occurrence ids must be 0..k-1 in order");
    }
    rules.push_back(RuleChecker(*schema, occ).run());
  }
  return CheckedProgram(program, std::move(schema), std::move(rules));
}

// ---------------------------------------------------------------------------
// Signatures

std::string signature_from_values(std::uint64_t occurrence_id,
                                  std::span<const Value> head_values) {
  std::string out;
  out.reserve(8 + head_values.size() * 9);
  append_u64_be(out, occurrence_id);
  for (const auto& v : head_values) encode_value(out, v);
  return out;
}

std::string head_instantiation_signature(const CheckedRule& rule,
                                         const std::map<std::string, Value>& assignment) {
  std::vector<Value> values;
  for (auto v : rule.head_vars) {
    auto it = assignment.find(rule.variables[v]);
    if (it == assignment.end()) {
      throw Error(ErrorKind::MissingVariable,
                  "assignment lacks head variable '" + rule.variables[v] + "'");
    }
    values.push_back(coerce(it->second, rule.var_types[v]));
  }
  return signature_from_values(rule.occurrence_id, values);
}

namespace {

std::uint64_t read_u64_be(std::string_view s, std::size_t& at) {
  if (at + 8 > s.size()) throw Error(ErrorKind::InvalidArgument, "truncated signature");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x = (x << 8) | static_cast<unsigned char>(s[at++]);
  return x;
}

}  // namespace

DecodedSignature decode_signature(std::string_view sig) {
  DecodedSignature out;
  std::size_t at = 0;
  out.occurrence_id = read_u64_be(sig, at);
  while (at < sig.size()) {
    auto tag = static_cast<ValueType>(static_cast<unsigned char>(sig[at++]));
    switch (tag) {
      case ValueType::Real:
        out.head_values.push_back(Value::real(std::bit_cast<double>(read_u64_be(sig, at))));
        break;
      case ValueType::Integer:
        out.head_values.push_back(
            Value::integer(static_cast<std::int64_t>(read_u64_be(sig, at))));
        break;
      case ValueType::String: {
        auto len = read_u64_be(sig, at);
        if (at + len > sig.size()) throw Error(ErrorKind::InvalidArgument, "truncated signature");
        out.head_values.push_back(Value::string(std::string(sig.substr(at, len))));
        at += len;
        break;
      }
      case ValueType::Boolean:
        if (at >= sig.size()) throw Error(ErrorKind::InvalidArgument, "truncated signature");
        out.head_values.push_back(Value::boolean(sig[at++] != 0));
        break;
      default: throw Error(ErrorKind::InvalidArgument, "bad type tag in signature");
    }
  }
  return out;
}

std::string to_hex(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out += digits[c >> 4];
    out += digits[c & 15];
  }
  return out;
}

}  // namespace gdl
