#include "gdl/program.hpp"

#include <charconv>
#include <cmath>

#include "lexer.hpp"

namespace gdl {

Term Term::make_const(Value v, SourcePos pos) {
  Term t;
  t.kind = Kind::Const;
  t.constant = std::move(v);
  t.pos = pos;
  return t;
}

Term Term::make_var(std::string name, SourcePos pos) {
  Term t;
  t.kind = Kind::Var;
  t.var = std::move(name);
  t.pos = pos;
  return t;
}

Term Term::make_fn(FnOp op, std::vector<Term> args, SourcePos pos) {
  Term t;
  t.kind = Kind::Fn;
  t.fn = op;
  t.children = std::move(args);
  t.pos = pos;
  return t;
}

Term Term::make_dist(DistFamily family, std::vector<std::string> names,
                     std::vector<Term> params, SourcePos pos) {
  Term t;
  t.kind = Kind::Dist;
  t.family = family;
  t.param_names = std::move(names);
  t.children = std::move(params);
  t.pos = pos;
  return t;
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Term::Kind::Const: return a.constant == b.constant;
    case Term::Kind::Var: return a.var == b.var;
    case Term::Kind::Fn: return a.fn == b.fn && a.children == b.children;
    case Term::Kind::Dist:
      return a.family == b.family && a.param_names == b.param_names &&
             a.list_values == b.list_values && a.list_weights == b.list_weights &&
             a.children == b.children;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

using detail::Tok;
using detail::Token;
using detail::TokenCursor;

Value number_value(const Token& t, bool negative) {
  if (t.kind == Tok::Integer) {
    std::string text = negative ? "-" + t.text : t.text;
    std::int64_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc()) {
      throw Error(ErrorKind::SyntaxError, "integer literal out of range", t.pos);
    }
    return Value::integer(v);
  }
  double v = std::stod(t.text);
  if (!std::isfinite(v)) throw Error(ErrorKind::SyntaxError, "real literal out of range", t.pos);
  return Value::real(negative ? -v : v);
}

bool is_number(const Token& t) { return t.kind == Tok::Integer || t.kind == Tok::Real; }

class ProgramParser {
 public:
  explicit ProgramParser(std::string_view text) : cur_(detail::tokenize(text)) {}

  Program parse() {
    Program p;
    while (!cur_.at_end()) {
      Rule r = rule();
      p.occurrences.push_back({p.occurrences.size(), std::move(r)});
    }
    return p;
  }

 private:
  Rule rule() {
    Rule r;
    r.pos = cur_.peek().pos;
    r.head = atom(/*head=*/true);
    cur_.expect_punct(":-");
    r.body.push_back(atom(false));
    while (cur_.accept_punct(",")) r.body.push_back(atom(false));
    if (!cur_.is_punct(".")) cur_.fail({"','", "'.'"});
    cur_.next();
    return r;
  }

  Atom atom(bool head) {
    Atom a;
    a.pos = cur_.peek().pos;
    a.relation = cur_.expect_ident("relation name").text;
    cur_.expect_punct("(");
    if (!cur_.is_punct(")")) {
      a.args.push_back(head ? term() : body_arg());
      while (cur_.accept_punct(",")) a.args.push_back(head ? term() : body_arg());
    }
    if (!cur_.is_punct(")")) cur_.fail({"','", "')'"});
    cur_.next();
    return a;
  }

  Term body_arg() {
    const Token& t = cur_.peek();
    if (t.kind == Tok::Ident && !cur_.is_keyword("true") && !cur_.is_keyword("false")) {
      cur_.next();
      return Term::make_var(t.text, t.pos);
    }
    return literal_term();
  }

  Term literal_term() {
    SourcePos pos = cur_.peek().pos;
    return Term::make_const(literal(), pos);
  }

  Value literal() {
    bool negative = false;
    if (cur_.is_punct("-") && is_number(cur_.peek(1))) {
      cur_.next();
      negative = true;
    }
    const Token& t = cur_.peek();
    if (is_number(t)) {
      cur_.next();
      return number_value(t, negative);
    }
    if (t.kind == Tok::String) {
      cur_.next();
      return Value::string(t.text);
    }
    if (cur_.accept_keyword("true")) return Value::boolean(true);
    if (cur_.accept_keyword("false")) return Value::boolean(false);
    cur_.fail({"variable", "number", "string", "true", "false"});
  }

  Term term() {
    Term left = product();
    while (cur_.is_punct("+") || cur_.is_punct("-")) {
      const Token& op = cur_.next();
      Term right = product();
      std::vector<Term> args;
      args.push_back(std::move(left));
      args.push_back(std::move(right));
      left = Term::make_fn(op.text == "+" ? FnOp::Add : FnOp::Sub, std::move(args), op.pos);
    }
    return left;
  }

  Term product() {
    Term left = unary();
    while (cur_.is_punct("*") || cur_.is_punct("/")) {
      const Token& op = cur_.next();
      Term right = unary();
      std::vector<Term> args;
      args.push_back(std::move(left));
      args.push_back(std::move(right));
      left = Term::make_fn(op.text == "*" ? FnOp::Mul : FnOp::Div, std::move(args), op.pos);
    }
    return left;
  }

  Term unary() {
    if (cur_.is_punct("-")) {
      if (is_number(cur_.peek(1))) return literal_term();
      SourcePos pos = cur_.next().pos;
      std::vector<Term> args;
      args.push_back(unary());
      return Term::make_fn(FnOp::Neg, std::move(args), pos);
    }
    return primary();
  }

  Term primary() {
    const Token& t = cur_.peek();
    if (cur_.accept_punct("(")) {
      Term inner = term();
      cur_.expect_punct(")");
      return inner;
    }
    if (t.kind == Tok::Ident && !cur_.is_keyword("true") && !cur_.is_keyword("false")) {
      if (cur_.is_punct("(", 1)) return call();
      cur_.next();
      return Term::make_var(t.text, t.pos);
    }
    if (is_number(t) || t.kind == Tok::String || cur_.is_keyword("true") ||
        cur_.is_keyword("false")) {
      return literal_term();
    }
    cur_.fail({"variable", "number", "string", "true", "false", "'('", "'-'",
               "function or distribution call"});
  }

  Term call() {
    const Token& name = cur_.next();
    if (auto fn = fn_from_name(name.text)) {
      cur_.expect_punct("(");
      std::vector<Term> args;
      args.push_back(term());
      cur_.expect_punct(")");
      return Term::make_fn(*fn, std::move(args), name.pos);
    }
    auto family = dist_family_from_name(name.text);
    if (!family) {
      throw Error(ErrorKind::SyntaxError,
                  "expected one of {ln, exp, normal, lognormal, exponential, uniform, "
                  "bernoulli, poisson, discrete}, found '" + name.text + "'",
                  name.pos);
    }
    cur_.expect_punct("(");
    Term d = Term::make_dist(*family, {}, {}, name.pos);
    if (!cur_.is_punct(")")) {
      dist_arg(d);
      while (cur_.accept_punct(",")) dist_arg(d);
    }
    if (!cur_.is_punct(")")) cur_.fail({"','", "')'"});
    cur_.next();
    return d;
  }

  void dist_arg(Term& d) {
    const Token& name = cur_.expect_ident("parameter name");
    cur_.expect_punct("=");
    if (d.family == DistFamily::Discrete) {
      if (name.text != "values" && name.text != "weights") {
        throw Error(ErrorKind::DistParamArity,
                    "discrete has parameters 'values' and 'weights', not '" + name.text + "'",
                    name.pos);
      }
      cur_.expect_punct("[");
      std::vector<Value> items;
      if (!cur_.is_punct("]")) {
        items.push_back(literal());
        while (cur_.accept_punct(",")) items.push_back(literal());
      }
      if (!cur_.is_punct("]")) cur_.fail({"','", "']'"});
      cur_.next();
      d.param_names.push_back(name.text);
      if (name.text == "values") {
        d.list_values = std::move(items);
      } else {
        for (const auto& v : items) {
          if (!v.is_numeric()) {
            throw Error(ErrorKind::ParamTypeMismatch, "discrete weights must be numbers",
                        name.pos);
          }
          d.list_weights.push_back(v.as_number());
        }
      }
      return;
    }
    d.param_names.push_back(name.text);
    d.children.push_back(term());
  }

  TokenCursor cur_;
};

// ---------------------------------------------------------------------------
// Printer

int precedence(const Term& t) {
  if (t.kind == Term::Kind::Fn) {
    switch (t.fn) {
      case FnOp::Add:
      case FnOp::Sub: return 1;
      case FnOp::Mul:
      case FnOp::Div: return 2;
      case FnOp::Neg: return 3;
      default: return 4;
    }
  }
  return 4;
}

void print_term(std::string& out, const Term& t) {
  switch (t.kind) {
    case Term::Kind::Const: out += to_string(t.constant); return;
    case Term::Kind::Var: out += t.var; return;
    case Term::Kind::Fn: {
      if (t.fn == FnOp::Ln || t.fn == FnOp::Exp) {
        out += std::string(to_string(t.fn)) + "(";
        print_term(out, t.children[0]);
        out += ")";
        return;
      }
      if (t.fn == FnOp::Neg) {
        const Term& c = t.children[0];
        bool parens = precedence(c) < 3 || c.kind == Term::Kind::Const;
        out += "-";
        if (parens) out += "(";
        print_term(out, c);
        if (parens) out += ")";
        return;
      }
      int prec = precedence(t);
      const Term& l = t.children[0];
      const Term& r = t.children[1];
      bool lp = precedence(l) < prec;
      bool rp = precedence(r) <= prec;
      if (lp) out += "(";
      print_term(out, l);
      if (lp) out += ")";
      out += " " + std::string(to_string(t.fn)) + " ";
      if (rp) out += "(";
      print_term(out, r);
      if (rp) out += ")";
      return;
    }
    case Term::Kind::Dist: {
      out += std::string(to_string(t.family)) + "(";
      if (t.family == DistFamily::Discrete) {
        for (std::size_t i = 0; i < t.param_names.size(); ++i) {
          if (i) out += ", ";
          out += t.param_names[i] + "=[";
          if (t.param_names[i] == "values") {
            for (std::size_t k = 0; k < t.list_values.size(); ++k) {
              if (k) out += ", ";
              out += to_string(t.list_values[k]);
            }
          } else {
            for (std::size_t k = 0; k < t.list_weights.size(); ++k) {
              if (k) out += ", ";
              out += format_real(t.list_weights[k]);
            }
          }
          out += "]";
        }
      } else {
        for (std::size_t i = 0; i < t.children.size(); ++i) {
          if (i) out += ", ";
          out += t.param_names[i] + "=";
          print_term(out, t.children[i]);
        }
      }
      out += ")";
      return;
    }
  }
}

void print_atom(std::string& out, const Atom& a) {
  out += a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ", ";
    print_term(out, a.args[i]);
  }
  out += ")";
}

}  // namespace

Program parse_program(std::string_view text) { return ProgramParser(text).parse(); }

std::string to_string(const Term& t) {
  std::string out;
  print_term(out, t);
  return out;
}

std::string to_string(const Rule& r) {
  std::string out;
  print_atom(out, r.head);
  out += " :- ";
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) out += ", ";
    print_atom(out, r.body[i]);
  }
  out += ".";
  return out;
}

std::string to_string(const Program& p) {
  std::string out;
  for (const auto& occ : p.occurrences) out += to_string(occ.rule) + "\n";
  return out;
}

}  // namespace gdl
