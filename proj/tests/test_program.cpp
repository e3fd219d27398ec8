#include <gtest/gtest.h>

#include <random>
#include <set>
#include <unordered_set>

#include "gdl/error.hpp"
#include "gdl/program.hpp"
#include "test_support.hpp"

using namespace gdl;
using gdl::testing::check;

namespace {

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no gdl::Error thrown";
  return Error(ErrorKind::Io, "none");
}

// ---------------------------------------------------------------------------
// Random syntax trees for the round-trip property. Relation names and
// variables are arbitrary; only the grammar matters.

struct SyntaxGen {
  std::mt19937_64 rng;
  explicit SyntaxGen(std::uint64_t seed) : rng(seed) {}

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  Value constant() {
    switch (pick(0, 4)) {
      case 0: return Value::integer(pick(-50, 50));
      case 1: return Value::real(pick(-400, 400) / 8.0);
      case 2: return Value::real(std::uniform_real_distribution<double>(-1e3, 1e3)(rng));
      case 3: {
        static const char* strs[] = {"a", "4108", "2021-01-05 08:00", "q\"uote", "back\\slash", ""};
        return Value::string(strs[pick(0, 5)]);
      }
      default: return Value::boolean(pick(0, 1) == 1);
    }
  }

  std::string var() {
    static const char* names[] = {"x", "y", "t", "s", "Room_1", "v2"};
    return names[pick(0, 5)];
  }

  Term term(int depth) {
    int choice = depth <= 0 ? pick(0, 1) : pick(0, 5);
    switch (choice) {
      case 0: return Term::make_const(constant());
      case 1: return Term::make_var(var());
      case 2: {
        static const FnOp bin[] = {FnOp::Add, FnOp::Sub, FnOp::Mul, FnOp::Div};
        std::vector<Term> args;
        args.push_back(term(depth - 1));
        args.push_back(term(depth - 1));
        return Term::make_fn(bin[pick(0, 3)], std::move(args));
      }
      case 3: {
        static const FnOp un[] = {FnOp::Ln, FnOp::Exp, FnOp::Neg};
        std::vector<Term> args;
        args.push_back(term(depth - 1));
        return Term::make_fn(un[pick(0, 2)], std::move(args));
      }
      default: return dist(depth - 1);
    }
  }

  Term dist(int depth) {
    struct Shape {
      DistFamily family;
      std::vector<std::string> names;
    };
    static const std::vector<Shape> shapes = {
        {DistFamily::Normal, {"mean", "var"}},   {DistFamily::Normal, {"var", "mean"}},
        {DistFamily::Lognormal, {"mu", "var"}},  {DistFamily::Exponential, {"rate"}},
        {DistFamily::Uniform, {"lo", "hi"}},     {DistFamily::Bernoulli, {"p"}},
        {DistFamily::Poisson, {"rate"}},
    };
    if (pick(0, 6) == 0) {
      Term t = Term::make_dist(DistFamily::Discrete, {"values", "weights"}, {});
      int n = pick(1, 3);
      for (int i = 0; i < n; ++i) {
        t.list_values.push_back(Value::integer(pick(0, 9)));
        t.list_weights.push_back(1.0 / n);
      }
      return t;
    }
    const Shape& s = shapes[static_cast<std::size_t>(pick(0, static_cast<int>(shapes.size()) - 1))];
    std::vector<Term> params;
    for (std::size_t i = 0; i < s.names.size(); ++i) params.push_back(term(depth));
    return Term::make_dist(s.family, s.names, std::move(params));
  }

  Atom atom(bool head) {
    static const char* rels[] = {"R", "S", "Edge", "Temp2"};
    Atom a;
    a.relation = rels[pick(0, 3)];
    int n = pick(0, 3);
    for (int i = 0; i < n; ++i) {
      if (head) {
        a.args.push_back(term(3));
      } else {
        a.args.push_back(pick(0, 2) ? Term::make_var(var()) : Term::make_const(constant()));
      }
    }
    return a;
  }

  Program program() {
    Program p;
    int rules = pick(1, 5);
    for (int i = 0; i < rules; ++i) {
      Rule r;
      r.head = atom(true);
      int body = pick(1, 3);
      for (int j = 0; j < body; ++j) r.body.push_back(atom(false));
      p.occurrences.push_back({static_cast<std::size_t>(i), std::move(r)});
    }
    if (pick(0, 3) == 0) {
      // repeated rule text
      p.occurrences.push_back({p.occurrences.size(), p.occurrences.front().rule});
    }
    return p;
  }
};

// ---------------------------------------------------------------------------
// Well-typed programs over a fixed schema, for validation properties.

std::shared_ptr<const Schema> typed_schema() {
  Schema s;
  s.add({"A", {{"i", ValueType::Integer}, {"r", ValueType::Real}}, RelationKind::Extensional});
  s.add({"B", {{"r", ValueType::Real}, {"s", ValueType::String}}, RelationKind::Extensional});
  s.add({"H",
         {{"i", ValueType::Integer}, {"r", ValueType::Real}, {"s", ValueType::String}},
         RelationKind::Intensional});
  return std::make_shared<const Schema>(std::move(s));
}

struct TypedGen {
  std::mt19937_64 rng;
  explicit TypedGen(std::uint64_t seed) : rng(seed) {}
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  // Body: A(i0, r0), B(r1, s0) plus optionally H(i1, r2, s1).
  Rule rule() {
    Rule r;
    r.body.push_back({"A", {Term::make_var("i0"), Term::make_var("r0")}, {}});
    r.body.push_back({"B", {Term::make_var("r1"), Term::make_var("s0")}, {}});
    if (pick(0, 1)) {
      r.body.push_back(
          {"H", {Term::make_var("i1"), Term::make_var("r2"), Term::make_var("s1")}, {}});
    }
    bool with_h = r.body.size() == 3;
    auto ivar = [&] { return Term::make_var(with_h && pick(0, 1) ? "i1" : "i0"); };
    auto rvar = [&] {
      static const char* rs[] = {"r0", "r1", "r2"};
      return Term::make_var(rs[pick(0, with_h ? 2 : 1)]);
    };
    std::vector<Term> args;
    // integer slot
    switch (pick(0, 3)) {
      case 0: args.push_back(ivar()); break;
      case 1: args.push_back(Term::make_const(Value::integer(pick(0, 9)))); break;
      case 2: {
        std::vector<Term> k;
        k.push_back(ivar());
        k.push_back(Term::make_const(Value::integer(1)));
        args.push_back(Term::make_fn(FnOp::Add, std::move(k)));
        break;
      }
      default: {
        std::vector<Term> p;
        p.push_back(Term::make_const(Value::real(0.5)));
        args.push_back(Term::make_dist(DistFamily::Bernoulli, {"p"}, std::move(p)));
      }
    }
    // real slot
    switch (pick(0, 3)) {
      case 0: args.push_back(rvar()); break;
      case 1: args.push_back(ivar()); break;  // integer widens to real
      case 2: {
        std::vector<Term> p;
        p.push_back(rvar());
        p.push_back(Term::make_const(Value::real(0.1)));
        std::vector<Term> sum;
        sum.push_back(rvar());
        sum.push_back(Term::make_dist(DistFamily::Normal, {"mean", "var"}, std::move(p)));
        args.push_back(Term::make_fn(FnOp::Add, std::move(sum)));
        break;
      }
      default: {
        std::vector<Term> p;
        p.push_back(Term::make_const(Value::real(2.0)));
        args.push_back(Term::make_dist(DistFamily::Exponential, {"rate"}, std::move(p)));
      }
    }
    // string slot
    args.push_back(Term::make_var(with_h && pick(0, 1) ? "s1" : "s0"));
    r.head = {"H", std::move(args), {}};
    return r;
  }

  Program program() {
    Program p;
    int n = pick(1, 4);
    for (int i = 0; i < n; ++i) p.occurrences.push_back({static_cast<std::size_t>(i), rule()});
    return p;
  }
};

void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.kind == Term::Kind::Var) out.insert(t.var);
  for (const auto& c : t.children) collect_vars(c, out);
}

}  // namespace

TEST(Parse, DatalogRules) {
  Program p = parse_program("R(x,0) :- S(x). R(x,t+s) :- R(y,t), E(y,x,s).");
  ASSERT_EQ(p.occurrences.size(), 2u);
  EXPECT_EQ(p.occurrences[0].id, 0u);
  EXPECT_EQ(p.occurrences[1].id, 1u);
  auto schema = gdl::testing::walk_schema();
  EXPECT_TRUE(validate_program(p, schema).deterministic());
}

TEST(Parse, LognormalHeadStructure) {
  Program p = parse_program("R(x, t + lognormal(mu=ln(s), var=0.1)) :- R(y,t), E(y,x,s).");
  const Term& head = p.occurrences[0].rule.head.args[1];
  std::vector<Term> ln_args;
  ln_args.push_back(Term::make_var("s"));
  std::vector<Term> params;
  params.push_back(Term::make_fn(FnOp::Ln, std::move(ln_args)));
  params.push_back(Term::make_const(Value::real(0.1)));
  std::vector<Term> sum;
  sum.push_back(Term::make_var("t"));
  sum.push_back(Term::make_dist(DistFamily::Lognormal, {"mu", "var"}, std::move(params)));
  EXPECT_EQ(head, Term::make_fn(FnOp::Add, std::move(sum)));
}

TEST(Parse, SyntaxErrorAtStrayToken) {
  Error e = error_of([] { parse_program("R(x :- S(x)."); });
  EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
  ASSERT_TRUE(e.pos().has_value());
  EXPECT_EQ(e.pos()->line, 1);
  EXPECT_EQ(e.pos()->column, 5);
  EXPECT_NE(std::string(e.what()).find("')'"), std::string::npos) << e.what();
}

TEST(Parse, CommentsWhitespaceAndDuplicates) {
  Program a = parse_program("% reach\nR(x) :- S(x).\n\n  R(x)   :-S(x). % again\n");
  ASSERT_EQ(a.occurrences.size(), 2u);
  EXPECT_EQ(a.occurrences[0].rule, a.occurrences[1].rule);
  EXPECT_NE(a.occurrences[0].id, a.occurrences[1].id);
  EXPECT_EQ(a.occurrences[1].rule.pos.line, 4);
}

TEST(Parse, Precedence) {
  Program p = parse_program("H(a + b * c - -d) :- B(a, b, c, d).");
  EXPECT_EQ(to_string(p.occurrences[0].rule), "H(a + b * c - -d) :- B(a, b, c, d).");
  Program q = parse_program("H((a + b) * c) :- B(a, b, c).");
  EXPECT_EQ(q.occurrences[0].rule.head.args[0].fn, FnOp::Mul);
}

TEST(Parse, RoundTripOfRandomPrograms) {
  SyntaxGen gen(2021);
  for (int i = 0; i < 500; ++i) {
    Program p = gen.program();
    std::string text = to_string(p);
    Program back;
    ASSERT_NO_THROW(back = parse_program(text)) << text;
    EXPECT_EQ(back, p) << text;
    EXPECT_EQ(to_string(back), text);
  }
}

TEST(Validate, ExampleProgramsAndErrors) {
  auto walk = gdl::testing::walk_schema();
  CheckedProgram ok = check(gdl::testing::kNoisyWalkProgram, walk);
  EXPECT_EQ(ok.rules().size(), 2u);
  EXPECT_EQ(ok.dist_sites(), 1u);
  EXPECT_EQ(ok.intensional(), std::vector<std::string>{"R"});
  EXPECT_EQ(ok.extensional(), (std::vector<std::string>{"E", "S"}));

  Error unsafe = error_of([&] { check("R(x, y) :- S(x).", walk); });
  EXPECT_EQ(unsafe.kind(), ErrorKind::UnsafeVariable);
  EXPECT_NE(unsafe.detail().find("y"), std::string::npos);

  auto coin = std::make_shared<const Schema>(Schema({
      {"P", {{"name", ValueType::String}}, RelationKind::Extensional},
      {"F", {{"name", ValueType::String}, {"v", ValueType::Integer}}, RelationKind::Intensional},
  }));
  EXPECT_EQ(error_of([&] { check("F(x, bernoulli(p=x)) :- P(x).", coin); }).kind(),
            ErrorKind::TypeMismatch);
  EXPECT_EQ(error_of([&] { check("S(x) :- S(x).", walk); }).kind(),
            ErrorKind::HeadRelationExtensional);
  EXPECT_EQ(error_of([&] { check("Q(x) :- S(x).", walk); }).kind(), ErrorKind::UnknownRelation);
  EXPECT_EQ(error_of([&] { check("R(x) :- S(x).", walk); }).kind(), ErrorKind::ArityMismatch);
  EXPECT_EQ(error_of([&] { check("R(x, normal(mean=1.0)) :- S(x).", walk); }).kind(),
            ErrorKind::DistParamArity);
  EXPECT_EQ(error_of([&] { check("R(x, normal(mean=1.0, var=-1.0)) :- S(x).", walk); }).kind(),
            ErrorKind::ParamOutOfDomain);
  EXPECT_EQ(error_of([&] { check("R(x, x) :- S(x).", walk); }).kind(), ErrorKind::TypeMismatch);
  // integer head value into a real attribute widens
  EXPECT_NO_THROW(check("R(x, 0) :- S(x).", walk));
}

TEST(Validate, ErrorsArePositioned) {
  Error e = error_of([] { check("R(x, 0) :- S(x).\nR(x, y) :- S(x).", gdl::testing::walk_schema()); });
  ASSERT_TRUE(e.pos().has_value());
  EXPECT_EQ(e.pos()->line, 2);
}

TEST(Validate, AcceptsGeneratedProgramsAndRejectsMutations) {
  auto schema = typed_schema();
  TypedGen gen(77);
  for (int i = 0; i < 300; ++i) {
    Program p = gen.program();
    ASSERT_NO_THROW(validate_program(p, schema)) << to_string(p);

    // Drop a head variable from the body by renaming its body occurrences.
    {
      Program m = p;
      Rule& r = m.occurrences.back().rule;
      std::set<std::string> head_vars;
      for (const auto& a : r.head.args) collect_vars(a, head_vars);
      const std::string victim = *head_vars.begin();
      int fresh = 0;
      for (auto& atom : r.body) {
        for (auto& arg : atom.args) {
          if (arg.kind == Term::Kind::Var && arg.var == victim) arg.var = "fresh" + std::to_string(fresh++);
        }
      }
      EXPECT_EQ(error_of([&] { validate_program(m, schema); }).kind(), ErrorKind::UnsafeVariable)
          << to_string(m);
    }
    // Swap the type of the string slot.
    {
      Program m = p;
      m.occurrences.back().rule.head.args[2] = Term::make_var("r0");
      EXPECT_EQ(error_of([&] { validate_program(m, schema); }).kind(), ErrorKind::TypeMismatch)
          << to_string(m);
    }
  }
}

TEST(Signature, Examples) {
  auto walk = gdl::testing::walk_schema();
  CheckedProgram prog = check(gdl::testing::kWalkProgram, walk);
  const CheckedRule& r = prog.rules()[1];
  EXPECT_EQ(r.head_var_names(), (std::vector<std::string>{"x", "t", "s"}));
  std::map<std::string, Value> a{{"x", Value::string("a")}, {"t", Value::real(1.0)},
                                 {"s", Value::real(2.0)}, {"y", Value::string("z")}};
  std::map<std::string, Value> b = a;
  b["s"] = Value::real(3.0);
  std::map<std::string, Value> c = a;
  c["y"] = Value::string("other");  // not a head variable
  EXPECT_EQ(head_instantiation_signature(r, a), head_instantiation_signature(r, a));
  EXPECT_NE(head_instantiation_signature(r, a), head_instantiation_signature(r, b));
  EXPECT_EQ(head_instantiation_signature(r, a), head_instantiation_signature(r, c));
  std::map<std::string, Value> missing{{"x", Value::string("a")}};
  EXPECT_EQ(error_of([&] { head_instantiation_signature(r, missing); }).kind(),
            ErrorKind::MissingVariable);

  std::vector<Value> one_real{Value::real(1.0)};
  std::vector<Value> one_int{Value::integer(1)};
  EXPECT_NE(signature_from_values(0, one_real), signature_from_values(0, one_int));
  EXPECT_NE(signature_from_values(0, one_int), signature_from_values(1, one_int));
}

TEST(Signature, ExhaustiveEnumerationHasNoCollisions) {
  // 50 integers and 50 reals with the same numeric values, all ordered pairs.
  std::vector<Value> domain;
  for (int i = 0; i < 50; ++i) {
    domain.push_back(Value::integer(i));
    domain.push_back(Value::real(i));
  }
  std::unordered_set<std::string> seen;
  for (const auto& a : domain) {
    for (const auto& b : domain) {
      std::vector<Value> vs{a, b};
      EXPECT_TRUE(seen.insert(signature_from_values(3, vs)).second);
    }
  }
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Signature, InjectiveOnRandomCorpusAndDecodes) {
  std::mt19937_64 rng(99);
  auto value = [&]() -> Value {
    switch (rng() % 4) {
      case 0: return Value::integer(static_cast<std::int64_t>(rng() % 64) - 32);
      case 1: return Value::real(static_cast<double>(rng() % 64) / 4.0 - 8.0);
      case 2: {
        std::string s;
        auto len = rng() % 4;
        for (std::uint64_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng() % 3));
        return Value::string(s);
      }
      default: return Value::boolean(rng() % 2);
    }
  };
  std::set<std::pair<std::uint64_t, std::vector<Value>>> inputs;
  while (inputs.size() < 100000) {
    std::vector<Value> vs;
    auto n = rng() % 4;
    for (std::uint64_t i = 0; i < n; ++i) vs.push_back(value());
    inputs.emplace(rng() % 3, std::move(vs));
  }
  std::unordered_set<std::string> sigs;
  for (const auto& [occ, vs] : inputs) {
    std::string sig = signature_from_values(occ, vs);
    EXPECT_TRUE(sigs.insert(sig).second);
    DecodedSignature d = decode_signature(sig);
    EXPECT_EQ(d.occurrence_id, occ);
    EXPECT_EQ(d.head_values, vs);
  }
}
