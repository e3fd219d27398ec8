#pragma once

// Evaluation of annotated head terms under a variable environment.

#include <span>
#include <vector>

#include "gdl/program.hpp"

namespace gdl::detail {

// `env[i]` holds the value of rule variable i (only head variables are read).
// `draw(term, params)` is called for every Dist node, in pre-order.
template <typename Draw>
Value eval_term(const Term& t, std::span<const Value> env, Draw& draw) {
  switch (t.kind) {
    case Term::Kind::Const: return t.constant;
    case Term::Kind::Var: return env[static_cast<std::size_t>(t.var_index)];
    case Term::Kind::Fn: {
      std::vector<Value> args;
      args.reserve(t.children.size());
      for (const auto& c : t.children) args.push_back(eval_term(c, env, draw));
      return apply_fn(t.fn, args);
    }
    case Term::Kind::Dist: {
      std::vector<Value> params;
      params.reserve(t.children.size());
      for (const auto& c : t.children) params.push_back(eval_term(c, env, draw));
      return draw(t, std::span<const Value>(params));
    }
  }
  return t.constant;
}

}  // namespace gdl::detail
