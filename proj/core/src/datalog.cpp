#include <optional>

#include "fact_store.hpp"
#include "gdl/chase.hpp"
#include "head_eval.hpp"

namespace gdl {

DatalogResult run_deterministic_datalog(const CheckedProgram& program, const Instance& edb,
                                        std::uint64_t budget) {
  if (!program.deterministic()) {
    throw Error(ErrorKind::NondeterministicProgram,
                "program has " + std::to_string(program.dist_sites()) +
                    " distribution site(s); use the chase instead");
  }
  detail::FactStore store(program.schema());
  for (const auto& [fact, count] : edb.facts()) {
    (void)count;
    if (program.is_intensional(fact.relation)) {
      throw Error(ErrorKind::EDBSchemaMismatch,
                  "input holds facts of intensional relation '" + fact.relation + "'");
    }
    try {
      check_fact(program.schema(), fact);
    } catch (const Error& e) {
      throw Error(ErrorKind::EDBSchemaMismatch, e.detail());
    }
    store.insert(*store.relation_id(fact.relation), fact.values);
  }

  std::vector<detail::JoinPlan> plans;
  for (const auto& rule : program.rules()) plans.push_back(detail::make_join_plan(store, rule));

  DatalogResult result{Instance(program.schema_ptr(), InstanceMode::Set), ChaseStatus::Fixpoint, 0,
                       {}};
  auto no_draw = [](const Term&, std::span<const Value>) -> Value {
    throw Error(ErrorKind::NondeterministicProgram, "distribution site in deterministic program");
  };

  // Derivations of one round are buffered so the store is not modified
  // while matches hold pointers into it.
  std::vector<std::pair<std::size_t, detail::Row>> derived;
  auto derive = [&](const detail::JoinPlan& plan, const detail::Binding& b) {
    const CheckedRule& rule = *plan.rule;
    std::vector<Value> env(rule.variables.size());
    for (auto v : rule.head_vars) env[v] = *b[v];
    detail::Row row;
    row.reserve(rule.rule.head.args.size());
    for (std::size_t i = 0; i < rule.rule.head.args.size(); ++i) {
      row.push_back(coerce(detail::eval_term(rule.rule.head.args[i], env, no_draw),
                           rule.head_attr_types[i]));
    }
    derived.emplace_back(*store.relation_id(rule.rule.head.relation), std::move(row));
  };

  const std::size_t nrel = store.relation_count();
  std::vector<std::size_t> lo(nrel, 0), hi(nrel, 0);
  try {
    for (const auto& plan : plans) {
      detail::for_each_match(store, plan, std::nullopt, nullptr,
                             [&](const detail::Binding& b) { derive(plan, b); });
    }
    while (true) {
      for (std::size_t r = 0; r < nrel; ++r) lo[r] = hi[r] = store.rows(r).size();
      bool grew = false;
      for (auto& [rel, row] : derived) {
        if (store.insert(rel, std::move(row))) {
          grew = true;
          if (++result.derived > budget) {
            result.status = ChaseStatus::Censored;
            break;
          }
        }
      }
      derived.clear();
      if (result.status == ChaseStatus::Censored || !grew) break;
      for (std::size_t r = 0; r < nrel; ++r) hi[r] = store.rows(r).size();

      for (const auto& plan : plans) {
        for (std::size_t a = 0; a < plan.atom_rel.size(); ++a) {
          std::size_t rel = plan.atom_rel[a];
          for (std::size_t k = lo[rel]; k < hi[rel]; ++k) {
            detail::for_each_match(store, plan, a, &store.rows(rel)[k],
                                   [&](const detail::Binding& b) { derive(plan, b); });
          }
        }
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NondeterministicProgram) throw;
    result.status = ChaseStatus::Failed;
    result.failure = e.what();
  }

  result.instance = store.to_instance(
      program.schema_ptr(), [&](const std::string& r) { return program.is_intensional(r); });
  return result;
}

}  // namespace gdl
