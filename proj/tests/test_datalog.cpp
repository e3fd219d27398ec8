#include <gtest/gtest.h>

#include <random>

#include "gdl/chase.hpp"
#include "gdl/error.hpp"
#include "test_support.hpp"

using namespace gdl;
using namespace gdl::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no gdl::Error thrown";
  return ErrorKind::Io;
}

std::set<std::string> reached(const Instance& inst) {
  std::set<std::string> out;
  for (const Fact* f : inst.facts_of("R")) out.insert(f->values[0].as_string());
  return out;
}

std::set<std::pair<std::string, double>> walks(const Instance& inst) {
  std::set<std::pair<std::string, double>> out;
  for (const Fact* f : inst.facts_of("R")) out.emplace(f->values[0].as_string(), f->values[1].as_real());
  return out;
}

}  // namespace

TEST(Datalog, ReachabilityMatchesBfs) {
  std::mt19937_64 rng(1);
  auto schema = reach_schema();
  CheckedProgram prog = check(kReachProgram, schema);
  for (int trial = 0; trial < 100; ++trial) {
    Graph g = random_graph(rng, 50, 0.05, /*acyclic=*/false, 3);
    DatalogResult res = run_deterministic_datalog(prog, reach_edb(g, schema));
    ASSERT_EQ(res.status, ChaseStatus::Fixpoint);
    EXPECT_EQ(reached(res.instance), bfs_reachable(g)) << "graph " << trial;
    EXPECT_EQ(res.derived, res.instance.distinct_size());
  }
}

TEST(Datalog, WalkLengthsOnDagsMatchEnumeration) {
  std::mt19937_64 rng(2);
  auto schema = walk_schema();
  CheckedProgram prog = check(kWalkProgram, schema);
  for (int trial = 0; trial < 100; ++trial) {
    Graph g = random_graph(rng, 12, 0.4, /*acyclic=*/true);
    DatalogResult res = run_deterministic_datalog(prog, walk_edb(g, schema));
    ASSERT_EQ(res.status, ChaseStatus::Fixpoint);
    EXPECT_EQ(walks(res.instance), dag_walk_lengths(g)) << "graph " << trial;
  }
}

TEST(Datalog, AgreesWithTheChase) {
  std::mt19937_64 rng(3);
  auto wschema = walk_schema();
  auto rschema = reach_schema();
  CheckedProgram walk = check(kWalkProgram, wschema);
  CheckedProgram reach = check(kReachProgram, rschema);
  for (int trial = 0; trial < 50; ++trial) {
    Graph g = random_graph(rng, 9, 0.3, /*acyclic=*/true);
    EXPECT_EQ(run_deterministic_datalog(walk, walk_edb(g, wschema)).instance,
              run_chase(walk, walk_edb(g, wschema), {}).instance);
    Graph h = random_graph(rng, 15, 0.15, /*acyclic=*/false);
    EXPECT_EQ(run_deterministic_datalog(reach, reach_edb(h, rschema)).instance,
              run_chase(reach, reach_edb(h, rschema), {}).instance);
  }
}

TEST(Datalog, NoRulesGivesEmptyResult) {
  auto schema = reach_schema();
  CheckedProgram prog = check("", schema);
  Instance edb(schema, InstanceMode::Set);
  edb.insert("S", {Value::string("a")});
  DatalogResult res = run_deterministic_datalog(prog, edb);
  EXPECT_EQ(res.status, ChaseStatus::Fixpoint);
  EXPECT_TRUE(res.instance.empty());
}

TEST(Datalog, RejectsDistributions) {
  auto schema = walk_schema();
  CheckedProgram prog = check(kNoisyWalkProgram, schema);
  EXPECT_EQ(kind_of([&] { run_deterministic_datalog(prog, Instance(schema)); }),
            ErrorKind::NondeterministicProgram);
}

TEST(Datalog, BudgetCensorsDivergentPrograms) {
  auto schema = walk_schema();
  CheckedProgram prog = check(kWalkProgram, schema);
  Instance edb(schema, InstanceMode::Set);
  edb.insert("S", {Value::string("a")});
  edb.insert("E", {Value::string("a"), Value::string("b"), Value::real(1.0)});
  edb.insert("E", {Value::string("b"), Value::string("a"), Value::real(1.0)});
  DatalogResult res = run_deterministic_datalog(prog, edb, 100);
  EXPECT_EQ(res.status, ChaseStatus::Censored);
  EXPECT_GT(res.derived, 100u);
}

TEST(Datalog, DomainErrorFails) {
  auto schema = std::make_shared<const Schema>(Schema({
      {"Q", {{"p", ValueType::Real}}, RelationKind::Extensional},
      {"L", {{"v", ValueType::Real}}, RelationKind::Intensional},
  }));
  Instance edb(schema, InstanceMode::Set);
  edb.insert("Q", {Value::real(-1.0)});
  DatalogResult res = run_deterministic_datalog(check("L(ln(p)) :- Q(p).", schema), edb);
  EXPECT_EQ(res.status, ChaseStatus::Failed);
  EXPECT_FALSE(res.failure.empty());
}
