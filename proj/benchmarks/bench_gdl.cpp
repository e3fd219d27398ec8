#include <benchmark/benchmark.h>

#include "gdl/chase.hpp"
#include "gdl/pdb.hpp"
#include "gdl/query.hpp"
#include "test_support.hpp"

using namespace gdl;
using namespace gdl::testing;

namespace {

// Layered DAG: every vertex of layer i points at every vertex of layer i + 1,
// so the number of walks grows as width^depth.
Graph layered(int depth, int width) {
  Graph g;
  g.n = depth * width;
  for (int l = 0; l + 1 < depth; ++l) {
    for (int a = 0; a < width; ++a) {
      for (int b = 0; b < width; ++b) g.edges.emplace_back(l * width + a, (l + 1) * width + b, 1.0 + a + b);
    }
  }
  g.sources = {0};
  return g;
}

std::shared_ptr<const ProbTable> temp_table() {
  auto schema = load_schema_file("temp_schema.json");
  return std::make_shared<const ProbTable>(
      parse_prob_table_json(read_file(data_path("temp_table.json")), schema));
}

}  // namespace

static void BM_ChaseNoisyWalk(benchmark::State& state) {
  auto schema = walk_schema();
  CheckedProgram prog = check(kNoisyWalkProgram, schema);
  Instance edb = walk_edb(layered(static_cast<int>(state.range(0)), 3), schema);
  std::uint64_t world = 0, firings = 0;
  for (auto _ : state) {
    WorldResult r = run_chase(prog, edb, WorldContext{1, world++}, {});
    firings += r.firings;
    benchmark::DoNotOptimize(r.instance);
  }
  state.counters["firings/s"] = benchmark::Counter(static_cast<double>(firings), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ChaseNoisyWalk)->Arg(3)->Arg(5)->Arg(7);

static void BM_DatalogReach(benchmark::State& state) {
  auto schema = reach_schema();
  CheckedProgram prog = check(kReachProgram, schema);
  std::mt19937_64 rng(7);
  Graph g = random_graph(rng, static_cast<int>(state.range(0)), 4.0 / static_cast<double>(state.range(0)), false);
  Instance edb = reach_edb(g, schema);
  for (auto _ : state) benchmark::DoNotOptimize(run_deterministic_datalog(prog, edb));
}
BENCHMARK(BM_DatalogReach)->Arg(100)->Arg(1000);

static void BM_SampleTableWorld(benchmark::State& state) {
  auto table = temp_table();
  std::uint64_t world = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_table_world(*table, 1, world++));
}
BENCHMARK(BM_SampleTableWorld);

static void BM_QueryRoomAverage(benchmark::State& state) {
  auto table = temp_table();
  QueryPlan view = parse_query(read_file(data_path("room_avg.sql")), table->schema_ptr());
  Instance world = sample_table_world(*table, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(eval_query(view, world));
}
BENCHMARK(BM_QueryRoomAverage);

static void BM_EstimateBothRooms(benchmark::State& state) {
  auto table = temp_table();
  QueryPlan view = parse_query(read_file(data_path("room_avg.sql")), table->schema_ptr());
  EventExpr e = parse_event(read_file(data_path("both_rooms.event")));
  EstimateOptions o;
  o.samples = static_cast<std::uint64_t>(state.range(0));
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_event(WorldSource::table(table), view, e, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateBothRooms)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
