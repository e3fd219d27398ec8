#include "gdl/pdb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "gdl/io.hpp"
#include "summation.hpp"

namespace gdl {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ProbTable

ProbTable::ProbTable(std::shared_ptr<const Schema> schema, std::vector<TableRelation> relations)
    : schema_(std::move(schema)), relations_(std::move(relations)) {
  if (!schema_) throw Error(ErrorKind::InvalidArgument, "a table needs a schema");
  for (auto& tr : relations_) {
    const RelationSchema& rel = schema_->at(tr.relation);
    for (std::size_t r = 0; r < tr.rows.size(); ++r) {
      auto& row = tr.rows[r];
      std::string where = tr.relation + " row " + std::to_string(r);
      if (!(row.exists_p > 0.0 && row.exists_p <= 1.0)) {
        throw Error(ErrorKind::ParamOutOfDomain,
                    where + ": exists_p must lie in (0, 1], got " + format_real(row.exists_p));
      }
      if (row.cells.size() != rel.arity()) {
        throw Error(ErrorKind::ArityMismatch, where + " has " + std::to_string(row.cells.size()) +
                                                  " cells, " + rel.name + " has arity " +
                                                  std::to_string(rel.arity()));
      }
      for (std::size_t c = 0; c < row.cells.size(); ++c) {
        auto& cell = row.cells[c];
        ValueType want = rel.attrs[c].type;
        ValueType got = cell.is_dist ? cell.spec->result_type() : cell.constant.type();
        if (!assignable(got, want)) {
          throw Error(ErrorKind::TypeMismatch, where + ", attribute " + rel.attrs[c].name +
                                                   ": expected " + std::string(to_string(want)) +
                                                   ", cell yields " + std::string(to_string(got)));
        }
        if (cell.is_dist) {
          validate_params(*cell.spec, cell.params);
        } else {
          cell.constant = coerce(cell.constant, want);
        }
      }
    }
  }
}

namespace {

TableCell parse_cell(const json& j, const Attribute& attr, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, where + ": a cell must be an object");
  TableCell cell;
  if (j.contains("const")) {
    if (j.size() != 1) {
      throw Error(ErrorKind::InvalidArgument, where + ": a constant cell has only \"const\"");
    }
    cell.constant = value_from_json(j.at("const"), attr.type);
    return cell;
  }
  if (!j.contains("dist") || !j.at("dist").is_string()) {
    throw Error(ErrorKind::InvalidArgument, where + ": a cell needs \"const\" or \"dist\"");
  }
  std::string name = j.at("dist").get<std::string>();
  auto family = dist_family_from_name(name);
  if (!family) throw Error(ErrorKind::Unsupported, where + ": unknown distribution '" + name + "'");
  cell.is_dist = true;
  if (*family == DistFamily::Discrete) {
    if (!j.contains("values") || !j.contains("weights") || !j.at("values").is_array() ||
        !j.at("weights").is_array()) {
      throw Error(ErrorKind::DistParamArity,
                  where + ": discrete needs \"values\" and \"weights\" arrays");
    }
    std::vector<Value> atoms;
    for (const auto& v : j.at("values")) atoms.push_back(value_from_json(v, attr.type));
    std::vector<double> weights;
    for (const auto& w : j.at("weights")) {
      if (!w.is_number()) throw Error(ErrorKind::ParamTypeMismatch, where + ": weights are numbers");
      weights.push_back(w.get<double>());
    }
    cell.spec = DistSpec::discrete(std::move(atoms), std::move(weights));
    return cell;
  }
  cell.spec = DistSpec::of(*family);
  json params = j.value("params", json::object());
  if (!params.is_object()) {
    throw Error(ErrorKind::InvalidArgument, where + ": \"params\" must be an object");
  }
  auto sig = cell.spec->params();
  std::set<std::string> expected;
  for (const auto& p : sig) expected.emplace(p.name);
  for (const auto& [key, value] : params.items()) {
    if (!expected.contains(key)) {
      throw Error(ErrorKind::DistParamArity,
                  where + ": " + name + " has no parameter '" + key + "'");
    }
  }
  for (const auto& p : sig) {
    std::string key(p.name);
    if (!params.contains(key)) {
      throw Error(ErrorKind::DistParamArity, where + ": " + name + " is missing '" + key + "'");
    }
    const json& v = params.at(key);
    if (!v.is_number()) {
      throw Error(ErrorKind::ParamTypeMismatch,
                  where + ": " + name + " parameter '" + key + "' must be a number");
    }
    cell.params.push_back(v.is_number_integer() ? Value::integer(v.get<std::int64_t>())
                                                : Value::real(v.get<double>()));
  }
  return cell;
}

}  // namespace

ProbTable parse_prob_table_json(std::string_view text, std::shared_ptr<const Schema> schema) {
  if (!schema) throw Error(ErrorKind::InvalidArgument, "a table needs a schema");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SyntaxError, std::string("malformed table: ") + e.what());
  }
  std::vector<json> entries;
  if (j.is_array()) {
    entries.assign(j.begin(), j.end());
  } else {
    entries.push_back(j);
  }
  std::vector<TableRelation> relations;
  for (const auto& e : entries) {
    if (!e.is_object() || !e.contains("relation") || !e.contains("rows") ||
        !e.at("rows").is_array()) {
      throw Error(ErrorKind::InvalidArgument,
                  "each table entry needs \"relation\" and a \"rows\" array");
    }
    std::string name = e.at("relation").get<std::string>();
    const RelationSchema& rel = schema->at(name);
    auto it = std::find_if(relations.begin(), relations.end(),
                           [&](const TableRelation& t) { return t.relation == name; });
    if (it == relations.end()) {
      relations.push_back({name, {}});
      it = relations.end() - 1;
    }
    for (const auto& r : e.at("rows")) {
      std::string where = name + " row " + std::to_string(it->rows.size());
      TableRow row;
      if (!r.is_object() || !r.contains("cells") || !r.at("cells").is_array()) {
        throw Error(ErrorKind::InvalidArgument, where + " needs a \"cells\" array");
      }
      if (r.contains("exists_p")) {
        if (!r.at("exists_p").is_number()) {
          throw Error(ErrorKind::ParamTypeMismatch, where + ": exists_p must be a number");
        }
        row.exists_p = r.at("exists_p").get<double>();
      }
      const auto& cells = r.at("cells");
      if (cells.size() != rel.arity()) {
        throw Error(ErrorKind::ArityMismatch, where + " has " + std::to_string(cells.size()) +
                                                  " cells, " + name + " has arity " +
                                                  std::to_string(rel.arity()));
      }
      for (std::size_t c = 0; c < cells.size(); ++c) {
        row.cells.push_back(parse_cell(cells[c], rel.attrs[c], where));
      }
      it->rows.push_back(std::move(row));
    }
  }
  return ProbTable(std::move(schema), std::move(relations));
}

namespace {

Key128 cell_key(std::uint64_t seed, std::uint64_t world, const std::string& rel, std::uint64_t row,
                std::uint64_t cell) {
  std::string bytes;
  bytes.reserve(41 + rel.size());
  bytes.push_back('\x02');
  append_u64_be(bytes, seed);
  append_u64_be(bytes, world);
  append_u64_be(bytes, rel.size());
  bytes += rel;
  append_u64_be(bytes, row);
  append_u64_be(bytes, cell);
  return stable_hash128(bytes);
}

constexpr std::uint64_t kExistsCell = ~std::uint64_t{0};

}  // namespace

Instance sample_table_world(const ProbTable& table, std::uint64_t global_seed,
                            std::uint64_t world_index) {
  Instance out(table.schema_ptr(), InstanceMode::Bag);
  for (const auto& tr : table.relations()) {
    const RelationSchema& rel = table.schema().at(tr.relation);
    for (std::size_t r = 0; r < tr.rows.size(); ++r) {
      const TableRow& row = tr.rows[r];
      if (row.exists_p < 1.0) {
        RngStream s(cell_key(global_seed, world_index, tr.relation, r, kExistsCell));
        if (!(s.next_unit() < row.exists_p)) continue;
      }
      std::vector<Value> values;
      values.reserve(row.cells.size());
      for (std::size_t c = 0; c < row.cells.size(); ++c) {
        const TableCell& cell = row.cells[c];
        if (!cell.is_dist) {
          values.push_back(cell.constant);
          continue;
        }
        RngStream s(cell_key(global_seed, world_index, tr.relation, r, c));
        values.push_back(coerce(sample(*cell.spec, cell.params, s), rel.attrs[c].type));
      }
      out.insert(Fact{tr.relation, std::move(values)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// WorldSource

WorldSource WorldSource::table(std::shared_ptr<const ProbTable> table) {
  if (!table) throw Error(ErrorKind::InvalidArgument, "null table");
  WorldSource s;
  s.kind_ = Kind::Table;
  s.table_ = std::move(table);
  return s;
}

WorldSource WorldSource::generative(std::shared_ptr<const CheckedProgram> program, Instance edb,
                                    SourceOptions options) {
  if (!program) throw Error(ErrorKind::InvalidArgument, "null program");
  if (options.budget < 1) throw Error(ErrorKind::InvalidArgument, "budget must be at least 1");
  // Constructing a state runs the EDB checks once, up front.
  ChaseState probe(*program, edb);
  WorldSource s;
  s.kind_ = Kind::Generative;
  s.program_ = std::move(program);
  s.edb_ = std::make_shared<const Instance>(to_set(edb));
  s.options_ = options;
  return s;
}

WorldSource WorldSource::composed(std::shared_ptr<const ProbTable> table,
                                  std::shared_ptr<const CheckedProgram> program,
                                  SourceOptions options) {
  if (!table || !program) throw Error(ErrorKind::InvalidArgument, "null table or program");
  if (options.budget < 1) throw Error(ErrorKind::InvalidArgument, "budget must be at least 1");
  for (const auto& tr : table->relations()) {
    const auto* mine = table->schema().find(tr.relation);
    const auto* theirs = program->schema().find(tr.relation);
    if (theirs == nullptr || program->is_intensional(tr.relation) || theirs->attrs != mine->attrs) {
      throw Error(ErrorKind::SchemaMismatch,
                  "table relation '" + tr.relation +
                      "' must be an extensional relation of the program with the same attributes");
    }
  }
  WorldSource s;
  s.kind_ = Kind::Composed;
  s.table_ = std::move(table);
  s.program_ = std::move(program);
  s.options_ = options;
  return s;
}

const std::shared_ptr<const Schema>& WorldSource::world_schema() const {
  return kind_ == Kind::Table ? table_->schema_ptr() : program_->schema_ptr();
}

WorldResult sample_world(const WorldSource& source, std::uint64_t global_seed,
                         std::uint64_t world_index,
                         const std::function<void(const TraceEvent&)>& trace) {
  WorldContext ctx{global_seed, world_index};
  ChaseOptions chase{source.options_.budget, source.options_.policy, trace};
  switch (source.kind_) {
    case WorldSource::Kind::Table:
      return WorldResult{sample_table_world(*source.table_, global_seed, world_index),
                         ChaseStatus::Fixpoint, 0, {}};
    case WorldSource::Kind::Generative:
      return run_chase(*source.program_, *source.edb_, ctx, chase);
    case WorldSource::Kind::Composed: {
      Instance edb = to_set(sample_table_world(*source.table_, global_seed, world_index));
      return run_chase(*source.program_, edb, ctx, chase);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown source kind");
}

// ---------------------------------------------------------------------------
// Estimation

std::string_view to_string(BoundsMode mode) {
  switch (mode) {
    case BoundsMode::Conditional: return "conditional";
    case BoundsMode::PessimisticLow: return "pessimistic-low";
    case BoundsMode::OptimisticHigh: return "optimistic-high";
  }
  return "conditional";
}

double z_for_confidence(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "confidence must lie in (0, 1)");
  }
  return normal_quantile(1.0 - (1.0 - confidence) / 2.0);
}

std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double confidence) {
  if (n == 0 || k > n) throw Error(ErrorKind::InvalidArgument, "wilson_interval needs 0 <= k <= n, n > 0");
  double z = z_for_confidence(confidence);
  double nn = static_cast<double>(n);
  double p = static_cast<double>(k) / nn;
  double z2 = z * z;
  double denom = 1.0 + z2 / nn;
  double center = (p + z2 / (2.0 * nn)) / denom;
  double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  double lo = k == 0 ? 0.0 : std::clamp(center - half, 0.0, 1.0);
  double hi = k == n ? 1.0 : std::clamp(center + half, 0.0, 1.0);
  return {lo, hi};
}

namespace {

// Runs body(i) for i in [0, n) on a few threads. If any call throws, the
// exception from the smallest index is rethrown, so failures are as
// deterministic as results.
template <typename Body>
void parallel_for(std::uint64_t n, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n, 1)));
  constexpr std::uint64_t kChunk = 64;
  std::atomic<std::uint64_t> next{0};
  std::mutex mu;
  std::uint64_t err_index = n;
  std::exception_ptr err;
  auto worker = [&] {
    while (true) {
      std::uint64_t begin = next.fetch_add(kChunk);
      if (begin >= n) return;
      std::uint64_t end = std::min(n, begin + kChunk);
      for (std::uint64_t i = begin; i < end; ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
          return;
        }
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}

void check_options(const EstimateOptions& o) {
  if (o.samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be at least 1");
  z_for_confidence(o.confidence);
}

void require_effective(const WorldTally& t) {
  if (t.effective() == 0) {
    throw EstimationError(
        ErrorKind::AllWorldsCensored,
        "no world reached a fixpoint (" + std::to_string(t.censored) + " censored, " +
            std::to_string(t.failed) + " failed of " + std::to_string(t.n) + ")",
        t);
  }
  if (t.effective() < kMinEffectiveWorlds) {
    throw EstimationError(ErrorKind::InsufficientWorlds,
                          "only " + std::to_string(t.effective()) +
                              " worlds reached a fixpoint; at least " +
                              std::to_string(kMinEffectiveWorlds) + " are needed",
                          t);
  }
}

Estimate probability(std::uint64_t k, std::uint64_t n, const WorldTally& t, double confidence,
                     BoundsMode mode) {
  Estimate e;
  e.kind = Estimate::Kind::Probability;
  e.point = static_cast<double>(k) / static_cast<double>(n);
  std::tie(e.ci_low, e.ci_high) = wilson_interval(k, n, confidence);
  e.n_effective = t.effective();
  e.censored_fraction = t.censored_fraction();
  e.failed_fraction = t.failed_fraction();
  e.bounds_mode = mode;
  return e;
}

enum Outcome : std::uint8_t { kFalse, kTrue, kCensored, kFailed };

WorldTally tally_outcomes(const std::vector<std::uint8_t>& outcome) {
  WorldTally t;
  t.n = outcome.size();
  for (auto o : outcome) {
    t.censored += o == kCensored;
    t.failed += o == kFailed;
  }
  return t;
}

}  // namespace

EventReport estimate_event(const WorldSource& source, const std::optional<QueryPlan>& view,
                           const EventExpr& event, const EstimateOptions& options) {
  check_options(options);
  const Schema& event_schema = view ? *view->output_schema() : *source.world_schema();
  CompiledEvent compiled(event_schema, event);

  std::vector<std::uint8_t> outcome(options.samples, kFalse);
  parallel_for(options.samples, options.threads, [&](std::uint64_t w) {
    WorldResult world = sample_world(source, options.global_seed, w);
    if (world.status == ChaseStatus::Censored) {
      outcome[w] = kCensored;
    } else if (world.status == ChaseStatus::Failed) {
      outcome[w] = kFailed;
    } else {
      bool holds = view ? compiled.holds(eval_query(*view, world.instance))
                        : compiled.holds(world.instance);
      outcome[w] = holds ? kTrue : kFalse;
    }
  });

  EventReport r;
  r.tally = tally_outcomes(outcome);
  require_effective(r.tally);
  for (auto o : outcome) r.successes += o == kTrue;
  std::uint64_t decided = r.tally.n - r.tally.failed;
  r.conditional =
      probability(r.successes, r.tally.effective(), r.tally, options.confidence,
                  BoundsMode::Conditional);
  r.pessimistic = probability(r.successes, decided, r.tally, options.confidence,
                              BoundsMode::PessimisticLow);
  r.optimistic = probability(r.successes + r.tally.censored, decided, r.tally,
                             options.confidence, BoundsMode::OptimisticHigh);
  return r;
}

MomentsReport estimate_group_moments(const WorldSource& source, const QueryPlan& view,
                                     const std::vector<std::string>& group_attrs,
                                     const std::string& value_attr,
                                     const EstimateOptions& options) {
  check_options(options);
  const RelationSchema& out = view.output_schema()->relations().front();
  auto index_of = [&](const std::string& name) {
    auto i = out.index_of(name);
    if (!i) {
      throw Error(ErrorKind::UnknownAttribute,
                  "query output " + out.name + " has no attribute '" + name + "'");
    }
    return *i;
  };
  std::vector<std::size_t> group_idx;
  for (const auto& g : group_attrs) group_idx.push_back(index_of(g));
  std::size_t value_idx = index_of(value_attr);
  if (!is_numeric(out.attrs[value_idx].type)) {
    throw Error(ErrorKind::TypeMismatch, "value attribute '" + value_attr + "' is not numeric");
  }

  using Key = std::vector<Value>;
  struct WorldRows {
    std::uint8_t outcome = kFalse;
    std::vector<std::pair<Key, double>> rows;
  };
  std::vector<WorldRows> worlds(options.samples);
  parallel_for(options.samples, options.threads, [&](std::uint64_t w) {
    WorldResult world = sample_world(source, options.global_seed, w);
    WorldRows& slot = worlds[w];
    if (world.status == ChaseStatus::Censored) {
      slot.outcome = kCensored;
      return;
    }
    if (world.status == ChaseStatus::Failed) {
      slot.outcome = kFailed;
      return;
    }
    Instance result = eval_query(view, world.instance);
    std::set<Key> seen;
    for (const auto& [fact, count] : result.facts()) {
      (void)count;
      Key key;
      for (auto g : group_idx) key.push_back(fact.values[g]);
      if (!seen.insert(key).second) {
        std::string text;
        for (const auto& v : key) text += (text.empty() ? "" : ", ") + to_string(v);
        throw Error(ErrorKind::DuplicateGroupRow,
                    "world " + std::to_string(w) + " has more than one row for group (" + text +
                        ")");
      }
      slot.rows.emplace_back(std::move(key), fact.values[value_idx].as_number());
    }
  });

  MomentsReport report;
  {
    std::vector<std::uint8_t> outcome;
    outcome.reserve(worlds.size());
    for (const auto& w : worlds) outcome.push_back(w.outcome);
    report.tally = tally_outcomes(outcome);
  }
  require_effective(report.tally);

  // Two passes in world order: means, then central moments.
  struct Acc {
    std::uint64_t n = 0;
    detail::Summation sum;
    double mean = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
  };
  std::map<Key, Acc> acc;
  for (const auto& w : worlds) {
    for (const auto& [key, x] : w.rows) {
      Acc& a = acc[key];
      ++a.n;
      a.sum.add(x);
    }
  }
  for (auto& [key, a] : acc) a.mean = a.sum.mean(static_cast<double>(a.n));
  for (const auto& w : worlds) {
    for (const auto& [key, x] : w.rows) {
      Acc& a = acc[key];
      double d = x - a.mean;
      double d2 = d * d;
      a.m2 += d2;
      a.m4 += d2 * d2;
    }
  }

  double z = z_for_confidence(options.confidence);
  for (const auto& [key, a] : acc) {
    GroupEstimate g;
    g.key = key;
    g.worlds = a.n;
    double n = static_cast<double>(a.n);
    double var = a.n > 1 ? a.m2 / (n - 1.0) : 0.0;

    g.mean.kind = Estimate::Kind::Moment;
    g.mean.point = a.mean;
    double se_mean = a.n > 1 ? std::sqrt(var / n) : 0.0;
    g.mean.ci_low = a.mean - z * se_mean;
    g.mean.ci_high = a.mean + z * se_mean;

    // Var(s^2) ~ (mu4 - sigma^4 (n-3)/(n-1)) / n.
    g.variance.kind = Estimate::Kind::Moment;
    g.variance.point = var;
    double se_var = 0.0;
    if (a.n > 3) {
      double mu4 = a.m4 / n;
      se_var = std::sqrt(std::max(0.0, (mu4 - var * var * (n - 3.0) / (n - 1.0)) / n));
    }
    g.variance.ci_low = std::max(0.0, var - z * se_var);
    g.variance.ci_high = var + z * se_var;

    for (Estimate* e : {&g.mean, &g.variance}) {
      e->n_effective = a.n;
      e->censored_fraction = report.tally.censored_fraction();
      e->failed_fraction = report.tally.failed_fraction();
    }
    report.groups.push_back(std::move(g));
  }
  return report;
}

json estimate_to_json(const Estimate& e) {
  return json{{"kind", e.kind == Estimate::Kind::Probability ? "probability" : "moment"},
              {"point", e.point},
              {"ci", {e.ci_low, e.ci_high}},
              {"n_effective", e.n_effective},
              {"censored_fraction", e.censored_fraction},
              {"failed_fraction", e.failed_fraction},
              {"bounds_mode", std::string(to_string(e.bounds_mode))}};
}

}  // namespace gdl
