#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdl/chase.hpp"
#include "gdl/distribution.hpp"
#include "gdl/event.hpp"
#include "gdl/instance.hpp"
#include "gdl/program.hpp"
#include "gdl/query.hpp"

namespace gdl {

// ---------------------------------------------------------------------------
// Probabilistic tables

struct TableCell {
  bool is_dist = false;
  Value constant;                  // when !is_dist, already of the attribute type
  std::optional<DistSpec> spec;    // when is_dist
  std::vector<Value> params;       // constant parameters in signature order
};

struct TableRow {
  double exists_p = 1.0;
  std::vector<TableCell> cells;
};

struct TableRelation {
  std::string relation;
  std::vector<TableRow> rows;
};

// Rows with independent existence flags and independent cells.
class ProbTable {
 public:
  // Errors: UnknownRelation, ArityMismatch, TypeMismatch (cell or
  // distribution result not assignable), ParamOutOfDomain (exists_p outside
  // (0, 1] or bad distribution parameters).
  ProbTable(std::shared_ptr<const Schema> schema, std::vector<TableRelation> relations);

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  const std::vector<TableRelation>& relations() const { return relations_; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<TableRelation> relations_;
};

// One object or an array of objects:
//   {"relation": "R", "rows": [{"exists_p": 0.3,
//     "cells": [{"const": v} | {"dist": "normal", "params": {"mean": m, "var": v}}
//               | {"dist": "discrete", "values": [...], "weights": [...]}]}]}
// Rows of repeated relation entries are appended in file order.
ProbTable parse_prob_table_json(std::string_view text, std::shared_ptr<const Schema> schema);

// Cell c of row r of relation `rel` draws from the stream keyed by
// stable_hash128(0x02 ++ seed ++ world ++ len(rel) ++ rel ++ r ++ c); the
// existence flag uses c = 2^64 - 1. Returns a bag instance.
Instance sample_table_world(const ProbTable& table, std::uint64_t global_seed,
                            std::uint64_t world_index);

// ---------------------------------------------------------------------------
// World sources

struct SourceOptions {
  std::uint64_t budget = 1'000'000;
  Policy policy = Policy::first();
};

class WorldSource {
 public:
  enum class Kind { Table, Generative, Composed };

  static WorldSource table(std::shared_ptr<const ProbTable> table);
  // Errors: EDBSchemaMismatch when `edb` holds intensional facts.
  static WorldSource generative(std::shared_ptr<const CheckedProgram> program, Instance edb,
                                SourceOptions options = {});
  // The table supplies extensional worlds (as sets) to the program.
  // Errors: SchemaMismatch when a table relation is not an extensional
  // relation of the program with the same attributes.
  static WorldSource composed(std::shared_ptr<const ProbTable> table,
                              std::shared_ptr<const CheckedProgram> program,
                              SourceOptions options = {});

  Kind kind() const { return kind_; }
  // Schema of the sampled worlds.
  const std::shared_ptr<const Schema>& world_schema() const;
  const SourceOptions& options() const { return options_; }

 private:
  friend WorldResult sample_world(const WorldSource&, std::uint64_t, std::uint64_t,
                                  const std::function<void(const TraceEvent&)>&);
  WorldSource() = default;

  Kind kind_ = Kind::Table;
  std::shared_ptr<const ProbTable> table_;
  std::shared_ptr<const CheckedProgram> program_;
  std::shared_ptr<const Instance> edb_;
  SourceOptions options_;
};

// Table worlds come back as bags with status fixpoint; program worlds are the
// intensional part of the chase result.
WorldResult sample_world(const WorldSource& source, std::uint64_t global_seed,
                         std::uint64_t world_index,
                         const std::function<void(const TraceEvent&)>& trace = {});

// ---------------------------------------------------------------------------
// Estimation

inline constexpr std::uint64_t kMinEffectiveWorlds = 100;

enum class BoundsMode { Conditional, PessimisticLow, OptimisticHigh };
std::string_view to_string(BoundsMode mode);

struct WorldTally {
  std::uint64_t n = 0;
  std::uint64_t censored = 0;
  std::uint64_t failed = 0;

  std::uint64_t effective() const { return n - censored - failed; }
  double censored_fraction() const { return n ? static_cast<double>(censored) / n : 0.0; }
  double failed_fraction() const { return n ? static_cast<double>(failed) / n : 0.0; }
};

struct Estimate {
  enum class Kind { Probability, Moment };

  Kind kind = Kind::Probability;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t n_effective = 0;
  double censored_fraction = 0.0;
  double failed_fraction = 0.0;
  BoundsMode bounds_mode = BoundsMode::Conditional;
};

// Thrown when no estimate is possible; carries the world tally.
// Kinds: AllWorldsCensored (no fixpoint world at all) or InsufficientWorlds
// (fewer than kMinEffectiveWorlds).
class EstimationError : public Error {
 public:
  EstimationError(ErrorKind kind, const std::string& message, WorldTally tally)
      : Error(kind, message), tally_(tally) {}
  const WorldTally& tally() const { return tally_; }

 private:
  WorldTally tally_;
};

struct EstimateOptions {
  std::uint64_t samples = 10'000;
  std::uint64_t global_seed = 0;
  double confidence = 0.95;
  // Worker threads; 0 picks the hardware concurrency. Results do not depend
  // on this value.
  unsigned threads = 0;
};

struct EventReport {
  WorldTally tally;
  std::uint64_t successes = 0;  // among fixpoint worlds
  Estimate conditional;
  Estimate pessimistic;  // censored worlds counted as event-false
  Estimate optimistic;   // censored worlds counted as event-true
};

// Samples worlds 0..samples-1, applies `view` (if any) and tests `event`.
// Errors: SchemaMismatch (event or view does not fit the worlds),
// EstimationError.
EventReport estimate_event(const WorldSource& source, const std::optional<QueryPlan>& view,
                           const EventExpr& event, const EstimateOptions& options);

struct GroupEstimate {
  std::vector<Value> key;
  std::uint64_t worlds = 0;  // fixpoint worlds in which the group appeared
  Estimate mean;
  Estimate variance;  // unbiased sample variance
};

struct MomentsReport {
  WorldTally tally;
  std::vector<GroupEstimate> groups;  // sorted by key
};

// Errors: UnknownAttribute (group or value attribute not in the view
// output), TypeMismatch (non-numeric value attribute), DuplicateGroupRow,
// EstimationError.
MomentsReport estimate_group_moments(const WorldSource& source, const QueryPlan& view,
                                     const std::vector<std::string>& group_attrs,
                                     const std::string& value_attr,
                                     const EstimateOptions& options);

// Wilson score interval, clamped to [0, 1]. Requires 0 <= k <= n, n > 0 and
// confidence in (0, 1).
std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double confidence);

// Two-sided standard normal critical value for `confidence`.
double z_for_confidence(double confidence);

nlohmann::json estimate_to_json(const Estimate& e);

}  // namespace gdl
