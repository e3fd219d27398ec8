#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gdl/event.hpp"
#include "gdl/instance.hpp"

namespace gdl {

enum class AggFn { Avg, Sum, Count, Min, Max };
std::string_view to_string(AggFn fn);

// One output column of a plan node. `qualifier` is the FROM alias the
// column came from (empty after projection or aggregation).
struct PlanColumn {
  std::string qualifier;
  std::string name;
  ValueType type = ValueType::Real;
};

// Column CMP column, or column CMP constant. Indices refer to the child's
// output columns.
struct PlanCondition {
  std::size_t left = 0;
  Cmp cmp = Cmp::Eq;
  bool rhs_is_column = false;
  std::size_t right = 0;
  Value constant;
};

struct Aggregate {
  AggFn fn = AggFn::Count;
  // Input column, or none for COUNT(*).
  std::optional<std::size_t> input;
};

struct PlanNode {
  enum class Kind { Scan, Select, Project, Join, GroupAggregate, Union };

  Kind kind = Kind::Scan;
  std::vector<PlanColumn> columns;
  std::vector<std::shared_ptr<const PlanNode>> children;

  std::string relation;                    // Scan
  std::vector<PlanCondition> conditions;   // Select
  std::vector<std::size_t> project;        // Project
  // Join: pairs (left column, right column) that must be equal; the output
  // is the left columns followed by the right columns.
  std::vector<std::pair<std::size_t, std::size_t>> join_keys;
  std::vector<std::size_t> group;          // GroupAggregate: group columns first,
  std::vector<Aggregate> aggregates;       // then one column per aggregate
};

// A validated plan together with its input and output schemas.
class QueryPlan {
 public:
  QueryPlan(std::shared_ptr<const PlanNode> root, std::shared_ptr<const Schema> input,
            std::string output_relation);

  const PlanNode& root() const { return *root_; }
  const std::shared_ptr<const PlanNode>& root_ptr() const { return root_; }
  const Schema& input_schema() const { return *input_; }
  // A one-relation schema describing the result.
  const std::shared_ptr<const Schema>& output_schema() const { return output_; }
  const std::string& output_relation() const { return output_relation_; }
  // Relations read by Scan nodes, sorted and unique.
  std::vector<std::string> input_relations() const;

 private:
  std::shared_ptr<const PlanNode> root_;
  std::shared_ptr<const Schema> input_;
  std::shared_ptr<const Schema> output_;
  std::string output_relation_;
};

// SQL-like surface:
//   query  := select (UNION select)*
//   select := SELECT items [INTO name] FROM rel [alias] (',' rel [alias])*
//             [WHERE cond (AND cond)*] [GROUP BY col (',' col)*]
// Strings are single-quoted; `--` starts a comment. The result relation is
// named "Result" unless INTO gives a name.
// Errors: SyntaxError, UnknownRelation, UnknownAttribute, NonNumericAggregate,
// InvalidQuery (ambiguous or duplicate columns, bad GROUP BY, UNION shape).
QueryPlan parse_query(std::string_view text, std::shared_ptr<const Schema> schema);

// Indented operator tree, one node per line.
std::string to_string(const PlanNode& node);

// Evaluates over the set support of `world`; the result is a set instance
// over plan.output_schema(). Errors: SchemaMismatch when a scanned relation
// is missing from the world's schema or declared differently.
Instance eval_query(const QueryPlan& plan, const Instance& world);

}  // namespace gdl
