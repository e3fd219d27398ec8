#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gdl/schema.hpp"
#include "gdl/value.hpp"

namespace gdl {

struct Fact {
  std::string relation;
  std::vector<Value> values;

  friend bool operator==(const Fact&, const Fact&) = default;
  friend std::strong_ordering operator<=>(const Fact&, const Fact&) = default;
};

std::string to_string(const Fact& f);

// Validates relation, arity, and per-position types (no implicit widening).
// Errors: UnknownRelation, ArityMismatch, TypeMismatch.
Fact make_fact(const Schema& schema, std::string_view relation, std::vector<Value> values);
void check_fact(const Schema& schema, const Fact& fact);

enum class InstanceMode { Bag, Set };

// A finite bag (or set) of facts over a schema. Facts are kept in a sorted
// map so iteration order, and everything derived from it, is deterministic.
class Instance {
 public:
  using Contents = std::map<Fact, std::uint64_t>;

  explicit Instance(std::shared_ptr<const Schema> schema,
                    InstanceMode mode = InstanceMode::Bag);

  // Validates against the schema. In set mode the multiplicity stays 1.
  void insert(Fact fact, std::uint64_t count = 1);
  void insert(std::string_view relation, std::vector<Value> values) {
    insert(Fact{std::string(relation), std::move(values)});
  }

  InstanceMode mode() const { return mode_; }
  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  const Contents& facts() const { return facts_; }

  std::uint64_t count(const Fact& f) const;
  bool contains(const Fact& f) const { return count(f) > 0; }
  std::size_t distinct_size() const { return facts_.size(); }
  std::uint64_t total_size() const;
  bool empty() const { return facts_.empty(); }

  // Facts of one relation, in sorted order.
  std::vector<const Fact*> facts_of(std::string_view relation) const;

  // Same mode and contents; schemas are not compared.
  friend bool operator==(const Instance& a, const Instance& b) {
    return a.mode_ == b.mode_ && a.facts_ == b.facts_;
  }

 private:
  std::shared_ptr<const Schema> schema_;
  InstanceMode mode_;
  Contents facts_;
};

// Set-mode copy with the same support.
Instance to_set(const Instance& instance);

}  // namespace gdl
