#pragma once

// Indexed set-semantics fact storage and body-match enumeration shared by the
// chase and the semi-naive Datalog evaluator.

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gdl/instance.hpp"
#include "gdl/program.hpp"

namespace gdl::detail {

using Row = std::vector<Value>;

struct RowHash {
  std::size_t operator()(const Row& row) const noexcept {
    std::size_t h = 0x84222325cbf29ce4ULL;
    for (const auto& v : row) h = (h ^ v.hash()) * 0x100000001b3ULL;
    return h;
  }
};

class FactStore {
 public:
  explicit FactStore(const Schema& schema);

  std::optional<std::size_t> relation_id(std::string_view name) const;
  const std::string& relation_name(std::size_t rel) const { return names_[rel]; }
  std::size_t relation_count() const { return names_.size(); }

  // Returns true when the row was not present.
  bool insert(std::size_t rel, Row row);
  bool contains(std::size_t rel, const Row& row) const { return tables_[rel].set.contains(row); }

  const std::vector<Row>& rows(std::size_t rel) const { return tables_[rel].rows; }
  // Row ids whose column `col` equals `v`, or nullptr when there are none.
  const std::vector<std::uint32_t>* lookup(std::size_t rel, std::size_t col,
                                           const Value& v) const;

  // Set-mode instance of the relations accepted by `keep`.
  template <typename Keep>
  Instance to_instance(std::shared_ptr<const Schema> schema, Keep&& keep) const {
    Instance out(std::move(schema), InstanceMode::Set);
    for (std::size_t r = 0; r < tables_.size(); ++r) {
      if (!keep(names_[r])) continue;
      for (const auto& row : tables_[r].rows) out.insert(Fact{names_[r], row});
    }
    return out;
  }

 private:
  struct Table {
    std::vector<Row> rows;
    std::unordered_set<Row, RowHash> set;
    std::vector<std::unordered_map<Value, std::vector<std::uint32_t>>> columns;
  };
  std::vector<std::string> names_;
  std::vector<Table> tables_;
};

// A rule body resolved to store relation ids.
struct JoinPlan {
  const CheckedRule* rule = nullptr;
  std::vector<std::size_t> atom_rel;
};

JoinPlan make_join_plan(const FactStore& store, const CheckedRule& rule);

// Binding of rule variables to values owned by the store (or by a seed row).
using Binding = std::vector<const Value*>;

namespace join_impl {

inline bool unify(const CheckedAtom& atom, const Row& row, Binding& b,
                  std::vector<std::size_t>& newly_bound) {
  for (std::size_t i = 0; i < atom.slots.size(); ++i) {
    const auto& slot = atom.slots[i];
    if (!slot.is_var) {
      if (!(row[i] == slot.constant)) return false;
    } else if (b[slot.var] != nullptr) {
      if (!(*b[slot.var] == row[i])) return false;
    } else {
      b[slot.var] = &row[i];
      newly_bound.push_back(slot.var);
    }
  }
  return true;
}

template <typename OnMatch>
void extend(const FactStore& store, const JoinPlan& plan, const std::vector<std::size_t>& order,
            std::size_t depth, Binding& b, OnMatch& on_match) {
  if (depth == order.size()) {
    on_match(b);
    return;
  }
  const std::size_t ai = order[depth];
  const CheckedAtom& atom = plan.rule->body[ai];
  const std::size_t rel = plan.atom_rel[ai];
  const auto& rows = store.rows(rel);

  // Use the column index of the first bound slot, if any.
  const std::vector<std::uint32_t>* candidates = nullptr;
  bool have_index = false;
  for (std::size_t i = 0; i < atom.slots.size(); ++i) {
    const auto& slot = atom.slots[i];
    const Value* key = nullptr;
    if (!slot.is_var) {
      key = &slot.constant;
    } else if (b[slot.var] != nullptr) {
      key = b[slot.var];
    }
    if (key != nullptr) {
      candidates = store.lookup(rel, i, *key);
      have_index = true;
      break;
    }
  }
  if (have_index && candidates == nullptr) return;

  std::vector<std::size_t> newly_bound;
  auto visit = [&](const Row& row) {
    newly_bound.clear();
    if (unify(atom, row, b, newly_bound)) {
      extend(store, plan, order, depth + 1, b, on_match);
    }
    for (auto v : newly_bound) b[v] = nullptr;
  };
  if (have_index) {
    const std::size_t n = candidates->size();
    for (std::size_t k = 0; k < n; ++k) visit(rows[(*candidates)[k]]);
  } else {
    const std::size_t n = rows.size();
    for (std::size_t k = 0; k < n; ++k) visit(rows[k]);
  }
}

}  // namespace join_impl

// Calls on_match(binding) for every body match. When `seed_atom` is set, that
// atom is matched against `seed_row` only and the others against the store.
template <typename OnMatch>
void for_each_match(const FactStore& store, const JoinPlan& plan,
                    std::optional<std::size_t> seed_atom, const Row* seed_row,
                    OnMatch&& on_match) {
  const auto& body = plan.rule->body;
  Binding b(plan.rule->variables.size(), nullptr);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (!seed_atom || i != *seed_atom) order.push_back(i);
  }
  if (seed_atom) {
    std::vector<std::size_t> bound;
    if (!join_impl::unify(body[*seed_atom], *seed_row, b, bound)) return;
  }
  join_impl::extend(store, plan, order, 0, b, on_match);
}

}  // namespace gdl::detail
