#include "fact_store.hpp"

namespace gdl::detail {

FactStore::FactStore(const Schema& schema) {
  for (const auto& rel : schema.relations()) {
    names_.push_back(rel.name);
    Table t;
    t.columns.resize(rel.arity());
    tables_.push_back(std::move(t));
  }
}

std::optional<std::size_t> FactStore::relation_id(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

bool FactStore::insert(std::size_t rel, Row row) {
  Table& t = tables_[rel];
  if (t.set.contains(row)) return false;
  auto id = static_cast<std::uint32_t>(t.rows.size());
  for (std::size_t c = 0; c < row.size(); ++c) t.columns[c][row[c]].push_back(id);
  t.set.insert(row);
  t.rows.push_back(std::move(row));
  return true;
}

const std::vector<std::uint32_t>* FactStore::lookup(std::size_t rel, std::size_t col,
                                                    const Value& v) const {
  const auto& index = tables_[rel].columns[col];
  auto it = index.find(v);
  return it == index.end() ? nullptr : &it->second;
}

JoinPlan make_join_plan(const FactStore& store, const CheckedRule& rule) {
  JoinPlan plan;
  plan.rule = &rule;
  for (const auto& atom : rule.body) plan.atom_rel.push_back(*store.relation_id(atom.relation));
  return plan;
}

}  // namespace gdl::detail
