#include "gdl/instance.hpp"

#include "gdl/error.hpp"

namespace gdl {

std::string to_string(const Fact& f) {
  std::string out = f.relation + "(";
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (i) out += ", ";
    out += to_string(f.values[i]);
  }
  out += ")";
  return out;
}

void check_fact(const Schema& schema, const Fact& fact) {
  const auto& rel = schema.at(fact.relation);
  if (fact.values.size() != rel.arity()) {
    throw Error(ErrorKind::ArityMismatch, fact.relation + " expects " +
                                              std::to_string(rel.arity()) + " values, got " +
                                              std::to_string(fact.values.size()));
  }
  for (std::size_t i = 0; i < rel.arity(); ++i) {
    if (fact.values[i].type() != rel.attrs[i].type) {
      throw Error(ErrorKind::TypeMismatch,
                  fact.relation + " position " + std::to_string(i) + " (" +
                      rel.attrs[i].name + ") expects " +
                      std::string(to_string(rel.attrs[i].type)) + ", got " +
                      std::string(to_string(fact.values[i].type())));
    }
  }
}

Fact make_fact(const Schema& schema, std::string_view relation, std::vector<Value> values) {
  Fact f{std::string(relation), std::move(values)};
  check_fact(schema, f);
  return f;
}

Instance::Instance(std::shared_ptr<const Schema> schema, InstanceMode mode)
    : schema_(std::move(schema)), mode_(mode) {
  if (!schema_) throw Error(ErrorKind::InvalidArgument, "instance needs a schema");
}

void Instance::insert(Fact fact, std::uint64_t count) {
  if (count == 0) return;
  check_fact(*schema_, fact);
  auto [it, inserted] = facts_.try_emplace(std::move(fact), 0);
  if (mode_ == InstanceMode::Set) {
    it->second = 1;
  } else {
    it->second += count;
  }
}

std::uint64_t Instance::count(const Fact& f) const {
  auto it = facts_.find(f);
  return it == facts_.end() ? 0 : it->second;
}

std::uint64_t Instance::total_size() const {
  std::uint64_t n = 0;
  for (const auto& [f, c] : facts_) n += c;
  return n;
}

std::vector<const Fact*> Instance::facts_of(std::string_view relation) const {
  std::vector<const Fact*> out;
  auto it = facts_.lower_bound(Fact{std::string(relation), {}});
  for (; it != facts_.end() && it->first.relation == relation; ++it) {
    out.push_back(&it->first);
  }
  return out;
}

Instance to_set(const Instance& instance) {
  if (instance.mode() == InstanceMode::Set) return instance;
  Instance out(instance.schema_ptr(), InstanceMode::Set);
  for (const auto& [f, c] : instance.facts()) out.insert(f);
  return out;
}

}  // namespace gdl
