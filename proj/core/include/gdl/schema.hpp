#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gdl/value.hpp"

namespace gdl {

enum class RelationKind { Extensional, Intensional };

std::string_view to_string(RelationKind kind);

struct Attribute {
  std::string name;
  ValueType type = ValueType::Real;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct RelationSchema {
  std::string name;
  std::vector<Attribute> attrs;
  RelationKind kind = RelationKind::Extensional;

  std::size_t arity() const { return attrs.size(); }
  std::optional<std::size_t> index_of(std::string_view attr) const;

  friend bool operator==(const RelationSchema&, const RelationSchema&) = default;
};

// An ordered collection of relation schemas with unique names.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<RelationSchema> relations);

  // Throws InvalidSchema on a duplicate relation or attribute name.
  void add(RelationSchema relation);

  const RelationSchema* find(std::string_view name) const;
  // Throws UnknownRelation.
  const RelationSchema& at(std::string_view name) const;
  const std::vector<RelationSchema>& relations() const { return relations_; }
  bool empty() const { return relations_.empty(); }

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<RelationSchema> relations_;
};

}  // namespace gdl
