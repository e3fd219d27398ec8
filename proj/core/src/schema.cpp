#include "gdl/schema.hpp"

#include <set>

#include "gdl/error.hpp"

namespace gdl {

std::string_view to_string(RelationKind kind) {
  return kind == RelationKind::Extensional ? "extensional" : "intensional";
}

std::optional<std::size_t> RelationSchema::index_of(std::string_view attr) const {
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (attrs[i].name == attr) return i;
  }
  return std::nullopt;
}

Schema::Schema(std::vector<RelationSchema> relations) {
  for (auto& r : relations) add(std::move(r));
}

void Schema::add(RelationSchema relation) {
  if (relation.name.empty()) {
    throw Error(ErrorKind::InvalidSchema, "relation name must not be empty");
  }
  if (find(relation.name) != nullptr) {
    throw Error(ErrorKind::InvalidSchema, "duplicate relation '" + relation.name + "'");
  }
  std::set<std::string_view> seen;
  for (const auto& a : relation.attrs) {
    if (a.name.empty()) {
      throw Error(ErrorKind::InvalidSchema,
                  "empty attribute name in relation '" + relation.name + "'");
    }
    if (!seen.insert(a.name).second) {
      throw Error(ErrorKind::InvalidSchema, "duplicate attribute '" + a.name +
                                                "' in relation '" + relation.name + "'");
    }
  }
  relations_.push_back(std::move(relation));
}

const RelationSchema* Schema::find(std::string_view name) const {
  for (const auto& r : relations_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const RelationSchema& Schema::at(std::string_view name) const {
  if (const auto* r = find(name)) return *r;
  throw Error(ErrorKind::UnknownRelation, "unknown relation '" + std::string(name) + "'");
}

}  // namespace gdl
