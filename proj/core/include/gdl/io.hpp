#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "gdl/instance.hpp"
#include "gdl/schema.hpp"

namespace gdl {

// Reads a whole file; throws Error(Io) when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// {"relations":[{"name":..,"kind":"extensional"|"intensional",
//                "attrs":[{"name":..,"type":"real"|"integer"|"string"|"boolean"}]}]}
Schema parse_schema_json(std::string_view text);
nlohmann::json schema_to_json(const Schema& schema);

// JSON value -> Value of the given attribute type. Integers widen to reals;
// anything else is a TypeMismatch.
Value value_from_json(const nlohmann::json& j, ValueType type);
nlohmann::json value_to_json(const Value& v);
nlohmann::json fact_to_json(const Fact& f);
// One array entry per fact occurrence, so bags repeat facts.
nlohmann::json instance_to_json(const Instance& instance);

// CSV with a header row naming the relation's attributes (any order).
// Repeated rows add multiplicity.
void load_csv_rows(Instance& into, std::string_view relation, std::string_view csv_text);

// {"R": [[v1, v2, ...] | {"attr": v, ...}, ...], ...}
void load_json_rows(Instance& into, std::string_view json_text);

// Dispatches on extension: *.csv (relation = file stem) or *.json.
void load_instance_file(Instance& into, const std::filesystem::path& path);

}  // namespace gdl
