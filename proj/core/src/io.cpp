#include "gdl/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gdl/error.hpp"

namespace gdl {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SyntaxError, "malformed " + std::string(what) + ": " + e.what());
  }
}

const json& member(const json& obj, const char* key, std::string_view what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorKind::InvalidSchema,
                std::string(what) + " is missing \"" + key + "\"");
  }
  return obj.at(key);
}

}  // namespace

Schema parse_schema_json(std::string_view text) {
  json j = parse_json(text, "schema");
  Schema schema;
  const auto& rels = member(j, "relations", "schema");
  if (!rels.is_array()) throw Error(ErrorKind::InvalidSchema, "\"relations\" must be an array");
  for (const auto& r : rels) {
    RelationSchema rel;
    rel.name = member(r, "name", "relation").get<std::string>();
    std::string kind = r.value("kind", "extensional");
    if (kind == "extensional") {
      rel.kind = RelationKind::Extensional;
    } else if (kind == "intensional") {
      rel.kind = RelationKind::Intensional;
    } else {
      throw Error(ErrorKind::InvalidSchema, "relation '" + rel.name + "' has unknown kind '" +
                                                kind + "'");
    }
    for (const auto& a : member(r, "attrs", "relation")) {
      std::string type = member(a, "type", "attribute").get<std::string>();
      auto vt = value_type_from_name(type);
      if (!vt) {
        throw Error(ErrorKind::InvalidSchema, "unknown attribute type '" + type + "'");
      }
      rel.attrs.push_back({member(a, "name", "attribute").get<std::string>(), *vt});
    }
    schema.add(std::move(rel));
  }
  return schema;
}

json schema_to_json(const Schema& schema) {
  json rels = json::array();
  for (const auto& r : schema.relations()) {
    json attrs = json::array();
    for (const auto& a : r.attrs) {
      attrs.push_back({{"name", a.name}, {"type", std::string(to_string(a.type))}});
    }
    rels.push_back({{"name", r.name}, {"kind", std::string(to_string(r.kind))}, {"attrs", attrs}});
  }
  return json{{"relations", rels}};
}

Value value_from_json(const json& j, ValueType type) {
  auto mismatch = [&]() -> Error {
    return Error(ErrorKind::TypeMismatch,
                 "expected " + std::string(to_string(type)) + ", got " + j.dump());
  };
  switch (type) {
    case ValueType::Real:
      if (!j.is_number()) throw mismatch();
      return Value::real(j.get<double>());
    case ValueType::Integer:
      if (!j.is_number_integer()) throw mismatch();
      return Value::integer(j.get<std::int64_t>());
    case ValueType::String:
      if (!j.is_string()) throw mismatch();
      return Value::string(j.get<std::string>());
    case ValueType::Boolean:
      if (!j.is_boolean()) throw mismatch();
      return Value::boolean(j.get<bool>());
  }
  throw mismatch();
}

json value_to_json(const Value& v) {
  switch (v.type()) {
    case ValueType::Real: return v.as_real();
    case ValueType::Integer: return v.as_integer();
    case ValueType::String: return v.as_string();
    case ValueType::Boolean: return v.as_boolean();
  }
  return nullptr;
}

json fact_to_json(const Fact& f) {
  json values = json::array();
  for (const auto& v : f.values) values.push_back(value_to_json(v));
  return json{{"relation", f.relation}, {"values", values}};
}

json instance_to_json(const Instance& instance) {
  json out = json::array();
  for (const auto& [f, c] : instance.facts()) {
    for (std::uint64_t i = 0; i < c; ++i) out.push_back(fact_to_json(f));
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line, int line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw Error(ErrorKind::SyntaxError, "unterminated quote in CSV", {line_no, 1});
  cells.push_back(std::move(cell));
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

Value value_from_text(std::string_view text, ValueType type, int line_no) {
  auto bad = [&] {
    return Error(ErrorKind::TypeMismatch,
                 "cannot read '" + std::string(text) + "' as " + std::string(to_string(type)),
                 {line_no, 1});
  };
  switch (type) {
    case ValueType::String: return Value::string(std::string(text));
    case ValueType::Integer: {
      std::int64_t v = 0;
      auto t = trim(text);
      auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw bad();
      return Value::integer(v);
    }
    case ValueType::Real: {
      auto t = std::string(trim(text));
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(t, &used);
      } catch (const std::exception&) {
        throw bad();
      }
      if (used != t.size()) throw bad();
      return Value::real(v);
    }
    case ValueType::Boolean: {
      auto t = trim(text);
      if (t == "true" || t == "1") return Value::boolean(true);
      if (t == "false" || t == "0") return Value::boolean(false);
      throw bad();
    }
  }
  throw bad();
}

}  // namespace

void load_csv_rows(Instance& into, std::string_view relation, std::string_view csv_text) {
  const auto& rel = into.schema().at(relation);
  std::istringstream in{std::string(csv_text)};
  std::string line;
  int line_no = 0;
  std::vector<std::size_t> column_to_attr;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line, line_no);
    if (!header_seen) {
      header_seen = true;
      if (cells.size() != rel.arity()) {
        throw Error(ErrorKind::ArityMismatch, "CSV header for " + rel.name + " has " +
                                                  std::to_string(cells.size()) + " columns",
                    {line_no, 1});
      }
      for (auto& c : cells) {
        auto idx = rel.index_of(trim(c));
        if (!idx) {
          throw Error(ErrorKind::UnknownAttribute,
                      "CSV column '" + c + "' is not an attribute of " + rel.name,
                      {line_no, 1});
        }
        column_to_attr.push_back(*idx);
      }
      continue;
    }
    if (cells.size() != rel.arity()) {
      throw Error(ErrorKind::ArityMismatch, "CSV row has " + std::to_string(cells.size()) +
                                                " cells, expected " + std::to_string(rel.arity()),
                  {line_no, 1});
    }
    std::vector<Value> values(rel.arity());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t a = column_to_attr[c];
      values[a] = value_from_text(cells[c], rel.attrs[a].type, line_no);
    }
    into.insert(Fact{rel.name, std::move(values)});
  }
}

void load_json_rows(Instance& into, std::string_view json_text) {
  json j = parse_json(json_text, "instance");
  if (!j.is_object()) {
    throw Error(ErrorKind::SyntaxError, "instance JSON must map relation names to rows");
  }
  for (const auto& [name, rows] : j.items()) {
    const auto& rel = into.schema().at(name);
    if (!rows.is_array()) {
      throw Error(ErrorKind::SyntaxError, "rows of '" + name + "' must be an array");
    }
    for (const auto& row : rows) {
      std::vector<Value> values(rel.arity());
      if (row.is_array()) {
        if (row.size() != rel.arity()) {
          throw Error(ErrorKind::ArityMismatch, name + " row " + row.dump() + " has " +
                                                    std::to_string(row.size()) + " values");
        }
        for (std::size_t i = 0; i < rel.arity(); ++i) {
          values[i] = value_from_json(row[i], rel.attrs[i].type);
        }
      } else if (row.is_object()) {
        if (row.size() != rel.arity()) {
          throw Error(ErrorKind::ArityMismatch, name + " row " + row.dump() + " has " +
                                                    std::to_string(row.size()) + " values");
        }
        for (std::size_t i = 0; i < rel.arity(); ++i) {
          if (!row.contains(rel.attrs[i].name)) {
            throw Error(ErrorKind::UnknownAttribute,
                        name + " row is missing attribute '" + rel.attrs[i].name + "'");
          }
          values[i] = value_from_json(row.at(rel.attrs[i].name), rel.attrs[i].type);
        }
      } else {
        throw Error(ErrorKind::SyntaxError, "row must be an array or object: " + row.dump());
      }
      into.insert(Fact{rel.name, std::move(values)});
    }
  }
}

void load_instance_file(Instance& into, const std::filesystem::path& path) {
  auto text = read_file(path);
  if (path.extension() == ".csv") {
    load_csv_rows(into, path.stem().string(), text);
  } else {
    load_json_rows(into, text);
  }
}

}  // namespace gdl
