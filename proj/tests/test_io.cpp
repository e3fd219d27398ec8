#include <gtest/gtest.h>

#include "gdl/error.hpp"
#include "gdl/io.hpp"
#include "test_support.hpp"

using namespace gdl;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no gdl::Error thrown";
  return ErrorKind::Io;
}

}  // namespace

TEST(SchemaJson, ParsesFixtureAndRoundTrips) {
  Schema s = parse_schema_json(read_file(gdl::testing::data_path("walk_schema.json")));
  ASSERT_NE(s.find("E"), nullptr);
  EXPECT_EQ(s.at("E").attrs[2].type, ValueType::Real);
  EXPECT_EQ(s.at("R").kind, RelationKind::Intensional);
  EXPECT_EQ(parse_schema_json(schema_to_json(s).dump()), s);
}

TEST(SchemaJson, Errors) {
  EXPECT_EQ(kind_of([] { parse_schema_json("{"); }), ErrorKind::SyntaxError);
  EXPECT_EQ(kind_of([] {
              parse_schema_json(R"({"relations":[{"name":"R","attrs":[{"name":"a","type":"complex"}]}]})");
            }),
            ErrorKind::InvalidSchema);
  EXPECT_EQ(kind_of([] {
              parse_schema_json(R"({"relations":[{"name":"R","attrs":[]},{"name":"R","attrs":[]}]})");
            }),
            ErrorKind::InvalidSchema);
  EXPECT_EQ(kind_of([] { read_file("/nonexistent/file.json"); }), ErrorKind::Io);
}

TEST(ValueJson, WideningAndMismatch) {
  EXPECT_EQ(value_from_json(nlohmann::json(3), ValueType::Real), Value::real(3.0));
  EXPECT_EQ(value_from_json(nlohmann::json(3), ValueType::Integer), Value::integer(3));
  EXPECT_EQ(kind_of([] { value_from_json(nlohmann::json(3.5), ValueType::Integer); }),
            ErrorKind::TypeMismatch);
  EXPECT_EQ(kind_of([] { value_from_json(nlohmann::json("x"), ValueType::Real); }),
            ErrorKind::TypeMismatch);
  EXPECT_EQ(value_from_json(value_to_json(Value::string("a\"b")), ValueType::String),
            Value::string("a\"b"));
}

TEST(Rows, JsonArraysAndObjects) {
  auto schema = gdl::testing::walk_schema();
  Instance d(schema);
  load_json_rows(d, R"({"E": [["a", "b", 1], {"dst": "c", "src": "b", "len": 2.5}], "S": [["a"]]})");
  EXPECT_EQ(d.total_size(), 3u);
  EXPECT_TRUE(d.contains(Fact{"E", {Value::string("a"), Value::string("b"), Value::real(1.0)}}));
  EXPECT_TRUE(d.contains(Fact{"E", {Value::string("b"), Value::string("c"), Value::real(2.5)}}));
  EXPECT_EQ(kind_of([&] { load_json_rows(d, R"({"E": [["a"]]})"); }), ErrorKind::ArityMismatch);
  EXPECT_EQ(kind_of([&] { load_json_rows(d, R"({"Q": []})"); }), ErrorKind::UnknownRelation);
}

TEST(Rows, CsvHeaderOrderAndMultiplicity) {
  auto schema = gdl::testing::walk_schema();
  Instance d(schema);
  load_csv_rows(d, "E", "len,src,dst\n1.5,a,b\n1.5,a,b\n2,b,c\n");
  EXPECT_EQ(d.count(Fact{"E", {Value::string("a"), Value::string("b"), Value::real(1.5)}}), 2u);
  EXPECT_EQ(d.count(Fact{"E", {Value::string("b"), Value::string("c"), Value::real(2.0)}}), 1u);
  EXPECT_EQ(kind_of([&] { load_csv_rows(d, "E", "src,dst\na,b\n"); }), ErrorKind::ArityMismatch);
  EXPECT_EQ(kind_of([&] { load_csv_rows(d, "E", "src,dst,size\na,b,1\n"); }), ErrorKind::UnknownAttribute);
}

TEST(Rows, InstanceJsonRepeatsBagFacts) {
  auto schema = gdl::testing::reach_schema();
  Instance d(schema);
  d.insert(Fact{"S", {Value::string("a")}}, 2);
  auto j = instance_to_json(d);
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j.size(), 2u);
}
