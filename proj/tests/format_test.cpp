#include <cmath>
#include <random>

#include "doctest.h"
#include "peng/error.hpp"
#include "peng/format.hpp"
#include "peng/keyvalue.hpp"

using namespace peng;

TEST_CASE("doubles round-trip through their shortest text form") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(20.0) == "20");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(HUGE_VAL) == "inf");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = unit(rng) / 7.0;
    CHECK(parse_double(format_double(v), "v") == v);
  }
  CHECK(std::isinf(parse_double("inf", "v")));
  CHECK(parse_double(" +2.5 ", "v") == 2.5);
  CHECK_THROWS_AS(parse_double("2.5x", "v"), Error);
  CHECK_THROWS_AS(parse_double("", "v"), Error);
}

TEST_CASE("integers, booleans and splitting") {
  CHECK(parse_int("42", "n") == 42);
  CHECK_THROWS_AS(parse_int("4.2", "n"), Error);
  CHECK(parse_bool("yes", "b"));
  CHECK_FALSE(parse_bool("0", "b"));
  CHECK_THROWS_AS(parse_bool("maybe", "b"), Error);
  CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  CHECK(trim("  x \r\n") == "x");
}

TEST_CASE("key=value files") {
  KeyValueFile kv = KeyValueFile::parse("# comment\nN = 3\n\nt=0.25  # trailing\nloss_check=true\n");
  CHECK(kv.keys() == std::vector<std::string>{"N", "t", "loss_check"});
  CHECK(kv.get_int("N", 0) == 3);
  CHECK(kv.get_double("t", 0) == 0.25);
  CHECK(kv.get_bool("loss_check", false));
  CHECK(kv.get_double("missing", 7.5) == 7.5);
  CHECK_FALSE(kv.get("missing").has_value());
  CHECK_THROWS_AS(kv.require("missing"), Error);

  kv.set("N", "4");
  kv.set("E", "0.5");
  KeyValueFile again = KeyValueFile::parse(kv.to_string());
  CHECK(again.keys() == std::vector<std::string>{"N", "t", "loss_check", "E"});
  CHECK(again.get_int("N", 0) == 4);

  CHECK_THROWS_AS(KeyValueFile::parse("a=1\na=2\n"), Error);
  CHECK_THROWS_AS(KeyValueFile::parse("no equals sign\n"), Error);
  CHECK_THROWS_AS(KeyValueFile::load("/nonexistent/peng.cfg"), Error);
}

TEST_CASE("error codes classify as validation or runtime") {
  CHECK(Error(ErrorCode::parse_error, "x").is_validation());
  CHECK(Error(ErrorCode::duplicate_model, "x").is_validation());
  CHECK_FALSE(Error(ErrorCode::io_error, "x").is_validation());
  CHECK(std::string(Error(ErrorCode::unknown_model, "nn").what()) == "unknown-model: nn");
}
