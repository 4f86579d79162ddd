#include <cmath>
#include <fstream>
#include <random>

#include "degenlab/error.hpp"
#include "degenlab/report.hpp"
#include "doctest.h"

using namespace degenlab;

namespace {

Json load_schema() {
  std::ifstream is(std::string(DEGENLAB_SCHEMA_DIR) + "/check_report.schema.json");
  REQUIRE(is.good());
  return Json::parse(is);
}

bool type_ok(const Json& v, const Json& t) {
  if (t.is_array()) {
    for (const auto& e : t)
      if (type_ok(v, e)) return true;
    return false;
  }
  const std::string s = t.get<std::string>();
  if (s == "null") return v.is_null();
  if (s == "number") return v.is_number();
  if (s == "integer") return v.is_number_integer();
  if (s == "string") return v.is_string();
  if (s == "boolean") return v.is_boolean();
  if (s == "array") return v.is_array();
  if (s == "object") return v.is_object();
  return false;
}

// Covers the keywords the report schema uses.
bool conforms(const Json& v, const Json& s) {
  if (s.contains("const") && v != s["const"]) return false;
  if (s.contains("enum")) {
    bool hit = false;
    for (const auto& e : s["enum"]) hit = hit || e == v;
    if (!hit) return false;
  }
  if (s.contains("oneOf")) {
    int hits = 0;
    for (const auto& alt : s["oneOf"]) hits += conforms(v, alt);
    if (hits != 1) return false;
  }
  if (s.contains("type") && !type_ok(v, s["type"])) return false;
  if (s.contains("minLength") && v.get<std::string>().size() < s["minLength"].get<std::size_t>()) return false;
  if (s.contains("minimum") && v.is_number() && v.get<double>() < s["minimum"].get<double>()) return false;
  if (s.contains("exclusiveMinimum") && v.is_number() && v.get<double>() <= s["exclusiveMinimum"].get<double>())
    return false;
  if (v.is_object()) {
    for (const auto& k : s.value("required", Json::array()))
      if (!v.contains(k.get<std::string>())) return false;
    const Json props = s.value("properties", Json::object());
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props.contains(it.key())) {
        if (!conforms(it.value(), props[it.key()])) return false;
      } else if (s.contains("additionalProperties")) {
        const Json& ap = s["additionalProperties"];
        if (ap.is_boolean() ? !ap.get<bool>() : !conforms(it.value(), ap)) return false;
      }
    }
  }
  if (v.is_array() && s.contains("items"))
    for (const auto& e : v)
      if (!conforms(e, s["items"])) return false;
  return true;
}

CheckReport random_report(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Status all[] = {Status::Pass, Status::Fail, Status::Degenerate, Status::Inconclusive,
                        Status::HypothesisViolation};
  CheckReport r;
  r.check = "check_" + std::to_string(rng() % 100);
  r.params = {{"n", static_cast<int>(rng() % 4)}, {"alpha", u(rng)}};
  r.status = all[rng() % 5];
  if (rng() % 2) r.expected = all[rng() % 5];
  if (rng() % 3) r.observe(u(rng), {u(rng), u(rng)});
  r.tolerances = {{"a", std::abs(u(rng))}, {"b", 1e-9}};
  if (rng() % 2) r.grid = GridInfo{0.125, {-1.0, -1.0}, {1.0, 1.0}};
  if (rng() % 2) r.seed = rng() % 1000;
  r.metrics = {{"x", u(rng)}, {"list", {u(rng), u(rng)}}, {"flag", rng() % 2 == 0}};
  if (rng() % 2) r.notes.push_back("note");
  r.elapsed_ms = std::abs(u(rng));
  return r;
}

}  // namespace

TEST_CASE("reports validate against the shipped schema") {
  const Json schema = load_schema();
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const CheckReport r = random_report(rng);
    CHECK(conforms(r.to_json(), schema));
    CHECK(conforms(r.to_json(true), schema));
    CHECK_FALSE(r.to_json(true).contains("elapsed_ms"));
  }
  CHECK(conforms(CheckReport{"x"}.to_json(), schema));
}

TEST_CASE("the validator rejects malformed reports") {
  const Json schema = load_schema();
  CheckReport r;
  r.check = "c";
  Json j = r.to_json();
  j["extra"] = 1;
  CHECK_FALSE(conforms(j, schema));
  j = r.to_json();
  j["status"] = "PASS";
  CHECK_FALSE(conforms(j, schema));
  j = r.to_json();
  j.erase("witness");
  CHECK_FALSE(conforms(j, schema));
  j = r.to_json();
  j["grid"] = {{"h", 0.0}, {"extents", {{"lower", {0}}, {"upper", {1}}}}};
  CHECK_FALSE(conforms(j, schema));
}

TEST_CASE("JSON round trip") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const CheckReport r = random_report(rng);
    const Json j = r.to_json(true);
    CHECK(report_from_json(j).to_json(true) == j);
  }
}

TEST_CASE("non-finite numbers map to null") {
  CheckReport r;
  r.check = "nan";
  r.observe(NAN, {INFINITY});
  r.metrics["v"] = NAN;
  r.tolerances["t"] = INFINITY;
  const Json j = r.to_json();
  CHECK(j["witness"][0].is_null());
  CHECK(j["metrics"]["v"].is_null());
  CHECK(j["tolerances"]["t"].is_null());
  CHECK(conforms(j, load_schema()));
}

TEST_CASE("ok() follows the expectation") {
  CheckReport r;
  r.status = Status::Fail;
  CHECK_FALSE(r.ok());
  r.expected = Status::Fail;
  CHECK(r.ok());
  r.status = Status::Pass;
  CHECK_FALSE(r.ok());
  CHECK(status_from_string("hypothesis_violation") == Status::HypothesisViolation);
  CHECK_FALSE(status_from_string("PASS").has_value());
  CHECK_THROWS_AS(report_from_json({{"check", "c"}, {"status", "odd"}}), Error);
}
