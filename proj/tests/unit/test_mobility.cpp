#include <cmath>
#include <sstream>

#include "dacemad/mobility.hpp"
#include "doctest.h"

using namespace dacemad;
using namespace dacemad::mobility;

namespace {

Area square(double side) { return {0.0, side, 0.0, side}; }

TraceData parse(const std::string& text, Area area = square(1000)) {
  std::istringstream in(text);
  return parse_trace(in, area);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const TraceError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("single cluster stays within its radius") {
  ScenarioSpec spec;
  spec.n_vehicles = 100;
  spec.clusters = {{{500, 500}, 80, 1.0}};
  const auto s = generate_scenario(spec, square(1000), 5);
  CHECK_FALSE(s.length().has_value());
  const auto e = s.entries(0);
  REQUIRE(e.size() == 100);
  for (const auto& v : e) CHECK(std::hypot(v.x - 500, v.y - 500) <= 80.0);
  // static: every step is the same snapshot
  CHECK(s.snapshot(0).entries == s.snapshot(77).entries);
}

TEST_CASE("cluster weights allocate by largest remainder") {
  ScenarioSpec spec;
  spec.n_vehicles = 10;
  spec.clusters = {{{200, 200}, 30, 0.55}, {{800, 800}, 30, 0.45}};
  const auto e = generate_scenario(spec, square(1000), 1).entries(0);
  std::size_t near_first = 0;
  for (const auto& v : e) near_first += v.x < 500;
  // 5.5 and 4.5: the tie on remainders goes to the first cluster
  CHECK(near_first == 6);
}

TEST_CASE("generation is deterministic under seed") {
  ScenarioSpec spec;
  const Area area = square(3000);
  CHECK(generate_scenario(spec, area, 9).snapshot(0) == generate_scenario(spec, area, 9).snapshot(0));
  CHECK_FALSE(generate_scenario(spec, area, 9).snapshot(0) ==
              generate_scenario(spec, area, 10).snapshot(0));
}

TEST_CASE("edge concentration keeps users in the band") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::edge_concentration;
  spec.n_vehicles = 500;
  spec.band_width = 200;
  const auto e = generate_scenario(spec, square(3000), 2).entries(0);
  REQUIRE(e.size() == 500);
  for (const auto& v : e) {
    CHECK(v.x >= 2800.0);
    CHECK(v.x <= 3000.0);
  }
}

TEST_CASE("cross roads puts users on two strips") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::cross_roads;
  spec.n_vehicles = 101;
  spec.strip_width = 40;
  const auto e = generate_scenario(spec, square(1000), 4).entries(0);
  REQUIRE(e.size() == 101);
  for (const auto& v : e) {
    const bool horizontal = std::abs(v.y - 500) <= 20;
    const bool vertical = std::abs(v.x - 500) <= 20;
    CHECK((horizontal || vertical));
  }
}

TEST_CASE("zero vehicles and bad geometry") {
  ScenarioSpec spec;
  spec.n_vehicles = 0;
  CHECK(generate_scenario(spec, square(3000), 1).entries(0).empty());
  spec.n_vehicles = 5;
  spec.clusters = {{{5000, 5000}, 10, 1.0}};
  CHECK_THROWS_AS(generate_scenario(spec, square(3000), 1), ScenarioError);
  spec.clusters = {{{100, 100}, 0, 1.0}};
  CHECK_THROWS_AS(generate_scenario(spec, square(3000), 1), ScenarioError);
}

TEST_CASE("trace with two snapshots") {
  const auto d = parse("t,vehicle_id,x,y,speed\n0,a,100,200,5\n1,a,110,200,5\n");
  REQUIRE(d.stream.length() == 2u);
  CHECK(d.stream.entries(0).size() == 1);
  CHECK(d.stream.entries(1)[0].x == 110.0);
  CHECK_FALSE(d.stream.has(2));
}

TEST_CASE("header only gives an empty provider") {
  const auto d = parse("t,vehicle_id,x,y,speed\n");
  CHECK(d.stream.length() == 0u);
  CHECK_FALSE(d.stream.has(0));
}

TEST_CASE("vehicles may leave and re-enter") {
  const auto d = parse(
      "t,vehicle_id,x,y,speed\n0,a,1,1,0\n0,b,2,2,0\n1,b,3,3,0\n2,a,4,4,0\n2,b,5,5,0\n");
  REQUIRE(d.stream.length() == 3u);
  CHECK(d.stream.entries(1).size() == 1);
  CHECK(d.stream.entries(1)[0].id == "b");
  CHECK(d.stream.entries(2).size() == 2);
}

TEST_CASE("gaps in time become empty snapshots") {
  const auto d = parse("t,vehicle_id,x,y,speed\n0,a,1,1,0\n3,a,4,4,0\n");
  REQUIRE(d.stream.length() == 4u);
  CHECK(d.stream.entries(1).empty());
  CHECK(d.stream.entries(2).empty());
}

TEST_CASE("byte order mark and CRLF are tolerated") {
  const auto d = parse("\xEF\xBB\xBFt,vehicle_id,x,y,speed\r\n0,a,1,1,0\r\n");
  CHECK(d.stream.entries(0).size() == 1);
}

TEST_CASE("out-of-range rows are counted, not kept") {
  const auto d = parse("t,vehicle_id,x,y,speed\n0,a,-5,1,0\n0,b,1,1,20\n0,c,1,1,13.8\n");
  CHECK(d.rejected_rows == 2);
  REQUIRE(d.stream.entries(0).size() == 1);
  CHECK(d.stream.entries(0)[0].id == "c");
}

TEST_CASE("malformed traces report the line") {
  CHECK(error_of("time,id,x,y,v\n").find("line 1") != std::string::npos);
  CHECK(error_of("t,vehicle_id,x,y,speed\n0,a,1,1\n").find("line 2") != std::string::npos);
  CHECK(error_of("t,vehicle_id,x,y,speed\n0,a,1,1,0\n0,b,x,1,0\n").find("line 3") !=
        std::string::npos);
  CHECK(error_of("t,vehicle_id,x,y,speed\n1,a,1,1,0\n0,a,1,1,0\n").find("non-decreasing") !=
        std::string::npos);
  CHECK(error_of("t,vehicle_id,x,y,speed\n0,a,1,1,0\n0,a,2,2,0\n").find("repeated") !=
        std::string::npos);
  CHECK(error_of("").find("header") != std::string::npos);
}

TEST_CASE("written traces parse back identically") {
  ScenarioSpec spec;
  spec.n_vehicles = 30;
  const Area area = square(3000);
  const auto s = generate_scenario(spec, area, 3);
  std::stringstream buf;
  write_trace(buf, s, 4);
  const auto back = parse_trace(buf, area);
  REQUIRE(back.stream.length() == 4u);
  for (std::size_t t = 0; t < 4; ++t) CHECK(back.stream.snapshot(t) == s.snapshot(t));
}
