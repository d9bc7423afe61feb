#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cav/report_io.hpp"
#include "cav/scenario_io.hpp"
#include "oracles.hpp"

using namespace cav;

namespace {

const std::string kRef = CAVSIM_SOURCE_DIR "/scenarios/reference.json";

std::string fmt_hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

ParseError parse_failure(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("", "");
}

}  // namespace

TEST_CASE("reference scenario parses") {
  const auto s = load_scenario(kRef);
  CHECK(s.arrivals.size() == 6);
  CHECK(s.layout.control_zone_length() == 125.0);
  CHECK(s.layout.merging_zone_side() == 25.0);
  CHECK(s.defaults == VehicleParams{});
  CHECK(s.policy == Policy::Optimal);
  std::set<Cardinal> origins;
  for (const auto& a : s.arrivals) {
    origins.insert(a.movement.origin());
    CHECK(a.time >= 0.0);
    CHECK(a.time <= 6.0);
    CHECK(a.v0 > 2.0);
    CHECK(a.v0 < 18.0);
  }
  CHECK(origins.size() == 3);
}

TEST_CASE("round trip") {
  const auto s = load_scenario(kRef);
  const auto text = serialize_scenario(s);
  const auto again = parse_scenario(text);
  CHECK(again == s);
  CHECK(serialize_scenario(again) == text);

  GeneratorOptions g;
  g.seed = 17;
  g.vehicles = 12;
  g.lanes_per_approach = 2;
  auto gen = generate_scenario(g);
  gen.arrivals[3].params.headway_time = 1.3;
  gen.sim.lateral_buffer = 0.1 + 0.2;
  CHECK(parse_scenario(serialize_scenario(gen)) == gen);
}

TEST_CASE("minimal document takes defaults") {
  const auto s = parse_scenario(R"({"arrivals": [{"id": 1, "time": 0, "origin": "N", "exit": "S", "v0": 9}]})");
  CHECK(s.layout.right_turn_radius() == 12.5);
  CHECK(s.layout.left_turn_radius() == 25.0);
  CHECK(s.sim.dt == 0.01);
  CHECK(s.arrivals[0].params == VehicleParams{});

  const auto o = parse_scenario(R"({"defaults": {"headway_time": 1.2},
    "arrivals": [{"id": 1, "time": 0, "origin": "N", "exit": "S", "v0": 9,
                  "params": {"standstill_gap": 2.0}}]})");
  CHECK(o.defaults.headway_time == 1.2);
  CHECK(o.arrivals[0].params.headway_time == 1.2);
  CHECK(o.arrivals[0].params.standstill_gap == 2.0);
}

TEST_CASE("syntax errors carry line and column") {
  const auto e = parse_failure("{\n  \"arrivals\": [\n    {\"id\": 1,, }\n  ]\n}\n");
  REQUIRE(e.line());
  CHECK(*e.line() == 3);
  REQUIRE(e.column());
  CHECK(*e.column() > 1);
}

TEST_CASE("field errors carry the field path") {
  CHECK(parse_failure(R"({"arrivals": [], "extra": 1})").field() == "extra");
  CHECK(parse_failure(R"({"arrivals": [{"id": 1, "time": 0, "origin": "N", "exit": "S", "v0": 9, "colour": 1}]})")
            .field() == "arrivals[0].colour");
  CHECK(parse_failure(R"({"arrivals": [{"id": 1, "time": 0, "origin": "N", "exit": "S", "v0": "fast"}]})")
            .field() == "arrivals[0].v0");
  CHECK(parse_failure(R"({"arrivals": [{"id": 1, "time": 0, "origin": "N", "exit": "N", "v0": 9}]})")
            .field() == "arrivals[0].exit");
  CHECK(parse_failure(R"({"arrivals": [{"id": 1, "time": 0, "origin": "Q", "exit": "N", "v0": 9}]})")
            .field() == "arrivals[0].origin");
  CHECK(parse_failure(R"({"arrivals": [{"id": 1, "time": 0, "origin": "N", "exit": "S", "v0": 30}]})")
            .field() == "arrivals[0].v0");
  CHECK(parse_failure(R"({"arrivals": [{"id": 1, "time": 2, "origin": "N", "exit": "S", "v0": 9},
                                        {"id": 2, "time": 1, "origin": "E", "exit": "W", "v0": 9}]})")
            .field() == "arrivals[1].time");
  CHECK(parse_failure(R"({"arrivals": [{"id": 1, "time": 0, "origin": "N", "exit": "S", "v0": 9},
                                        {"id": 1, "time": 1, "origin": "E", "exit": "W", "v0": 9}]})")
            .field() == "arrivals[1].id");
  CHECK(parse_failure(R"({"arrivals": [], "sim": {"dt": -1}})").field() == "sim.dt");
  CHECK(parse_failure(R"({"arrivals": [], "layout": {"merging_zone_side": 0}})").field() ==
        "layout");
  CHECK(parse_failure(R"({"arrivals": [], "policy": "random"})").field() == "policy");
  CHECK(parse_failure(R"({"layout": {}})").field() == "arrivals");
  CHECK(parse_failure(R"([1, 2])").field() == "<root>");
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST_CASE("trajectory CSV contract") {
  const auto r = run(load_scenario(kRef));
  const auto csv = trajectory_csv(r.log);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,vehicle_id,lane,position_m,speed_mps,accel_mps2,rear_margin_m");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(rows == r.log.size());
}

TEST_CASE("golden reference log") {
  const auto r = run(load_scenario(kRef));
  const auto csv = trajectory_csv(r.log);
  std::ifstream golden(CAVSIM_SOURCE_DIR "/tests/golden/reference_head.csv");
  REQUIRE(golden);
  std::istringstream got(csv);
  std::string want_line, got_line;
  std::getline(golden, want_line);
  const std::string digest_prefix = "# rows=";
  REQUIRE(want_line.rfind(digest_prefix, 0) == 0);
  std::istringstream meta(want_line.substr(digest_prefix.size()));
  std::size_t rows = 0;
  std::string fnv_label;
  std::string fnv;
  meta >> rows >> fnv_label >> fnv;
  CHECK(rows == r.log.size());
  CHECK(fnv == fmt_hex(oracle::fnv1a(csv)));
  while (std::getline(golden, want_line)) {
    REQUIRE(std::getline(got, got_line));
    CHECK(got_line == want_line);
  }
}

TEST_CASE("plot tables") {
  const auto r = run(load_scenario(kRef));
  const auto tables = plot_tables(r.log);
  REQUIRE(tables.size() == 4);
  for (const auto& name : {"plot_position.csv", "plot_speed.csv", "plot_accel.csv",
                           "plot_safety_distance.csv"}) {
    const auto& text = tables.at(name);
    CHECK(text.rfind("t,vehicle_1,vehicle_2,vehicle_3,vehicle_4,vehicle_5,vehicle_6\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') > 1000);
  }
}

TEST_CASE("outputs are written atomically into the directory") {
  const auto dir = std::filesystem::temp_directory_path() / "cavsim_io_test";
  std::filesystem::remove_all(dir);
  const auto r = run(load_scenario(kRef));
  write_run_outputs(dir, r);
  for (const auto* f : {"trajectory.csv", "metrics.json", "protocol.jsonl", "plot_position.csv",
                        "plot_speed.csv", "plot_accel.csv", "plot_safety_distance.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
    CHECK_FALSE(std::filesystem::exists(dir / (std::string(f) + ".tmp")));
  }
  std::ifstream jl(dir / "protocol.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(jl, line)) ++n;
  CHECK(n == 6);
  CHECK_THROWS_AS(write_atomic("/nonexistent-dir/x.csv", "x"), IoError);
  std::filesystem::remove_all(dir);
}
