#include "cav/scenario_io.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cav {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ParseError(field + ": " + msg, field);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

double number_or(const json& obj, const std::string& path, std::string_view key, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) fail(join(path, key), "expected a number");
  return it->get<double>();
}

double required_number(const json& obj, const std::string& path, std::string_view key) {
  if (!obj.contains(key)) fail(join(path, key), "missing");
  return number_or(obj, path, key, 0.0);
}

VehicleParams read_params(const json& obj, const std::string& path, const VehicleParams& base) {
  reject_unknown(obj, path,
                 {"u_min", "u_max", "v_min", "v_max", "headway_time", "standstill_gap",
                  "reaction_constant"});
  VehicleParams p = base;
  p.u_min = number_or(obj, path, "u_min", p.u_min);
  p.u_max = number_or(obj, path, "u_max", p.u_max);
  p.v_min = number_or(obj, path, "v_min", p.v_min);
  p.v_max = number_or(obj, path, "v_max", p.v_max);
  p.headway_time = number_or(obj, path, "headway_time", p.headway_time);
  p.standstill_gap = number_or(obj, path, "standstill_gap", p.standstill_gap);
  p.reaction_constant = number_or(obj, path, "reaction_constant", p.reaction_constant);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return p;
}

IntersectionLayout read_layout(const json& obj) {
  const std::string path = "layout";
  reject_unknown(obj, path,
                 {"control_zone_length", "merging_zone_side", "right_turn_radius",
                  "left_turn_radius", "lanes_per_approach"});
  IntersectionLayout::Dimensions d;
  d.control_zone_length = number_or(obj, path, "control_zone_length", d.control_zone_length);
  d.merging_zone_side = number_or(obj, path, "merging_zone_side", d.merging_zone_side);
  // Radii default to the merging-zone proportions unless given.
  d.right_turn_radius = number_or(obj, path, "right_turn_radius", d.merging_zone_side / 2.0);
  d.left_turn_radius = number_or(obj, path, "left_turn_radius", d.merging_zone_side);
  if (const auto it = obj.find("lanes_per_approach"); it != obj.end()) {
    if (!it->is_number_integer()) fail("layout.lanes_per_approach", "expected an integer");
    d.lanes_per_approach = it->get<int>();
  }
  try {
    return IntersectionLayout(d);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

Cardinal read_cardinal(const json& obj, const std::string& path, std::string_view key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing");
  if (!it->is_string()) fail(join(path, key), "expected one of N, E, S, W");
  try {
    return parse_cardinal(it->get<std::string>());
  } catch (const std::invalid_argument& e) {
    fail(join(path, key), e.what());
  }
}

SimSettings read_sim(const json& obj) {
  const std::string path = "sim";
  reject_unknown(obj, path, {"dt", "lateral_buffer", "horizon_cap", "seed"});
  SimSettings s;
  s.dt = number_or(obj, path, "dt", s.dt);
  if (!(s.dt > 0.0)) fail("sim.dt", "must be positive");
  s.lateral_buffer = number_or(obj, path, "lateral_buffer", s.lateral_buffer);
  if (!(s.lateral_buffer >= 0.0)) fail("sim.lateral_buffer", "must be non-negative");
  s.horizon_cap = number_or(obj, path, "horizon_cap", s.horizon_cap);
  if (!(s.horizon_cap > 0.0)) fail("sim.horizon_cap", "must be positive");
  if (const auto it = obj.find("seed"); it != obj.end()) {
    if (!it->is_number_unsigned()) fail("sim.seed", "expected a non-negative integer");
    s.seed = it->get<std::uint64_t>();
  }
  return s;
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

ordered_json params_json(const VehicleParams& p) {
  ordered_json j;
  j["u_min"] = p.u_min;
  j["u_max"] = p.u_max;
  j["v_min"] = p.v_min;
  j["v_max"] = p.v_max;
  j["headway_time"] = p.headway_time;
  j["standstill_gap"] = p.standstill_gap;
  j["reaction_constant"] = p.reaction_constant;
  return j;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    throw ParseError("syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     "", line, column);
  }
  reject_unknown(doc, "", {"layout", "defaults", "arrivals", "policy", "sim"});

  Scenario s;
  if (const auto it = doc.find("layout"); it != doc.end()) s.layout = read_layout(*it);
  if (const auto it = doc.find("defaults"); it != doc.end()) {
    s.defaults = read_params(*it, "defaults", VehicleParams{});
  }
  if (const auto it = doc.find("policy"); it != doc.end()) {
    if (!it->is_string()) fail("policy", "expected \"optimal\" or \"fifo\"");
    try {
      s.policy = parse_policy(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail("policy", e.what());
    }
  }
  if (const auto it = doc.find("sim"); it != doc.end()) s.sim = read_sim(*it);

  const auto arrivals = doc.find("arrivals");
  if (arrivals == doc.end()) fail("arrivals", "missing");
  if (!arrivals->is_array()) fail("arrivals", "expected an array");
  std::set<VehicleId> ids;
  for (std::size_t i = 0; i < arrivals->size(); ++i) {
    const std::string path = "arrivals[" + std::to_string(i) + "]";
    const json& a = (*arrivals)[i];
    reject_unknown(a, path, {"id", "time", "origin", "exit", "v0", "params"});
    Arrival arr;
    const auto id = a.find("id");
    if (id == a.end()) fail(path + ".id", "missing");
    if (!id->is_number_integer()) fail(path + ".id", "expected an integer");
    arr.id = id->get<VehicleId>();
    if (!ids.insert(arr.id).second) fail(path + ".id", "duplicate vehicle id");
    arr.time = required_number(a, path, "time");
    if (!s.arrivals.empty() && arr.time < s.arrivals.back().time) {
      fail(path + ".time", "arrival times must be non-decreasing");
    }
    const Cardinal origin = read_cardinal(a, path, "origin");
    const Cardinal exit = read_cardinal(a, path, "exit");
    try {
      arr.movement = Movement(origin, exit);
    } catch (const std::invalid_argument& e) {
      fail(path + ".exit", e.what());
    }
    arr.v0 = required_number(a, path, "v0");
    arr.params = s.defaults;
    if (const auto p = a.find("params"); p != a.end()) {
      arr.params = read_params(*p, path + ".params", s.defaults);
    }
    try {
      request_for(arr).validate();
    } catch (const std::invalid_argument& e) {
      fail(path + ".v0", e.what());
    }
    s.arrivals.push_back(arr);
  }

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail("<root>", e.what());
  }
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return buf.str();
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

std::string serialize_scenario(const Scenario& scenario) {
  ordered_json doc;
  const auto& d = scenario.layout.dimensions();
  doc["layout"] = {{"control_zone_length", d.control_zone_length},
                   {"merging_zone_side", d.merging_zone_side},
                   {"right_turn_radius", d.right_turn_radius},
                   {"left_turn_radius", d.left_turn_radius},
                   {"lanes_per_approach", d.lanes_per_approach}};
  doc["defaults"] = params_json(scenario.defaults);
  doc["policy"] = std::string(to_string(scenario.policy));
  doc["sim"] = {{"dt", scenario.sim.dt},
                {"lateral_buffer", scenario.sim.lateral_buffer},
                {"horizon_cap", scenario.sim.horizon_cap},
                {"seed", scenario.sim.seed}};
  auto arrivals = ordered_json::array();
  for (const auto& a : scenario.arrivals) {
    ordered_json j;
    j["id"] = a.id;
    j["time"] = a.time;
    j["origin"] = std::string(to_string(a.movement.origin()));
    j["exit"] = std::string(to_string(a.movement.exit()));
    j["v0"] = a.v0;
    if (!(a.params == scenario.defaults)) j["params"] = params_json(a.params);
    arrivals.push_back(std::move(j));
  }
  doc["arrivals"] = std::move(arrivals);
  return doc.dump(2) + "\n";
}

}  // namespace cav
