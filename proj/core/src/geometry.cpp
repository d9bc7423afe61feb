#include "cav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cav {
namespace {

int index_of(Cardinal c) { return static_cast<int>(c); }

Cardinal cardinal_at(int i) { return static_cast<Cardinal>(((i % 4) + 4) % 4); }

TurnKind classify(Cardinal origin, Cardinal exit) {
  const int o = index_of(origin);
  if (exit == cardinal_at(o + 2)) return TurnKind::Straight;
  if (exit == cardinal_at(o - 1)) return TurnKind::Right;
  if (exit == cardinal_at(o + 1)) return TurnKind::Left;
  throw std::invalid_argument("U-turn movement " + std::string(to_string(origin)) +
                              "->" + std::string(to_string(exit)) + " is not supported");
}

// Movements are indexed as origin * 3 + turn.
int movement_index(const Movement& m) {
  return index_of(m.origin()) * 3 + static_cast<int>(m.turn_kind());
}

Movement movement_at(int index) {
  const Cardinal origin = cardinal_at(index / 3);
  const int o = index_of(origin);
  switch (static_cast<TurnKind>(index % 3)) {
    case TurnKind::Straight:
      return {origin, cardinal_at(o + 2)};
    case TurnKind::Right:
      return {origin, cardinal_at(o - 1)};
    case TurnKind::Left:
      return {origin, cardinal_at(o + 1)};
  }
  throw std::logic_error("unreachable");
}

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point2 p, Point2 a, Point2 b, double tol) {
  return std::min(a.x, b.x) - tol <= p.x && p.x <= std::max(a.x, b.x) + tol &&
         std::min(a.y, b.y) - tol <= p.y && p.y <= std::max(a.y, b.y) + tol;
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d, double tol) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  const double ab = std::hypot(b.x - a.x, b.y - a.y);
  const double cd = std::hypot(d.x - c.x, d.y - c.y);
  // Orientation values scale with segment length; compare against a
  // length-scaled tolerance.
  const double tol_cd = tol * std::max(cd, 1e-300);
  const double tol_ab = tol * std::max(ab, 1e-300);
  auto sgn = [](double v, double t) { return v > t ? 1 : (v < -t ? -1 : 0); };
  const int s1 = sgn(d1, tol_cd), s2 = sgn(d2, tol_cd);
  const int s3 = sgn(d3, tol_ab), s4 = sgn(d4, tol_ab);
  if (s1 * s2 < 0 && s3 * s4 < 0) return true;
  if (s1 == 0 && on_segment(a, c, d, tol)) return true;
  if (s2 == 0 && on_segment(b, c, d, tol)) return true;
  if (s3 == 0 && on_segment(c, a, b, tol)) return true;
  if (s4 == 0 && on_segment(d, a, b, tol)) return true;
  return false;
}

// Path in the frame of a vehicle entering from the West (heading +x, its
// right-hand side towards -y), then rotated counter-clockwise by quarter
// turns to the actual origin.
std::vector<Point2> canonical_path(const IntersectionLayout& layout, TurnKind kind,
                                   int segments) {
  const double h = layout.merging_zone_side() / 2.0;
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(segments) + 1);
  switch (kind) {
    case TurnKind::Straight: {
      // Midline of the incoming half-road.
      for (int k = 0; k <= segments; ++k) {
        const double s = static_cast<double>(k) / segments;
        pts.push_back({-h + 2.0 * h * s, -h / 2.0});
      }
      break;
    }
    case TurnKind::Right: {
      const double r = layout.right_turn_radius();
      for (int k = 0; k <= segments; ++k) {
        const double a = std::numbers::pi / 2.0 * (1.0 - static_cast<double>(k) / segments);
        pts.push_back({-h + r * std::cos(a), -h + r * std::sin(a)});
      }
      break;
    }
    case TurnKind::Left: {
      const double r = layout.left_turn_radius();
      for (int k = 0; k <= segments; ++k) {
        const double a = -std::numbers::pi / 2.0 * (1.0 - static_cast<double>(k) / segments);
        pts.push_back({-h + r * std::cos(a), h + r * std::sin(a)});
      }
      break;
    }
  }
  return pts;
}

Point2 rotate_quarter_turns(Point2 p, int turns) {
  for (int i = 0; i < ((turns % 4) + 4) % 4; ++i) p = {-p.y, p.x};
  return p;
}

}  // namespace

std::string_view to_string(Cardinal c) {
  switch (c) {
    case Cardinal::North:
      return "N";
    case Cardinal::East:
      return "E";
    case Cardinal::South:
      return "S";
    case Cardinal::West:
      return "W";
  }
  return "?";
}

std::string_view to_string(TurnKind k) {
  switch (k) {
    case TurnKind::Straight:
      return "straight";
    case TurnKind::Right:
      return "right";
    case TurnKind::Left:
      return "left";
  }
  return "?";
}

Cardinal parse_cardinal(std::string_view s) {
  if (s == "N") return Cardinal::North;
  if (s == "E") return Cardinal::East;
  if (s == "S") return Cardinal::South;
  if (s == "W") return Cardinal::West;
  throw std::invalid_argument("unknown cardinal point '" + std::string(s) +
                              "' (expected N, E, S or W)");
}

Movement::Movement(Cardinal origin, Cardinal exit)
    : origin_(origin), exit_(exit), turn_(classify(origin, exit)) {}

std::string to_string(const Movement& m) {
  return std::string(to_string(m.origin())) + "->" + std::string(to_string(m.exit()));
}

IntersectionLayout::IntersectionLayout(const Dimensions& dims) : dims_(dims) {
  if (!(dims.control_zone_length >= 0.0) || !(dims.merging_zone_side > 0.0) ||
      !(dims.right_turn_radius > 0.0) || !(dims.left_turn_radius > 0.0)) {
    throw std::invalid_argument(
        "layout: merging zone side and turn radii must be positive, control zone "
        "length non-negative");
  }
  if (dims.right_turn_radius > dims.merging_zone_side ||
      dims.left_turn_radius > dims.merging_zone_side) {
    throw std::invalid_argument("layout: turn radii must not exceed the merging zone side");
  }
  if (dims.lanes_per_approach < 1) {
    throw std::invalid_argument("layout: lanes_per_approach must be at least 1");
  }

  std::array<std::vector<Point2>, 12> paths;
  for (int i = 0; i < 12; ++i) paths[i] = merging_path(movement_at(i), 64);
  const double tol = 1e-9 * dims.merging_zone_side;
  for (int i = 0; i < 12; ++i) {
    for (int j = i; j < 12; ++j) {
      const Movement a = movement_at(i);
      const Movement b = movement_at(j);
      bool c = false;
      if (a.origin() != b.origin()) {
        c = a.exit() == b.exit() || polylines_intersect(paths[i], paths[j], tol);
      }
      conflict_[i][j] = conflict_[j][i] = c;
    }
  }
}

IntersectionLayout IntersectionLayout::with_default_radii(double control_zone_length,
                                                          double merging_zone_side,
                                                          int lanes_per_approach) {
  return IntersectionLayout(Dimensions{control_zone_length, merging_zone_side,
                                       merging_zone_side / 2.0, merging_zone_side,
                                       lanes_per_approach});
}

bool IntersectionLayout::conflicts(const Movement& a, const Movement& b) const {
  return conflict_[movement_index(a)][movement_index(b)];
}

std::vector<Point2> IntersectionLayout::merging_path(const Movement& m, int segments) const {
  auto pts = canonical_path(*this, m.turn_kind(), segments);
  const int turns = 3 - index_of(m.origin());
  for (auto& p : pts) p = rotate_quarter_turns(p, turns);
  return pts;
}

double merging_path_length(const IntersectionLayout& layout, const Movement& m) {
  switch (m.turn_kind()) {
    case TurnKind::Straight:
      return layout.merging_zone_side();
    case TurnKind::Right:
      return std::numbers::pi * layout.right_turn_radius() / 2.0;
    case TurnKind::Left:
      return std::numbers::pi * layout.left_turn_radius() / 2.0;
  }
  throw std::logic_error("unreachable");
}

double total_distance(const IntersectionLayout& layout, const Movement& m) {
  return 2.0 * layout.control_zone_length() + merging_path_length(layout, m);
}

MergingWindow merging_window(const IntersectionLayout& layout, const Movement& m) {
  const double entry = layout.control_zone_length();
  return {entry, entry + merging_path_length(layout, m)};
}

bool conflicts(const IntersectionLayout& layout, const Movement& a, const Movement& b) {
  return layout.conflicts(a, b);
}

LaneId lane_id(const IntersectionLayout& layout, Cardinal approach, int rank_from_right) {
  const int n = layout.lanes_per_approach();
  if (rank_from_right < 0 || rank_from_right >= n) {
    throw std::out_of_range("lane rank " + std::to_string(rank_from_right) +
                            " outside approach with " + std::to_string(n) + " lanes");
  }
  return LaneId{index_of(approach) * n + rank_from_right + 1};
}

bool is_valid_lane(const IntersectionLayout& layout, LaneId lane) {
  return lane.value >= 1 && lane.value <= layout.lane_count();
}

Cardinal approach_of(const IntersectionLayout& layout, LaneId lane) {
  if (!is_valid_lane(layout, lane)) {
    throw std::out_of_range("lane " + std::to_string(lane.value) + " outside 1.." +
                            std::to_string(layout.lane_count()));
  }
  return cardinal_at((lane.value - 1) / layout.lanes_per_approach());
}

std::vector<LaneId> allowed_lanes(const Movement& m, const IntersectionLayout& layout) {
  const int n = layout.lanes_per_approach();
  switch (m.turn_kind()) {
    case TurnKind::Right:
      return {lane_id(layout, m.origin(), 0)};
    case TurnKind::Left:
      return {lane_id(layout, m.origin(), n - 1)};
    case TurnKind::Straight: {
      std::vector<LaneId> lanes;
      for (int k = 0; k < n; ++k) lanes.push_back(lane_id(layout, m.origin(), k));
      return lanes;
    }
  }
  throw std::logic_error("unreachable");
}

bool polylines_intersect(const std::vector<Point2>& a, const std::vector<Point2>& b,
                         double tolerance) {
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1], tolerance)) return true;
    }
  }
  return false;
}

}  // namespace cav
