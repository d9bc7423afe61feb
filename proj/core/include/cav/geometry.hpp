#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cav {

// Cardinal points in clockwise order. The numeric value is used for
// rotations of the merging-zone frame, do not reorder.
enum class Cardinal { North = 0, East = 1, South = 2, West = 3 };

enum class TurnKind { Straight, Right, Left };

std::string_view to_string(Cardinal c);
std::string_view to_string(TurnKind k);
Cardinal parse_cardinal(std::string_view s);

/// Ordered (origin, exit) pair of cardinal points. Right-hand traffic:
/// a vehicle entering from the West heads East, turns right to the South
/// and left to the North.
class Movement {
 public:
  Movement(Cardinal origin, Cardinal exit);

  Cardinal origin() const { return origin_; }
  Cardinal exit() const { return exit_; }
  TurnKind turn_kind() const { return turn_; }

  friend bool operator==(const Movement&, const Movement&) = default;

 private:
  Cardinal origin_;
  Cardinal exit_;
  TurnKind turn_;
};

std::string to_string(const Movement& m);

/// Index into the global lane set {1, ..., M}. Lanes are numbered by
/// approach (N, E, S, W) and then from the rightmost lane outwards.
struct LaneId {
  int value = 0;

  friend auto operator<=>(const LaneId&, const LaneId&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Intersection geometry: control zone of length `control_zone_length`
/// upstream of a square merging zone, with quarter-circle turn paths.
class IntersectionLayout {
 public:
  struct Dimensions {
    double control_zone_length = 125.0;
    double merging_zone_side = 25.0;
    double right_turn_radius = 12.5;
    double left_turn_radius = 25.0;
    int lanes_per_approach = 1;
  };

  explicit IntersectionLayout(const Dimensions& dims);

  /// Default turn radii are S_m / 2 (right) and S_m (left).
  static IntersectionLayout with_default_radii(double control_zone_length,
                                               double merging_zone_side,
                                               int lanes_per_approach = 1);

  const Dimensions& dimensions() const { return dims_; }
  double control_zone_length() const { return dims_.control_zone_length; }
  double merging_zone_side() const { return dims_.merging_zone_side; }
  double right_turn_radius() const { return dims_.right_turn_radius; }
  double left_turn_radius() const { return dims_.left_turn_radius; }
  int lanes_per_approach() const { return dims_.lanes_per_approach; }
  int lane_count() const { return 4 * dims_.lanes_per_approach; }

  /// Precomputed lateral-conflict relation between movements.
  bool conflicts(const Movement& a, const Movement& b) const;

  /// Polyline of the movement's path through the merging zone, in a frame
  /// centred on the zone with x pointing East and y pointing North.
  std::vector<Point2> merging_path(const Movement& m, int segments = 256) const;

 private:
  Dimensions dims_;
  // conflict_[a][b], indexed by movement_index().
  std::array<std::array<bool, 12>, 12> conflict_{};
};

/// Path length inside the merging zone for the movement's turn kind.
double merging_path_length(const IntersectionLayout& layout, const Movement& m);

double total_distance(const IntersectionLayout& layout, const Movement& m);

struct MergingWindow {
  double entry_position = 0.0;
  double exit_position = 0.0;
};

MergingWindow merging_window(const IntersectionLayout& layout, const Movement& m);

bool conflicts(const IntersectionLayout& layout, const Movement& a, const Movement& b);

LaneId lane_id(const IntersectionLayout& layout, Cardinal approach, int rank_from_right);
Cardinal approach_of(const IntersectionLayout& layout, LaneId lane);
bool is_valid_lane(const IntersectionLayout& layout, LaneId lane);

/// Right turns use the rightmost lane, left turns the leftmost, straight
/// movements any lane of the approach. Sorted by index.
std::vector<LaneId> allowed_lanes(const Movement& m, const IntersectionLayout& layout);

/// Geometric test used to build the conflict table. Endpoints count as
/// intersections.
bool polylines_intersect(const std::vector<Point2>& a, const std::vector<Point2>& b,
                         double tolerance);

}  // namespace cav
