#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace champagne {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Deepest dyadic generation any routine will enumerate. 2^(n+4) must fit
// comfortably in int64 and cell widths must stay well above double spacing.
inline constexpr int kMaxGeneration = 40;

struct Point {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
  // Polar angle in [0, 2π).
  double angle() const;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }
Point from_polar(double r, double theta);
Point rotate(Point p, double angle);
double distance_to_segment(Point p, Point a, Point b);

// Reduces an angle to [0, 2π).
double wrap_angle(double theta);

/// A closed disc B̄(center, radius).
///
/// The radius is also carried as its logarithm. Grid generators produce radii
/// such as exp(-1e4) that underflow to zero in double precision while their
/// logarithm (which is all the capacity series need) stays exact.
struct Disc {
  Point center;
  double radius = 0.0;
  double log_radius = -kInf;

  static Disc make(Point center, double radius);
  static Disc from_log_radius(Point center, double log_radius);

  // 1 - |center|.
  double boundary_gap() const { return 1.0 - center.norm(); }
  // log((1 - |x_k|) / r_k), the quantity inside the log-weighted series.
  double log_ratio() const { return std::log(boundary_gap()) - log_radius; }
};

// Generation n >= 1 of a point at distance delta = 1 - |x| from the unit
// circle: the unique n with 2^(-n-1) <= delta <= 2^(-n); the boundary value
// delta = 2^(-n) belongs to generation n. Points with delta > 1/2 (|x| < 1/2)
// return 0.
int generation_of(double delta);

inline std::int64_t cells_in_generation(int n) { return std::int64_t{1} << (n + 4); }

struct WhitneyIndex {
  int n = 1;
  std::int64_t m = 0;

  // Reduces m modulo 2^(n+4); throws std::invalid_argument for n outside
  // [1, kMaxGeneration].
  static WhitneyIndex make(int n, std::int64_t m);
  bool valid() const;

  friend bool operator==(const WhitneyIndex&, const WhitneyIndex&) = default;
  friend auto operator<=>(const WhitneyIndex&, const WhitneyIndex&) = default;
};

/// Closed polar cell {r e^{iθ}: 2^(-n-1) <= 1-r <= 2^(-n), θ_lo <= θ <= θ_hi}.
struct WhitneyCell {
  WhitneyIndex index;
  double r_inner = 0.0;
  double r_outer = 0.0;
  double theta_lo = 0.0;
  double theta_hi = 0.0;

  double angular_width() const { return theta_hi - theta_lo; }
  // Closed-form Euclidean diameter of the annular sector.
  double diameter() const;
  // Distance from p to the closed cell (0 inside).
  double distance_to(Point p) const;
  // Closed containment; tol widens the cell by an absolute margin.
  bool contains(Point p, double tol = 0.0) const;
  // True when the closed disc lies in the open interior of the cell.
  bool contains_disc_interior(const Disc& d) const;
  double area() const;
};

WhitneyCell whitney_cell(WhitneyIndex idx);
// Polar midpoint of the cell.
Point cell_center(WhitneyIndex idx);
// Inner corner z_{m,n} = (1 - 2^-n) e^{iθ_lo}.
Point cell_corner(WhitneyIndex idx);

// Cell containing p (|p| < 1, 1 - |p| <= 1/2). Points on a seam go to the
// cell with the larger generation/angle index as computed from floating
// point; callers needing closed-cell semantics use cells_intersecting_ball.
WhitneyIndex cell_containing(Point p);

// Every closed cell of generation <= max_generation meeting the closed ball
// B̄(center, radius). Sorted by (n, m).
std::vector<WhitneyIndex> cells_intersecting_ball(Point center, double radius,
                                                  int max_generation = kMaxGeneration);

// Exact list of closed cells meeting the closed disc (empty when the disc
// lies in |x| < 1/2).
std::vector<WhitneyIndex> cells_intersecting_disc(const Disc& d);

// Generation range [first, last] whose radial bands meet the closed ball.
// Returns first > last when none do.
struct GenerationRange {
  int first = 1;
  int last = 0;
};
GenerationRange generations_meeting_ball(Point center, double radius, int max_generation);

// Inclusive angular index range (possibly wrapping: lo > hi means
// [lo, count) ∪ [0, hi]) of generation-n cells that can meet the ball.
// all == true when every index must be considered.
struct AngularRange {
  bool all = false;
  std::int64_t lo = 0;
  std::int64_t hi = -1;
};
AngularRange angular_range_for_ball(Point center, double radius, int n);

}  // namespace champagne
