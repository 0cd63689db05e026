#include "champagne/geometry.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace champagne {

double Point::angle() const { return wrap_angle(std::atan2(y, x)); }

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

Point from_polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

Point rotate(Point p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

double distance_to_segment(Point p, Point a, Point b) {
  const Point u = b - a;
  const double len2 = u.norm2();
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(((p.x - a.x) * u.x + (p.y - a.y) * u.y) / len2, 0.0, 1.0);
  return distance(p, a + t * u);
}

Disc Disc::make(Point center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("disc radius must be positive and finite");
  }
  return Disc{center, radius, std::log(radius)};
}

Disc Disc::from_log_radius(Point center, double log_radius) {
  if (!std::isfinite(log_radius)) {
    throw std::invalid_argument("disc log-radius must be finite");
  }
  return Disc{center, std::exp(log_radius), log_radius};
}

int generation_of(double delta) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("generation_of: point must lie strictly inside the unit disc");
  }
  if (delta > 0.5) return 0;
  int e = 0;
  const double f = std::frexp(delta, &e);  // delta = f * 2^e, f in [0.5, 1)
  return f == 0.5 ? 1 - e : -e;
}

WhitneyIndex WhitneyIndex::make(int n, std::int64_t m) {
  if (n < 1 || n > kMaxGeneration) {
    throw std::invalid_argument("Whitney generation out of range: n=" + std::to_string(n));
  }
  const std::int64_t count = cells_in_generation(n);
  m %= count;
  if (m < 0) m += count;
  return WhitneyIndex{n, m};
}

bool WhitneyIndex::valid() const {
  return n >= 1 && n <= kMaxGeneration && m >= 0 && m < cells_in_generation(n);
}

WhitneyCell whitney_cell(WhitneyIndex idx) {
  if (!idx.valid()) {
    throw std::invalid_argument("invalid Whitney index (n=" + std::to_string(idx.n) +
                                ", m=" + std::to_string(idx.m) + ")");
  }
  const double w = kTwoPi / static_cast<double>(cells_in_generation(idx.n));
  WhitneyCell cell;
  cell.index = idx;
  cell.r_inner = 1.0 - std::ldexp(1.0, -idx.n);
  cell.r_outer = 1.0 - std::ldexp(1.0, -idx.n - 1);
  cell.theta_lo = w * static_cast<double>(idx.m);
  cell.theta_hi = w * static_cast<double>(idx.m + 1);
  return cell;
}

Point cell_center(WhitneyIndex idx) {
  const WhitneyCell cell = whitney_cell(idx);
  return from_polar(0.5 * (cell.r_inner + cell.r_outer), 0.5 * (cell.theta_lo + cell.theta_hi));
}

Point cell_corner(WhitneyIndex idx) {
  const WhitneyCell cell = whitney_cell(idx);
  return from_polar(cell.r_inner, cell.theta_lo);
}

double WhitneyCell::diameter() const {
  const double s = std::sin(0.5 * angular_width());
  const double outer_chord = 2.0 * r_outer * s;
  const double dr = r_outer - r_inner;
  const double diagonal = std::sqrt(dr * dr + 4.0 * r_inner * r_outer * s * s);
  return std::max(outer_chord, diagonal);
}

double WhitneyCell::area() const {
  return 0.5 * angular_width() * (r_outer * r_outer - r_inner * r_inner);
}

double WhitneyCell::distance_to(Point p) const {
  const double r = p.norm();
  if (r == 0.0) return r_inner;
  const double rel = wrap_angle(p.angle() - theta_lo);
  if (rel <= angular_width()) {
    return std::max({0.0, r_inner - r, r - r_outer});
  }
  // Outside the wedge the nearest point lies on one of the radial edges.
  const Point lo_a = from_polar(r_inner, theta_lo);
  const Point lo_b = from_polar(r_outer, theta_lo);
  const Point hi_a = from_polar(r_inner, theta_hi);
  const Point hi_b = from_polar(r_outer, theta_hi);
  return std::min(distance_to_segment(p, lo_a, lo_b), distance_to_segment(p, hi_a, hi_b));
}

bool WhitneyCell::contains(Point p, double tol) const { return distance_to(p) <= tol; }

bool WhitneyCell::contains_disc_interior(const Disc& d) const {
  const Point c = d.center;
  const double r = c.norm();
  if (r == 0.0) return false;
  if (wrap_angle(c.angle() - theta_lo) > angular_width()) return false;
  const double to_edges = std::min(
      distance_to_segment(c, from_polar(r_inner, theta_lo), from_polar(r_outer, theta_lo)),
      distance_to_segment(c, from_polar(r_inner, theta_hi), from_polar(r_outer, theta_hi)));
  const double inner = std::min({r - r_inner, r_outer - r, to_edges});
  return inner > d.radius;
}

WhitneyIndex cell_containing(Point p) {
  const double delta = 1.0 - p.norm();
  const int n = generation_of(delta);
  if (n < 1) throw std::invalid_argument("cell_containing: point lies in |x| > 1/2 region");
  if (n > kMaxGeneration) throw std::invalid_argument("cell_containing: point too close to the unit circle");
  const std::int64_t count = cells_in_generation(n);
  auto m = static_cast<std::int64_t>(std::floor(p.angle() / kTwoPi * static_cast<double>(count)));
  m = std::clamp<std::int64_t>(m, 0, count - 1);
  return WhitneyIndex{n, m};
}

GenerationRange generations_meeting_ball(Point center, double radius, int max_generation) {
  const double c = center.norm();
  const double delta_lo = std::max(0.0, 1.0 - c - radius);
  const double delta_hi = 1.0 - std::max(0.0, c - radius);
  GenerationRange range{1, 0};
  bool started = false;
  const int cap = std::min(max_generation, kMaxGeneration);
  for (int n = 1; n <= cap; ++n) {
    const double band_lo = std::ldexp(1.0, -n - 1);
    const double band_hi = std::ldexp(1.0, -n);
    if (band_hi < delta_lo) break;  // deeper bands are even closer to the circle
    if (band_lo <= delta_hi) {
      if (!started) {
        range.first = n;
        started = true;
      }
      range.last = n;
    }
  }
  return range;
}

AngularRange angular_range_for_ball(Point center, double radius, int n) {
  const std::int64_t count = cells_in_generation(n);
  const double c = center.norm();
  AngularRange out;
  if (radius >= c) {
    out.all = true;
    return out;
  }
  const double half_width = std::asin(std::min(1.0, radius / c));
  const double w = kTwoPi / static_cast<double>(count);
  const double theta = center.angle();
  // One index of slack on each side absorbs seam and rounding effects; the
  // callers apply an exact test afterwards.
  const auto lo = static_cast<std::int64_t>(std::floor((theta - half_width) / w)) - 1;
  const auto hi = static_cast<std::int64_t>(std::floor((theta + half_width) / w)) + 1;
  if (hi - lo + 1 >= count) {
    out.all = true;
    return out;
  }
  out.lo = ((lo % count) + count) % count;
  out.hi = ((hi % count) + count) % count;
  return out;
}

std::vector<WhitneyIndex> cells_intersecting_ball(Point center, double radius, int max_generation) {
  std::vector<WhitneyIndex> out;
  const GenerationRange gens = generations_meeting_ball(center, radius, max_generation);
  for (int n = gens.first; n <= gens.last; ++n) {
    const std::int64_t count = cells_in_generation(n);
    const AngularRange range = angular_range_for_ball(center, radius, n);
    auto test = [&](std::int64_t m) {
      const WhitneyIndex idx{n, m};
      if (whitney_cell(idx).distance_to(center) <= radius) out.push_back(idx);
    };
    if (range.all) {
      for (std::int64_t m = 0; m < count; ++m) test(m);
    } else if (range.lo <= range.hi) {
      for (std::int64_t m = range.lo; m <= range.hi; ++m) test(m);
    } else {
      for (std::int64_t m = 0; m <= range.hi; ++m) test(m);
      for (std::int64_t m = range.lo; m < count; ++m) test(m);
    }
  }
  return out;
}

std::vector<WhitneyIndex> cells_intersecting_disc(const Disc& d) {
  std::vector<WhitneyIndex> cells = cells_intersecting_ball(d.center, d.radius);
  // A disc with r <= (2^5 c1)^(-1) (1 - |x|), c1 = 4/(1 - r/(1 - |x|)), meets
  // at most four cells.
  const double delta = d.boundary_gap();
  if (delta > 0.0 && d.radius < delta) {
    const double c1 = 4.0 / (1.0 - d.radius / delta);
    if (d.radius <= delta / (32.0 * c1) && cells.size() > 4) {
      throw std::logic_error("small disc meets " + std::to_string(cells.size()) + " cells");
    }
  }
  return cells;
}

}  // namespace champagne
