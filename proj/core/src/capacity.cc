#include "champagne/capacity.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "champagne/numeric.h"

namespace champagne {
namespace {

constexpr double kPolarDiameter = 1e-30;
constexpr std::size_t kMaxElements = 16384;
constexpr std::size_t kInteriorTargets = 2000;

// A boundary element carrying a uniform measure: a straight segment, or a
// point charge standing for a small disc far from everything else.
struct Element {
  bool charge = false;
  Point a;
  Point b;
  double length = 0.0;
  double log_r = 0.0;  // charges only

  Point mid() const { return 0.5 * (a + b); }
};

// ∫ log sqrt(u^2 + v^2) du.
double log_antiderivative(double u, double v) {
  if (v == 0.0) return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u;
  return 0.5 * u * std::log(u * u + v * v) - u + v * std::atan(u / v);
}

// Mean of log|x - y| over y uniform on the segment.
double segment_log_mean(Point x, const Element& e) {
  const double h = e.length;
  const double ex = (e.b.x - e.a.x) / h;
  const double ey = (e.b.y - e.a.y) / h;
  const double dx = x.x - e.a.x;
  const double dy = x.y - e.a.y;
  const double w = dx * ex + dy * ey;
  const double v = std::abs(dx * ey - dy * ex);
  return (log_antiderivative(w, v) - log_antiderivative(w - h, v)) / h;
}

// Mean of log|x - y| over the element measure.
double element_log_mean(Point x, const Element& e) {
  if (!e.charge) return segment_log_mean(x, e);
  const double d = distance(x, e.a);
  const double log_d = std::log(d);
  return log_d < e.log_r ? e.log_r : log_d;
}

bool collinear_neighbors(const Element& p, const Element& q) {
  const double tol = 1e-12 * std::max(p.length, q.length);
  if (std::abs(p.length - q.length) > tol) return false;
  const bool touch = distance(p.b, q.a) <= tol || distance(p.a, q.b) <= tol;
  if (!touch) return false;
  const Point u = p.b - p.a;
  const Point w = q.b - q.a;
  const double cross = u.x * w.y - u.y * w.x;
  const double dot = u.x * w.x + u.y * w.y;
  return dot > 0.0 && std::abs(cross) <= 1e-12 * p.length * q.length;
}

// -E[log|X - Y|] for X, Y independent on the two elements.
double interaction(const Element& p, const Element& q) {
  if (p.charge && q.charge) return -std::log(distance(p.a, q.a));
  if (p.charge) return -segment_log_mean(p.a, q);
  if (q.charge) return -segment_log_mean(q.a, p);
  if (collinear_neighbors(p, q)) return -std::log(p.length) + 1.5 - 2.0 * std::log(2.0);
  const Element& outer = p.length >= q.length ? p : q;
  const Element& inner = p.length >= q.length ? q : p;
  auto along = [&](double t) { return segment_log_mean(outer.a + t * (outer.b - outer.a), inner); };
  const double near = 3.0 * std::max(p.length, q.length);
  if (distance(p.mid(), q.mid()) < near) {
    return -boost::math::quadrature::gauss<double, 20>::integrate(along, 0.0, 1.0);
  }
  const double off = 0.5 / std::sqrt(3.0);
  return -0.5 * (along(0.5 - off) + along(0.5 + off));
}

double self_energy(const Element& e) { return e.charge ? -e.log_r : 1.5 - std::log(e.length); }

SymmetricMatrix energy_matrix(const std::vector<Element>& elements) {
  SymmetricMatrix a(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    a(i, i) = self_energy(elements[i]);
    for (std::size_t j = i + 1; j < elements.size(); ++j) {
      const double v = interaction(elements[i], elements[j]);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

struct Discretization {
  std::vector<Element> elements;
  std::vector<Point> interior;  // extra C₂ targets
  bool single_disc = false;     // one full disc: closed forms apply
  Disc disc;                    // that disc, scaled
  bool has_segments = false;
};

void push_segment(Point a, Point b, double scale, double min_length, std::vector<Element>& out) {
  const double h = distance(a, b);
  if (!(h > min_length)) return;
  Element e;
  e.a = scale * a;
  e.b = scale * b;
  e.length = scale * h;
  if (e.length > 0.0) out.push_back(e);
}

// Walks a parametrized curve on [0, 1] with `samples` chords, keeping the
// parts where `inside` holds and cutting chords at crossings by bisection.
template <typename Curve, typename Inside>
void add_clipped_curve(const Curve& curve, int samples, const Inside& inside, double scale, double min_length,
                       std::vector<Element>& out) {
  auto s_at = [&](int i) { return static_cast<double>(i) / samples; };
  bool prev_in = inside(curve(0.0));
  for (int i = 0; i < samples; ++i) {
    const double s0 = s_at(i);
    const double s1 = s_at(i + 1);
    const bool next_in = inside(curve(s1));
    if (prev_in && next_in) {
      push_segment(curve(s0), curve(s1), scale, min_length, out);
    } else if (prev_in != next_in) {
      double lo = s0;  // inside end
      double hi = s1;  // outside end
      if (!prev_in) std::swap(lo, hi);
      const double anchor = lo;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (lo + hi);
        (inside(curve(m)) ? lo : hi) = m;
      }
      push_segment(curve(anchor), curve(lo), scale, min_length, out);
    }
    prev_in = next_in;
  }
}

// Segment [lo, hi] of a cell edge inside the disc, sampled uniformly.
template <typename Curve>
void add_edge_interval(const Curve& curve, double lo, double hi, int samples, double scale, double min_length,
                       std::vector<Element>& out) {
  if (!(hi > lo)) return;
  for (int i = 0; i < samples; ++i) {
    const double s0 = lo + (hi - lo) * i / samples;
    const double s1 = lo + (hi - lo) * (i + 1) / samples;
    push_segment(curve(s0), curve(s1), scale, min_length, out);
  }
}

// Boundary of B̄(d) ∩ cell: circle arcs inside the cell plus cell edges
// inside the disc.
void add_clipped_disc(const Disc& d, const WhitneyCell& cell, const CapacityOptions& options, double scale,
                      std::vector<Element>& out) {
  const double r = d.radius;
  const Point c = d.center;
  const double min_length = 1e-13 * r;
  auto circle = [&](double s) { return c + r * Point{std::cos(kTwoPi * s), std::sin(kTwoPi * s)}; };
  add_clipped_curve(circle, 4 * options.arc_points, [&](Point p) { return cell.contains(p); }, scale,
                    min_length, out);

  const double width = cell.angular_width();
  const double cn = c.norm();
  const double phi_c = c.angle();
  const double mid = 0.5 * (cell.theta_lo + cell.theta_hi);
  const double phi = mid + std::remainder(phi_c - mid, kTwoPi);
  for (double rr : {cell.r_inner, cell.r_outer}) {
    // |R e^{iθ} - c|^2 = (R - |c|)^2 + 4R|c| sin^2((θ - φ)/2) <= r^2.
    const double slack = r * r - (rr - cn) * (rr - cn);
    if (slack < 0.0) continue;
    const double q = cn > 0.0 ? slack / (4.0 * rr * cn) : 2.0;
    const double half = q >= 1.0 ? kPi : 2.0 * std::asin(std::sqrt(q));
    const double lo = std::max(cell.theta_lo, phi - half);
    const double hi = std::min(cell.theta_hi, phi + half);
    auto arc = [&](double s) { return from_polar(rr, cell.theta_lo + s * width); };
    add_edge_interval(arc, (lo - cell.theta_lo) / width, (hi - cell.theta_lo) / width, options.arc_points, scale,
                      min_length, out);
  }
  const double depth = cell.r_outer - cell.r_inner;
  for (double theta : {cell.theta_lo, cell.theta_hi}) {
    const Point u{std::cos(theta), std::sin(theta)};
    const double along = u.x * c.x + u.y * c.y;
    const double across = u.x * c.y - u.y * c.x;
    const double disc2 = r * r - across * across;
    if (disc2 < 0.0) continue;
    const double root = std::sqrt(disc2);
    const double lo = std::max(cell.r_inner, along - root);
    const double hi = std::min(cell.r_outer, along + root);
    auto ray = [&](double s) { return from_polar(cell.r_inner + s * depth, theta); };
    add_edge_interval(ray, (lo - cell.r_inner) / depth, (hi - cell.r_inner) / depth, options.arc_points, scale,
                      min_length, out);
  }
}

// Full discs are point charges when r <= ratio * (distance to every other
// piece). Scans centers sorted by x within the relevant window.
std::vector<bool> charge_flags(const std::vector<Disc>& discs, const std::vector<SegmentPiece>& segments,
                               const std::vector<Disc>& clipped, double ratio) {
  const std::size_t k = discs.size();
  std::vector<bool> flags(k, true);
  if (k == 1 && segments.empty() && clipped.empty()) return flags;
  double r_max = 0.0;
  for (const Disc& d : discs) r_max = std::max(r_max, d.radius);
  for (const Disc& d : clipped) r_max = std::max(r_max, d.radius);
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return discs[i].center.x < discs[j].center.x || (discs[i].center.x == discs[j].center.x && i < j);
  });
  for (std::size_t pos = 0; pos < k; ++pos) {
    const Disc& d = discs[order[pos]];
    const double need = d.radius / ratio;
    const double window = need + r_max;
    bool ok = true;
    auto check = [&](std::size_t q) {
      const Disc& o = discs[order[q]];
      if (distance(d.center, o.center) - o.radius < need) ok = false;
    };
    for (std::size_t q = pos + 1; ok && q < k && discs[order[q]].center.x - d.center.x <= window; ++q) check(q);
    for (std::size_t q = pos; ok && q-- > 0 && d.center.x - discs[order[q]].center.x <= window;) check(q);
    for (const SegmentPiece& s : segments) {
      if (ok && distance_to_segment(d.center, s.a, s.b) < need) ok = false;
    }
    for (const Disc& o : clipped) {
      if (ok && distance(d.center, o.center) - o.radius < need) ok = false;
    }
    flags[order[pos]] = ok;
  }
  return flags;
}

void add_interior_grid(const Disc& d, const std::optional<WhitneyCell>& cell, double spacing, double scale,
                       std::vector<Point>& out) {
  const double r = d.radius;
  if (!(spacing > 0.0) || !(r > 0.0)) return;
  const int steps = static_cast<int>(std::ceil(r / spacing));
  for (int i = -steps; i <= steps; ++i) {
    for (int j = -steps; j <= steps; ++j) {
      const Point p = d.center + Point{i * spacing, j * spacing};
      if (distance(p, d.center) >= r) continue;
      if (cell && !cell->contains(p)) continue;
      out.push_back(scale * p);
    }
  }
}

Discretization discretize(const Shape& shape, const CapacityOptions& options, bool want_interior) {
  if (!(shape.scale > 0.0) || !std::isfinite(shape.scale)) throw CapacityError("shape scale must be positive");
  if (options.boundary_points < 3 || options.arc_points < 1) throw CapacityError("too few boundary points");
  Discretization out;
  std::vector<Disc> full;
  std::vector<Disc> clipped_discs;
  std::vector<WhitneyCell> clip_cells;
  std::vector<SegmentPiece> segments;
  for (const auto& piece : shape.pieces) {
    if (const auto* s = std::get_if<SegmentPiece>(&piece)) {
      if (distance(s->a, s->b) * shape.scale >= kPolarDiameter) segments.push_back(*s);
      continue;
    }
    const auto& dp = std::get<DiscPiece>(piece);
    if (!std::isfinite(dp.disc.log_radius)) continue;  // empty disc
    if (!dp.clip) {
      full.push_back(dp.disc);
      continue;
    }
    const WhitneyCell cell = whitney_cell(*dp.clip);
    if (cell.contains_disc_interior(dp.disc)) {
      full.push_back(dp.disc);
    } else if (cell.distance_to(dp.disc.center) <= dp.disc.radius) {
      clipped_discs.push_back(dp.disc);
      clip_cells.push_back(cell);
    }
  }
  out.has_segments = !segments.empty();

  if (full.size() == 1 && clipped_discs.empty() && segments.empty()) {
    out.single_disc = true;
    const Disc& d = full.front();
    out.disc = Disc::from_log_radius(shape.scale * d.center, d.log_radius + std::log(shape.scale));
    if (d.radius > 0.0) out.disc.radius = shape.scale * d.radius;  // exact when scale == 1
    return out;
  }

  const double log_scale = std::log(shape.scale);
  const std::vector<bool> charges = charge_flags(full, segments, clipped_discs, options.charge_ratio);
  double area = 0.0;
  for (std::size_t k = 0; k < full.size(); ++k) {
    if (!charges[k]) area += kPi * full[k].radius * full[k].radius;
  }
  for (std::size_t k = 0; k < clipped_discs.size(); ++k) {
    area += std::min(kPi * clipped_discs[k].radius * clipped_discs[k].radius, clip_cells[k].area());
  }
  const double grid_floor = area > 0.0 ? std::sqrt(area / static_cast<double>(kInteriorTargets)) : 0.0;

  for (std::size_t k = 0; k < full.size(); ++k) {
    const Disc& d = full[k];
    if (charges[k]) {
      Element e;
      e.charge = true;
      e.a = e.b = shape.scale * d.center;
      e.log_r = d.log_radius + log_scale;
      out.elements.push_back(e);
      continue;
    }
    const int n = options.boundary_points;
    for (int i = 0; i < n; ++i) {
      push_segment(d.center + d.radius * Point{std::cos(kTwoPi * i / n), std::sin(kTwoPi * i / n)},
                   d.center + d.radius * Point{std::cos(kTwoPi * (i + 1) / n), std::sin(kTwoPi * (i + 1) / n)},
                   shape.scale, 0.0, out.elements);
    }
    if (want_interior) {
      const double spacing = std::max(0.5 * kTwoPi * d.radius / n, grid_floor);
      add_interior_grid(d, std::nullopt, spacing, shape.scale, out.interior);
    }
  }
  for (std::size_t k = 0; k < clipped_discs.size(); ++k) {
    const Disc& d = clipped_discs[k];
    if (d.radius < 1e-12 * (clip_cells[k].r_outer - clip_cells[k].r_inner)) {
      // Too small to resolve against the cell: keep the whole disc as a charge.
      Element e;
      e.charge = true;
      e.a = e.b = shape.scale * d.center;
      e.log_r = d.log_radius + log_scale;
      out.elements.push_back(e);
      continue;
    }
    add_clipped_disc(d, clip_cells[k], options, shape.scale, out.elements);
    if (want_interior) {
      const double spacing = std::max(0.5 * kTwoPi * d.radius / (4.0 * options.arc_points), grid_floor);
      add_interior_grid(d, clip_cells[k], spacing, shape.scale, out.interior);
    }
  }
  for (const SegmentPiece& s : segments) {
    const int n = options.boundary_points;
    for (int i = 0; i < n; ++i) {
      const double t0 = static_cast<double>(i) / n;
      const double t1 = static_cast<double>(i + 1) / n;
      push_segment(s.a + t0 * (s.b - s.a), s.a + t1 * (s.b - s.a), shape.scale, 0.0, out.elements);
    }
  }
  return out;
}

bool all_charges(const std::vector<Element>& elements) {
  return std::all_of(elements.begin(), elements.end(), [](const Element& e) { return e.charge; });
}

// Charges grouped into clusters by recursive median bisection; each cluster
// carries a uniform measure over its charges.
struct Aggregation {
  std::vector<std::vector<std::size_t>> clusters;
  SymmetricMatrix matrix;
};

void bisect(std::vector<std::size_t>& ids, std::size_t begin, std::size_t end, std::size_t leaf,
            const std::vector<Element>& e, std::vector<std::pair<std::size_t, std::size_t>>& leaves) {
  if (end - begin <= leaf) {
    leaves.emplace_back(begin, end);
    return;
  }
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (std::size_t i = begin; i < end; ++i) {
    const Point p = e[ids[i]].a;
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const bool use_x = x1 - x0 >= y1 - y0;
  auto key = [&](std::size_t id) { return std::make_pair(use_x ? e[id].a.x : e[id].a.y, id); };
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(ids.begin() + static_cast<std::ptrdiff_t>(begin), ids.begin() + static_cast<std::ptrdiff_t>(mid),
                   ids.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  bisect(ids, begin, mid, leaf, e, leaves);
  bisect(ids, mid, end, leaf, e, leaves);
}

Point centroid(const std::vector<Element>& e, const std::vector<std::size_t>& ids) {
  KahanSum x, y;
  for (std::size_t id : ids) {
    x += e[id].a.x;
    y += e[id].a.y;
  }
  const double n = static_cast<double>(ids.size());
  return {x.value() / n, y.value() / n};
}

Aggregation aggregate(const std::vector<Element>& e, std::size_t target) {
  const std::size_t k = e.size();
  const std::size_t leaf = std::max<std::size_t>(1, (2 * k + target - 1) / target);
  std::vector<std::size_t> ids(k);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> leaves;
  bisect(ids, 0, k, leaf, e, leaves);

  Aggregation agg;
  const std::size_t g = leaves.size();
  agg.clusters.resize(g);
  std::vector<Point> centers(g);
  std::vector<double> radii(g, 0.0);
  std::vector<std::array<Point, 4>> sub(g);
  std::vector<std::array<double, 4>> sub_w(g);
  for (std::size_t c = 0; c < g; ++c) {
    auto& members = agg.clusters[c];
    members.assign(ids.begin() + static_cast<std::ptrdiff_t>(leaves[c].first),
                   ids.begin() + static_cast<std::ptrdiff_t>(leaves[c].second));
    std::sort(members.begin(), members.end());
    centers[c] = centroid(e, members);
    for (std::size_t id : members) radii[c] = std::max(radii[c], distance(e[id].a, centers[c]));
    std::vector<std::size_t> local = members;
    std::vector<std::pair<std::size_t, std::size_t>> quarters;
    bisect(local, 0, local.size(), std::max<std::size_t>(1, (local.size() + 3) / 4), e, quarters);
    sub_w[c].fill(0.0);
    for (std::size_t q = 0; q < 4; ++q) sub[c][q] = centers[c];
    for (std::size_t q = 0; q < quarters.size() && q < 4; ++q) {
      std::vector<std::size_t> part(local.begin() + static_cast<std::ptrdiff_t>(quarters[q].first),
                                    local.begin() + static_cast<std::ptrdiff_t>(quarters[q].second));
      if (part.empty()) continue;
      sub[c][q] = centroid(e, part);
      sub_w[c][q] = static_cast<double>(part.size()) / static_cast<double>(members.size());
    }
  }

  agg.matrix = SymmetricMatrix(g);
  for (std::size_t c = 0; c < g; ++c) {
    const auto& m = agg.clusters[c];
    KahanSum s;
    for (std::size_t i = 0; i < m.size(); ++i) {
      s += -e[m[i]].log_r;
      for (std::size_t j = i + 1; j < m.size(); ++j) s += -2.0 * std::log(distance(e[m[i]].a, e[m[j]].a));
    }
    const double size = static_cast<double>(m.size());
    agg.matrix(c, c) = s.value() / (size * size);
    for (std::size_t d = c + 1; d < g; ++d) {
      const double dist = distance(centers[c], centers[d]);
      double v = 0.0;
      if (dist > 4.0 * (radii[c] + radii[d])) {
        v = -std::log(dist);
      } else {
        for (std::size_t a = 0; a < 4; ++a) {
          for (std::size_t b = 0; b < 4; ++b) {
            if (sub_w[c][a] > 0.0 && sub_w[d][b] > 0.0) {
              v -= sub_w[c][a] * sub_w[d][b] * std::log(distance(sub[c][a], sub[d][b]));
            }
          }
        }
      }
      agg.matrix(c, d) = v;
      agg.matrix(d, c) = v;
    }
  }
  return agg;
}

struct Solved {
  QpResult qp;
  CapacityMethod method = CapacityMethod::kEnergyMinimization;
  std::vector<double> element_weights;  // per element (expanded for clusters)
  std::vector<double> potentials;       // (Aμ)_i per QP unit
};

Solved solve(const std::vector<Element>& elements, const CapacityOptions& options) {
  Solved out;
  const bool charges = all_charges(elements);
  if (charges && elements.size() > options.aggregate_above) {
    const Aggregation agg = aggregate(elements, options.aggregate_above);
    out.qp = solve_simplex_qp(agg.matrix, options.qp);
    out.method = CapacityMethod::kAggregatedCharge;
    out.element_weights.assign(elements.size(), 0.0);
    for (std::size_t c = 0; c < agg.clusters.size(); ++c) {
      const double w = out.qp.weights[c] / static_cast<double>(agg.clusters[c].size());
      for (std::size_t id : agg.clusters[c]) out.element_weights[id] = w;
    }
    out.potentials.resize(agg.clusters.size());
    for (std::size_t i = 0; i < agg.clusters.size(); ++i) {
      KahanSum s;
      for (std::size_t j = 0; j < agg.clusters.size(); ++j) s += agg.matrix(i, j) * out.qp.weights[j];
      out.potentials[i] = s.value();
    }
    return out;
  }
  if (elements.size() > kMaxElements) {
    throw CapacityError("discretization has " + std::to_string(elements.size()) + " elements; limit is " +
                        std::to_string(kMaxElements));
  }
  const SymmetricMatrix a = energy_matrix(elements);
  out.qp = solve_simplex_qp(a, options.qp);
  out.method = charges ? CapacityMethod::kChargeModel : CapacityMethod::kEnergyMinimization;
  out.element_weights = out.qp.weights;
  out.potentials.resize(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    KahanSum s;
    for (std::size_t j = 0; j < elements.size(); ++j) s += a(i, j) * out.qp.weights[j];
    out.potentials[i] = s.value();
  }
  return out;
}

CapacityEstimate estimate_once(const Shape& shape, const CapacityOptions& options) {
  CapacityEstimate est;
  const Discretization d = discretize(shape, options, false);
  if (d.single_disc) {
    est.method = CapacityMethod::kExactDisc;
    est.log_value = d.disc.log_radius;
    est.value = d.disc.radius;
    est.boundary_points = 1;
    return est;
  }
  if (d.elements.empty()) return est;  // polar
  const Solved s = solve(d.elements, options);
  est.method = s.method;
  est.log_value = -s.qp.value;
  est.value = std::exp(est.log_value);
  est.boundary_points = static_cast<int>(d.elements.size());
  return est;
}

}  // namespace

const char* to_string(CapacityMethod method) {
  switch (method) {
    case CapacityMethod::kExactDisc: return "exact_disc";
    case CapacityMethod::kEnergyMinimization: return "energy_minimization";
    case CapacityMethod::kChargeModel: return "charge_model";
    case CapacityMethod::kAggregatedCharge: return "aggregated_charge";
    case CapacityMethod::kPolar: return "polar";
  }
  return "unknown";
}

Shape Shape::disc(const Disc& d) {
  Shape s;
  s.pieces.emplace_back(DiscPiece{d, std::nullopt});
  return s;
}

Shape Shape::segment(Point a, Point b) {
  Shape s;
  s.pieces.emplace_back(SegmentPiece{a, b});
  return s;
}

Shape Shape::clipped_disc(const Disc& d, WhitneyIndex cell) {
  Shape s;
  if (whitney_cell(cell).contains_disc_interior(d)) {
    s.pieces.emplace_back(DiscPiece{d, std::nullopt});
  } else {
    s.pieces.emplace_back(DiscPiece{d, cell});
  }
  return s;
}

void Shape::add(const Shape& other) {
  if (other.scale != scale && !other.pieces.empty() && !pieces.empty()) {
    throw CapacityError("cannot merge shapes with different scales");
  }
  if (pieces.empty()) scale = other.scale;
  pieces.insert(pieces.end(), other.pieces.begin(), other.pieces.end());
}

Shape Shape::scaled(double factor) const {
  Shape s = *this;
  s.scale *= factor;
  return s;
}

CapacityEstimate log_capacity(const Shape& shape, const CapacityOptions& options) {
  CapacityEstimate est = estimate_once(shape, options);
  if (options.estimate_error && est.method == CapacityMethod::kEnergyMinimization) {
    CapacityOptions coarse = options;
    coarse.boundary_points = std::max(3, options.boundary_points / 2);
    coarse.arc_points = std::max(1, options.arc_points / 2);
    coarse.estimate_error = false;
    const CapacityEstimate c = estimate_once(shape, coarse);
    est.error_hint = std::abs(std::expm1(est.log_value - c.log_value));
  }
  return est;
}

C2Estimate c2_disc(double r, double c3) {
  if (!(r > 0.0 && r <= 0.5)) throw CapacityError("c2_disc needs 0 < r <= 1/2");
  if (!(c3 > 1.0)) throw CapacityError("c3 must exceed 1");
  C2Estimate est;
  est.value = 1.0 / (0.5 * std::log(2.0 / r) + 0.25);
  const double inv_log = 1.0 / std::log(1.0 / r);
  est.lower = inv_log / c3;
  est.upper = inv_log * c3;
  return est;
}

C2Estimate c2_capacity(const Shape& shape, const CapacityOptions& options) {
  C2Estimate est;
  est.lower = 0.0;
  est.upper = kInf;
  const Discretization d = discretize(shape, options, true);
  if (d.single_disc) {
    if (d.disc.radius > 1.0) throw CapacityError("C2 estimator needs diameter <= 2");
    // The equilibrium potential of log(2/|x-y|) is log(2/r) on the disc.
    est.value = 1.0 / (std::log(2.0) - d.disc.log_radius);
    if (d.disc.log_radius <= -std::log(2.0)) {
      const double inv_log = -1.0 / d.disc.log_radius;
      est.lower = inv_log / 4.0;
      est.upper = inv_log * 4.0;
    }
    return est;
  }
  if (d.elements.empty()) {
    est.polar = true;
    est.upper = 0.0;
    return est;
  }
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const Element& e : d.elements) {
    const double pad = e.charge ? std::exp(e.log_r) : 0.0;
    for (Point p : {e.a, e.b}) {
      x0 = std::min(x0, p.x - pad);
      x1 = std::max(x1, p.x + pad);
      y0 = std::min(y0, p.y - pad);
      y1 = std::max(y1, p.y + pad);
    }
  }
  if (std::hypot(x1 - x0, y1 - y0) > 2.0 * (1.0 + 1e-12)) throw CapacityError("C2 estimator needs diameter <= 2");

  const Solved s = solve(d.elements, options);
  const double log2 = std::log(2.0);
  double u_min = kInf;
  for (double p : s.potentials) u_min = std::min(u_min, p + log2);
  for (Point x : d.interior) {
    KahanSum u;
    for (std::size_t j = 0; j < d.elements.size(); ++j) {
      const double w = s.element_weights[j];
      if (w > 0.0) u += w * (log2 - element_log_mean(x, d.elements[j]));
    }
    u_min = std::min(u_min, u.value());
  }
  if (!(u_min > 0.0)) throw CapacityError("C2 potential is not positive on the set");
  est.value = 1.0 / u_min;
  return est;
}

PaperConstants PaperConstants::for_ratio(double ratio_sup, double c3) {
  if (!(ratio_sup >= 0.0 && ratio_sup < 1.0)) throw CapacityError("ratio_sup must lie in [0, 1)");
  PaperConstants k;
  k.c1 = 4.0 / (1.0 - ratio_sup);
  k.c3 = c3;
  return k;
}

double PaperConstants::quasisep_threshold() const { return 8.0 * std::sqrt(kPi) * c3 * c1 * c1; }

double PaperConstants::alpha(int n) const { return std::ldexp(1.0, n) / (4.0 * kPi * c1 * c3); }

nlohmann::json PaperConstants::to_json() const {
  return {{"c1", c1}, {"c3", c3}, {"quasisep_threshold", quasisep_threshold()}};
}

namespace {

CapacityOracle default_oracle(CapacityOracle oracle) {
  if (oracle) return oracle;
  return [](const Shape& s) { return log_capacity(s); };
}

EssenCell evaluate_cell(WhitneyIndex idx, const std::vector<Disc>& discs, const CapacityOracle& oracle,
                        std::uint64_t multiplicity) {
  EssenCell cell;
  cell.index = idx;
  cell.multiplicity = multiplicity;
  try {
    cell.capacity = oracle(cell_shape(discs, idx));
  } catch (const std::exception& e) {
    throw CapacityError("cell (" + std::to_string(idx.n) + ", " + std::to_string(idx.m) + "): " + e.what());
  }
  if (!cell.capacity.polar()) {
    const double l = -idx.n * std::log(2.0) - cell.capacity.log_value;
    if (!(l > 0.0)) {
      throw CapacityError("cell (" + std::to_string(idx.n) + ", " + std::to_string(idx.m) +
                          "): capacity is not below 2^-n");
    }
    cell.weight = 1.0 / l;
  }
  return cell;
}

std::int64_t floor_mod64(std::int64_t a, std::int64_t n) {
  const std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

EssenEvaluator::EssenEvaluator(const Configuration& c, int n_max, CapacityOracle oracle) {
  oracle = default_oracle(std::move(oracle));
  std::map<WhitneyIndex, std::vector<Disc>> by_cell;
  for (const Disc& d : c.discs) {
    for (const WhitneyIndex& idx : cells_intersecting_disc(d)) {
      if (idx.n <= n_max) by_cell[idx].push_back(d);
    }
  }
  for (const auto& [idx, discs] : by_cell) {
    individual_.push_back(cells_.size());
    cells_.push_back(evaluate_cell(idx, discs, oracle, 1));
  }
}

EssenEvaluator::EssenEvaluator(const RingConfiguration& c, int n_max, CapacityOracle oracle) {
  oracle = default_oracle(std::move(oracle));
  const auto& rings = c.rings();
  std::size_t k = 0;
  while (k < rings.size()) {
    const int n = rings[k].generation;
    std::size_t end = k;
    while (end < rings.size() && rings[end].generation == n) ++end;
    if (n > n_max) break;
    const std::int64_t p = rings[k].per_cell;
    const std::int64_t cells = cells_in_generation(n);
    std::int64_t min_skip = rings[k].count;
    std::int64_t max_skip = 0;
    for (std::size_t i = k; i < end; ++i) {
      min_skip = std::min(min_skip, rings[i].skip);
      max_skip = std::max(max_skip, rings[i].skip);
    }
    const std::int64_t first_full = (max_skip + p - 1) / p;
    const std::int64_t first_partial = min_skip / p;
    auto cell_discs = [&](std::int64_t m) {
      std::vector<Disc> out;
      for (std::size_t i = k; i < end; ++i) {
        for (std::int64_t t = m * p; t < (m + 1) * p; ++t) {
          if (rings[i].is_active(t)) out.push_back(rings[i].disc(t));
        }
      }
      return out;
    };
    if (first_full < cells) {
      const WhitneyIndex idx = WhitneyIndex::make(n, first_full);
      const WhitneyCell cell = whitney_cell(idx);
      const std::vector<Disc> discs = cell_discs(first_full);
      for (const Disc& d : discs) {
        if (!cell.contains_disc_interior(d)) {
          throw CapacityError("generation " + std::to_string(n) +
                              ": grid discs are not interior to their cells; materialize the configuration");
        }
      }
      EssenCell rep = evaluate_cell(idx, discs, oracle, static_cast<std::uint64_t>(cells - first_full));
      Template tpl;
      tpl.n = n;
      tpl.weight = rep.weight;
      tpl.centers.generation = n;
      tpl.centers.per_cell = 1;
      tpl.centers.count = cells;
      tpl.centers.phase = 0.0;
      tpl.centers.delta = std::ldexp(1.0, -n);
      tpl.centers.skip = first_full;
      templates_.push_back(tpl);
      cells_.push_back(rep);
    }
    for (std::int64_t m = first_partial; m < std::min(first_full, cells); ++m) {
      const std::vector<Disc> discs = cell_discs(m);
      if (discs.empty()) continue;
      individual_.push_back(cells_.size());
      cells_.push_back(evaluate_cell(WhitneyIndex::make(n, m), discs, oracle, 1));
    }
    k = end;
  }
}

SeriesReport EssenEvaluator::evaluate(const BoundaryPoint& y) const {
  std::map<int, KahanSum> groups;
  for (const Template& t : templates_) {
    const double scale = std::ldexp(1.0, -2 * t.n);
    groups[t.n] += scale * t.weight * ring_inverse_square_sum(t.centers, y);
  }
  for (std::size_t i : individual_) {
    const EssenCell& cell = cells_[i];
    const double h = std::ldexp(1.0, -cell.index.n);
    const Point z = cell_corner(cell.index);
    groups[cell.index.n] += h * h / (z - y.point).norm2() * cell.weight;
  }
  SeriesReport report;
  report.y = y;
  report.kind = SeriesKind::kEssen;
  KahanSum running;
  for (const auto& [n, sum] : groups) {
    report.per_generation.emplace_back(n, sum.value());
    running.add(sum.value());
    report.cumulative.emplace_back(n, running.value());
  }
  return report;
}

SeriesReport essen_sum(const Configuration& c, const BoundaryPoint& y, int n_max, CapacityOracle oracle) {
  return EssenEvaluator(c, n_max, std::move(oracle)).evaluate(y);
}

std::vector<Disc> discs_meeting_cell(const Configuration& c, WhitneyIndex idx) {
  const WhitneyCell cell = whitney_cell(idx);
  std::vector<Disc> out;
  for (const Disc& d : c.discs) {
    if (cell.distance_to(d.center) <= d.radius) out.push_back(d);
  }
  return out;
}

std::vector<Disc> discs_meeting_cell(const RingConfiguration& c, WhitneyIndex idx) {
  const WhitneyCell cell = whitney_cell(idx);
  std::vector<Disc> out;
  for (const Ring& ring : c.rings()) {
    if (ring.active() == 0) continue;
    const double r = ring.radius();
    const double rho = ring.rho();
    if (rho + r < cell.r_inner || rho - r > cell.r_outer) continue;
    const double per_index = kTwoPi / static_cast<double>(ring.count);
    const double reach = std::ceil(r / (rho * per_index)) + 1.0;
    const double lo = std::floor(cell.theta_lo / per_index - ring.phase) - reach;
    const double hi = std::ceil(cell.theta_hi / per_index - ring.phase) + reach;
    const auto span = static_cast<std::int64_t>(std::min(hi - lo, static_cast<double>(ring.count - 1)));
    const auto start = static_cast<std::int64_t>(lo);
    for (std::int64_t s = 0; s <= span; ++s) {
      const std::int64_t t = floor_mod64(start + s, ring.count);
      if (!ring.is_active(t)) continue;
      const Disc d = ring.disc(t);
      if (cell.distance_to(d.center) <= d.radius) out.push_back(d);
    }
  }
  return out;
}

Shape cell_shape(const std::vector<Disc>& discs, WhitneyIndex idx) {
  Shape s;
  for (const Disc& d : discs) s.add(Shape::clipped_disc(d, idx));
  return s;
}

QuasisepCheck check_quasisep(const Configuration& c, const PaperConstants& k) {
  QuasisepCheck out;
  const SeparationReport sep = separation(c, SeparationKind::kSep);
  out.statistic = sep.value;
  out.threshold = k.quasisep_threshold();
  out.pair = sep.argmin_pair;
  out.satisfied = sep.value >= out.threshold;
  return out;
}

QuasisepCheck check_quasisep(const RingConfiguration& c, const PaperConstants& k) {
  QuasisepCheck out;
  const SeparationReport sep = separation(c, SeparationKind::kSep);
  out.statistic = sep.value;
  out.threshold = k.quasisep_threshold();
  out.pair = sep.argmin_pair;
  out.satisfied = sep.value >= out.threshold;
  return out;
}

QuasiadditivityResult quasiadditivity_ratio(const std::vector<Disc>& cell_discs, WhitneyIndex idx,
                                            const PaperConstants& k, const CapacityOptions& options) {
  if (cell_discs.empty()) throw CapacityError("quasiadditivity on a polar cell");
  const double alpha = k.alpha(idx.n);
  QuasiadditivityResult out;
  const C2Estimate u = c2_capacity(cell_shape(cell_discs, idx).scaled(alpha), options);
  if (u.polar) throw CapacityError("quasiadditivity on a polar cell");
  out.union_c2 = u.value;
  KahanSum parts;
  for (const Disc& d : cell_discs) {
    const C2Estimate part = c2_capacity(Shape::clipped_disc(d, idx).scaled(alpha), options);
    if (part.polar) continue;
    parts += part.value;
    ++out.parts;
    out.min_part_bound = std::min(out.min_part_bound, part.value * d.log_ratio());
  }
  out.parts_c2 = parts.value();
  if (!(out.parts_c2 > 0.0)) throw CapacityError("quasiadditivity on a polar cell");
  out.ratio = out.union_c2 / out.parts_c2;
  return out;
}

LoginCheck login_check(const std::vector<Disc>& cell_discs, WhitneyIndex idx, const PaperConstants& k,
                       const CapacityOptions& options) {
  const Shape shape = cell_shape(cell_discs, idx);
  const CapacityEstimate c = log_capacity(shape, options);
  if (c.polar()) throw CapacityError("login check on a polar cell");
  const C2Estimate lhs = c2_capacity(shape.scaled(k.alpha(idx.n)), options);
  LoginCheck out;
  out.lhs = lhs.value;
  const double l = -idx.n * std::log(2.0) - c.log_value;
  if (!(l > 0.0)) throw CapacityError("cell capacity is not below 2^-n");
  out.rhs = 1.0 / l;
  return out;
}

double green_capacity_bound_log(double log_r) {
  if (!(log_r < 0.0)) throw CapacityError("Green capacity bound needs r < 1");
  return -1.0 / log_r;
}

double green_capacity_disc_bound(double r) {
  if (!(r > 0.0 && r < 1.0)) throw CapacityError("Green capacity bound needs 0 < r < 1");
  return green_capacity_bound_log(std::log(r));
}

nlohmann::json RemarkCertificate::to_json() const {
  nlohmann::json j = {{"issued", issued}, {"trivial", trivial}, {"budget", budget},
                      {"threshold", threshold}, {"reason", reason}};
  j["clearance"] = std::isfinite(clearance) ? nlohmann::json(clearance) : nlohmann::json(nullptr);
  return j;
}

RemarkCertificate remark_certificate(const Configuration& c) {
  RemarkCertificate cert;
  cert.threshold = 1.0 / (2.0 * std::log(4.0));
  if (c.empty()) {
    cert.issued = true;
    cert.trivial = true;
    cert.reason = "empty configuration";
    return cert;
  }
  const ValidationReport v = validate_configuration(c);
  if (!v.valid) {
    cert.reason = "invalid configuration";
    return cert;
  }
  KahanSum budget;
  double clearance = kInf;
  for (const Disc& d : c.discs) {
    if (!(d.log_radius < 0.0)) {
      cert.budget = kInf;
      cert.reason = "radius >= 1";
      return cert;
    }
    budget += green_capacity_bound_log(d.log_radius);
    clearance = std::min(clearance, d.center.norm() - d.radius - 0.5);
  }
  cert.budget = budget.value();
  cert.clearance = clearance;
  if (!(clearance > 0.0)) {
    cert.reason = "a disc meets |x| <= 1/2";
  } else if (cert.budget > cert.threshold) {
    cert.reason = "budget exceeds 1/(2 log 4)";
  } else {
    cert.issued = true;
    cert.reason = "avoidable: hitting probability at 0 is at most 1/2";
  }
  return cert;
}

RemarkCertificate remark_certificate(const RingConfiguration& c) {
  RemarkCertificate cert;
  cert.threshold = 1.0 / (2.0 * std::log(4.0));
  if (c.empty()) {
    cert.issued = true;
    cert.trivial = true;
    cert.reason = "empty configuration";
    return cert;
  }
  KahanSum budget;
  double clearance = kInf;
  for (const Ring& ring : c.rings()) {
    if (ring.active() == 0) continue;
    if (!(ring.log_radius < 0.0)) {
      cert.budget = kInf;
      cert.reason = "radius >= 1";
      return cert;
    }
    budget += static_cast<double>(ring.active()) * green_capacity_bound_log(ring.log_radius);
    clearance = std::min(clearance, ring.rho() - ring.radius() - 0.5);
  }
  cert.budget = budget.value();
  cert.clearance = clearance;
  if (!(clearance > 0.0)) {
    cert.reason = "a disc meets |x| <= 1/2";
  } else if (cert.budget > cert.threshold) {
    cert.reason = "budget exceeds 1/(2 log 4)";
  } else {
    cert.issued = true;
    cert.reason = "avoidable: hitting probability at 0 is at most 1/2";
  }
  return cert;
}

std::string cells_csv(const std::vector<CellRecord>& records) {
  std::ostringstream out;
  out << "n,m,multiplicity,log_capacity,capacity,method,c2,essen_weight,quasiadditivity_ratio\n";
  for (const CellRecord& r : records) {
    const EssenCell& c = r.cell;
    out << c.index.n << ',' << c.index.m << ',' << c.multiplicity << ',' << format_real(c.capacity.log_value)
        << ',' << format_real(c.capacity.value) << ',' << to_string(c.capacity.method) << ','
        << format_real(r.c2) << ',' << format_real(c.weight) << ',' << format_real(r.quasiadditivity) << '\n';
  }
  return out.str();
}

}  // namespace champagne
