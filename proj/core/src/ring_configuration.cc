#include "champagne/ring_configuration.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace champagne {
namespace {

// Distance between points at radii a, b separated by angle dtheta.
double polar_distance(double a, double b, double dtheta) {
  const double s = std::sin(0.5 * dtheta);
  return std::sqrt((a - b) * (a - b) + 4.0 * a * b * s * s);
}

// x * a + y * b = gcd(a, b).
std::int64_t extended_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = 1;
    y = 0;
    return a;
  }
  std::int64_t x1 = 0;
  std::int64_t y1 = 0;
  const std::int64_t g = extended_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

std::int64_t floor_mod(__int128 v, std::int64_t n) {
  __int128 r = v % n;
  if (r < 0) r += n;
  return static_cast<std::int64_t>(r);
}

// Active indices of `ring` that can be angularly closest to angle psi.
template <class F>
void for_each_angular_candidate(const Ring& ring, double psi, F&& f) {
  if (ring.active() <= 0) return;
  const double u = psi / kTwoPi * static_cast<double>(ring.count) - ring.phase;
  const auto t0 = static_cast<std::int64_t>(std::floor(u));
  for (std::int64_t t : {t0, t0 + 1}) {
    const std::int64_t tm = floor_mod(t, ring.count);
    if (ring.is_active(tm)) f(tm);
  }
  if (ring.skip > 0) {
    f(ring.skip);
    f(ring.count - 1);
  }
}

double angular_gap(const Ring& ring, std::int64_t t, double psi) {
  return std::abs(std::remainder(ring.angle(t) - psi, kTwoPi));
}

}  // namespace

double Ring::angle(std::int64_t t) const {
  return kTwoPi * (static_cast<double>(t) + phase) / static_cast<double>(count);
}

Point Ring::center(std::int64_t t) const { return from_polar(rho(), angle(t)); }

Disc Ring::disc(std::int64_t t) const { return Disc{center(t), radius(), log_radius}; }

RingPairDistance ring_pair_min_distance(const Ring& a, const Ring& b, bool same_ring) {
  RingPairDistance out;
  if (same_ring) {
    if (a.active() < 2) return out;
    out.distance = 2.0 * a.rho() * std::sin(kPi / static_cast<double>(a.count));
    out.ta = a.skip;
    out.tb = a.skip + 1;
    return out;
  }
  if (a.active() <= 0 || b.active() <= 0) return out;

  if (a.skip == 0 && b.skip == 0) {
    // Angular differences are 2π (tA NB - tB NA + w) / (NA NB) and
    // tA NB - tB NA runs over all multiples of g = gcd(NA, NB).
    const std::int64_t na = a.count;
    const std::int64_t nb = b.count;
    std::int64_t x = 0;
    std::int64_t y = 0;
    const std::int64_t g = extended_gcd(nb, na, x, y);  // x nb + y na = g
    const double w = a.phase * static_cast<double>(nb) - b.phase * static_cast<double>(na);
    const double k = std::round(-w / static_cast<double>(g));
    const double num = static_cast<double>(g) * k + w;
    const double dtheta = kTwoPi * num / (static_cast<double>(na) * static_cast<double>(nb));
    const auto ki = static_cast<__int128>(k);
    out.ta = floor_mod(static_cast<__int128>(x) * ki, na);
    out.tb = floor_mod(-static_cast<__int128>(y) * ki, nb);
    out.distance = polar_distance(a.rho(), b.rho(), dtheta);
    return out;
  }

  const bool sweep_a = a.active() <= b.active();
  const Ring& s = sweep_a ? a : b;
  const Ring& o = sweep_a ? b : a;
  for (std::int64_t t = s.skip; t < s.count; ++t) {
    const double psi = s.angle(t);
    for_each_angular_candidate(o, psi, [&](std::int64_t u) {
      const double d = polar_distance(s.rho(), o.rho(), angular_gap(o, u, psi));
      if (d < out.distance) {
        out.distance = d;
        out.ta = sweep_a ? t : u;
        out.tb = sweep_a ? u : t;
      }
    });
  }
  return out;
}

RingConfiguration::RingConfiguration(std::vector<Ring> rings, std::uint64_t dropped,
                                     nlohmann::json provenance)
    : rings_(std::move(rings)), provenance_(std::move(provenance)) {
  gen_base_.resize(rings_.size());
  std::size_t i = 0;
  while (i < rings_.size()) {
    const int n = rings_[i].generation;
    const int p = rings_[i].per_cell;
    if (n < 1 || n > kMaxGeneration || p < 1) {
      throw std::invalid_argument("RingConfiguration: bad ring generation or per_cell");
    }
    if (i > 0 && rings_[i - 1].generation >= n) {
      throw std::invalid_argument("RingConfiguration: rings must be sorted by generation");
    }
    std::size_t j = i;
    while (j < rings_.size() && rings_[j].generation == n) {
      const Ring& r = rings_[j];
      if (r.per_cell != p || r.row != static_cast<int>(j - i) || r.count != cells_in_generation(n) * p) {
        throw std::invalid_argument("RingConfiguration: generation " + std::to_string(n) +
                                    " rows are inconsistent");
      }
      gen_base_[j] = total_;
      ++j;
    }
    if (j - i != static_cast<std::size_t>(p)) {
      throw std::invalid_argument("RingConfiguration: generation " + std::to_string(n) +
                                  " must hold per_cell rows");
    }
    total_ += static_cast<std::uint64_t>(cells_in_generation(n)) * static_cast<std::uint64_t>(p) *
              static_cast<std::uint64_t>(p);
    i = j;
  }
  dropped_ = std::min(dropped, total_);

  for (std::size_t k = 0; k < rings_.size(); ++k) {
    Ring& r = rings_[k];
    const auto p = static_cast<std::uint64_t>(r.per_cell);
    const std::uint64_t gen_total = static_cast<std::uint64_t>(r.count) * p;
    const std::uint64_t local = std::min(gen_total, dropped_ > gen_base_[k] ? dropped_ - gen_base_[k] : 0);
    const std::uint64_t m0 = local / (p * p);
    const std::uint64_t rem = local % (p * p);
    const std::uint64_t row0 = rem / p;
    const std::uint64_t j0 = rem % p;
    const auto row = static_cast<std::uint64_t>(r.row);
    std::uint64_t skip = m0 * p;
    if (row < row0) {
      skip += p;
    } else if (row == row0) {
      skip += j0;
    }
    r.skip = static_cast<std::int64_t>(skip);
    if (r.active() > 0) {
      ratio_sup_ = std::max(ratio_sup_, std::exp(r.log_radius - std::log(r.delta)));
      n_max_ = std::max(n_max_, r.generation);
    }
  }
}

std::uint64_t RingConfiguration::full_index(std::size_t ring, std::int64_t t) const {
  const Ring& r = rings_[ring];
  const auto p = static_cast<std::uint64_t>(r.per_cell);
  const auto m = static_cast<std::uint64_t>(t) / p;
  const auto j = static_cast<std::uint64_t>(t) % p;
  return gen_base_[ring] + m * p * p + static_cast<std::uint64_t>(r.row) * p + j;
}

DiscId RingConfiguration::id(std::size_t ring, std::int64_t t) const {
  if (ring >= rings_.size() || !rings_[ring].is_active(t)) {
    throw std::out_of_range("RingConfiguration::id: inactive ring index");
  }
  return full_index(ring, t) - dropped_;
}

std::pair<std::size_t, std::int64_t> RingConfiguration::locate(DiscId id) const {
  if (id >= size()) throw std::out_of_range("RingConfiguration::locate: id out of range");
  const std::uint64_t full = id + dropped_;
  auto it = std::upper_bound(gen_base_.begin(), gen_base_.end(), full);
  std::size_t k = static_cast<std::size_t>(it - gen_base_.begin()) - 1;
  k -= static_cast<std::size_t>(rings_[k].row);  // first row of the generation
  const auto p = static_cast<std::uint64_t>(rings_[k].per_cell);
  const std::uint64_t local = full - gen_base_[k];
  const std::uint64_t m = local / (p * p);
  const std::uint64_t rem = local % (p * p);
  return {k + rem / p, static_cast<std::int64_t>(m * p + rem % p)};
}

Disc RingConfiguration::disc(DiscId id) const {
  const auto [k, t] = locate(id);
  return rings_[k].disc(t);
}

RingConfiguration RingConfiguration::truncated(int n_max, std::uint64_t drop_first) const {
  std::vector<Ring> kept;
  for (const Ring& r : rings_) {
    if (r.generation <= n_max) kept.push_back(r);
  }
  nlohmann::json prov = provenance_;
  prov["truncate"] = {{"n_max", n_max}, {"drop_first", drop_first}};
  return RingConfiguration(std::move(kept), dropped_ + drop_first, std::move(prov));
}

RingConfiguration RingConfiguration::shrunk(double factor) const {
  if (!(factor > 0.0 && factor <= 1.0)) throw std::invalid_argument("shrink factor must lie in (0, 1]");
  std::vector<Ring> rings = rings_;
  const double shift = std::log(factor);
  for (Ring& r : rings) r.log_radius += shift;
  nlohmann::json prov = provenance_;
  prov["shrink"] = factor;
  return RingConfiguration(std::move(rings), dropped_, std::move(prov));
}

Configuration RingConfiguration::materialize(std::uint64_t max_discs) const {
  if (size() > max_discs) {
    throw std::length_error("configuration has " + std::to_string(size()) +
                            " discs, above the explicit limit " + std::to_string(max_discs));
  }
  std::vector<Disc> discs;
  discs.reserve(size());
  std::size_t i = 0;
  while (i < rings_.size()) {
    const int p = rings_[i].per_cell;
    const std::int64_t cells = cells_in_generation(rings_[i].generation);
    for (std::int64_t m = 0; m < cells; ++m) {
      for (int row = 0; row < p; ++row) {
        const Ring& r = rings_[i + static_cast<std::size_t>(row)];
        for (int j = 0; j < p; ++j) {
          const std::int64_t t = m * p + j;
          if (r.is_active(t)) discs.push_back(r.disc(t));
        }
      }
    }
    i += static_cast<std::size_t>(p);
  }
  Configuration c;
  c.discs = std::move(discs);
  c.ratio_sup = 0.0;
  for (const Disc& d : c.discs) {
    c.ratio_sup = std::max(c.ratio_sup, std::exp(d.log_radius - std::log(d.boundary_gap())));
  }
  c.n_max = n_max_;
  c.provenance = provenance_;
  return c;
}

std::vector<std::pair<int, std::uint64_t>> RingConfiguration::generation_counts() const {
  std::vector<std::pair<int, std::uint64_t>> out;
  for (const Ring& r : rings_) {
    if (out.empty() || out.back().first != r.generation) out.emplace_back(r.generation, 0);
    out.back().second += static_cast<std::uint64_t>(r.active());
  }
  return out;
}

RingOverlapReport check_ring_disjointness(const RingConfiguration& c) {
  RingOverlapReport report;
  const auto& rings = c.rings();
  std::vector<std::size_t> order(rings.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rings[a].rho() < rings[b].rho(); });
  double rmax = 0.0;
  for (const Ring& r : rings) {
    if (r.active() > 0) rmax = std::max(rmax, r.radius());
  }
  for (std::size_t ia = 0; ia < order.size(); ++ia) {
    const Ring& a = rings[order[ia]];
    if (a.active() <= 0) continue;
    for (std::size_t ib = ia; ib < order.size(); ++ib) {
      const Ring& b = rings[order[ib]];
      if (b.active() <= 0) continue;
      if (b.rho() - a.rho() - 2.0 * rmax > report.min_gap) break;
      const RingPairDistance d = ring_pair_min_distance(a, b, ia == ib);
      if (d.ta < 0) continue;
      const double gap = d.distance - a.radius() - b.radius();
      if (gap < report.min_gap) {
        report.min_gap = gap;
        report.first = c.id(order[ia], d.ta);
        report.second = c.id(order[ib], d.tb);
      }
    }
  }
  if (report.first > report.second) std::swap(report.first, report.second);
  report.disjoint = !(report.min_gap <= 0.0);
  return report;
}

RingField::RingField(const RingConfiguration& config) : config_(config) {
  const auto& rings = config_.rings();
  for (std::size_t k = 0; k < rings.size(); ++k) {
    if (rings[k].active() <= 0) continue;
    by_rho_.push_back(k);
    max_radius_ = std::max(max_radius_, rings[k].radius());
  }
  std::sort(by_rho_.begin(), by_rho_.end(), [&](std::size_t a, std::size_t b) {
    return rings[a].rho() < rings[b].rho() || (rings[a].rho() == rings[b].rho() && a < b);
  });
  for (std::size_t k : by_rho_) rho_sorted_.push_back(rings[k].rho());
}

RingField::Hit RingField::nearest_impl(
    Point p, double max_gap, std::optional<std::pair<std::size_t, std::int64_t>> exclude) const {
  Hit best;
  if (by_rho_.empty()) return best;
  const auto& rings = config_.rings();
  const double rp = p.norm();
  const double psi = p.angle();
  auto visit = [&](std::size_t k) {
    const Ring& r = rings[k];
    for_each_angular_candidate(r, psi, [&](std::int64_t t) {
      if (exclude && exclude->first == k && exclude->second == t) {
        return;
      }
      const double gap = std::max(0.0, polar_distance(rp, r.rho(), angular_gap(r, t, psi)) - r.radius());
      if (gap < best.gap || (gap == best.gap && (k < best.ring || (k == best.ring && t < best.t)))) {
        best = Hit{gap, k, t};
      }
    });
    // A ring of one active point next to the excluded point has no other
    // candidate; the sweep below covers the rest of the ring.
    if (exclude && exclude->first == k && r.active() > 1) {
      for (std::int64_t t : {exclude->second - 1, exclude->second + 1}) {
        const std::int64_t tm = floor_mod(t, r.count);
        if (!r.is_active(tm) || tm == exclude->second) continue;
        const double gap = std::max(0.0, polar_distance(rp, r.rho(), angular_gap(r, tm, psi)) - r.radius());
        if (gap < best.gap) best = Hit{gap, k, tm};
      }
    }
  };
  const auto pos = static_cast<std::ptrdiff_t>(
      std::lower_bound(rho_sorted_.begin(), rho_sorted_.end(), rp) - rho_sorted_.begin());
  std::ptrdiff_t lo = pos - 1;
  auto hi = pos;
  const auto size = static_cast<std::ptrdiff_t>(by_rho_.size());
  for (;;) {
    const double bound = std::min(best.gap, max_gap);
    const double dlo = lo >= 0 ? rp - rho_sorted_[static_cast<std::size_t>(lo)] - max_radius_ : kInf;
    const double dhi = hi < size ? rho_sorted_[static_cast<std::size_t>(hi)] - rp - max_radius_ : kInf;
    if (std::min(dlo, dhi) > bound || (lo < 0 && hi >= size)) break;
    if (dlo <= dhi) {
      visit(by_rho_[static_cast<std::size_t>(lo--)]);
    } else {
      visit(by_rho_[static_cast<std::size_t>(hi++)]);
    }
  }
  return best;
}

NearestObstacle RingField::nearest(Point p, double max_gap) const {
  NearestObstacle out;
  const Hit hit = nearest_impl(p, max_gap, std::nullopt);
  if (hit.t < 0 || hit.gap > max_gap) return out;
  const Ring& r = config_.rings()[hit.ring];
  out.found = true;
  out.id = config_.id(hit.ring, hit.t);
  out.center = r.center(hit.t);
  out.radius = r.radius();
  out.log_radius = r.log_radius;
  out.center_distance = polar_distance(p.norm(), r.rho(), angular_gap(r, hit.t, p.angle()));
  out.gap = hit.gap;
  const Hit other = nearest_impl(out.center, r.delta, std::make_pair(hit.ring, hit.t));
  out.free_radius = std::min(r.delta, other.gap);
  return out;
}

}  // namespace champagne
