#include "champagne/spatial_index.h"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace champagne {

SpatialIndex::SpatialIndex(const Configuration& config) : discs_(config.discs) {
  if (discs_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("SpatialIndex: too many discs for an explicit index");
  }
  std::vector<std::tuple<int, std::int64_t, std::uint32_t>> entries;
  for (std::size_t k = 0; k < discs_.size(); ++k) {
    const Disc& d = discs_[k];
    const double norm = d.center.norm();
    if (!(norm + d.radius < 1.0)) {
      throw std::invalid_argument("SpatialIndex: disc " + std::to_string(k) +
                                  " is not inside the unit disc");
    }
    const auto id = static_cast<std::uint32_t>(k);
    if (norm - d.radius <= 0.5) coarse_.push_back(id);
    for (const WhitneyIndex& idx : cells_intersecting_disc(d)) {
      entries.emplace_back(idx.n, idx.m, id);
      deepest_ = std::max(deepest_, idx.n);
    }
  }
  std::sort(entries.begin(), entries.end());
  generations_.resize(static_cast<std::size_t>(deepest_) + 1);
  bucket_ids_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size();) {
    const auto [n, m, id0] = entries[i];
    const auto begin = static_cast<std::uint32_t>(bucket_ids_.size());
    while (i < entries.size() && std::get<0>(entries[i]) == n && std::get<1>(entries[i]) == m) {
      bucket_ids_.push_back(std::get<2>(entries[i]));
      ++i;
    }
    generations_[static_cast<std::size_t>(n)].buckets.push_back(
        Bucket{m, begin, static_cast<std::uint32_t>(bucket_ids_.size())});
  }

  free_radius_.resize(discs_.size());
  for (std::size_t k = 0; k < discs_.size(); ++k) {
    const double delta = discs_[k].boundary_gap();
    const NearestObstacle other = nearest_impl<false>(discs_[k].center, delta, k);
    free_radius_[k] = other.found ? std::min(delta, other.gap) : delta;
  }
}

template <class Visit>
void SpatialIndex::scan_ball(Point p, double radius, Visit&& visit) const {
  if (p.norm() - radius <= 0.5) {
    for (std::uint32_t id : coarse_) visit(id);
  }
  if (deepest_ == 0) return;
  const GenerationRange gens = generations_meeting_ball(p, radius, deepest_);
  for (int n = gens.first; n <= gens.last; ++n) {
    const auto& buckets = generations_[static_cast<std::size_t>(n)].buckets;
    if (buckets.empty()) continue;
    auto visit_range = [&](auto first, auto last) {
      for (auto it = first; it != last; ++it) {
        for (std::uint32_t i = it->begin; i < it->end; ++i) visit(bucket_ids_[i]);
      }
    };
    const AngularRange range = angular_range_for_ball(p, radius, n);
    auto by_m = [](const Bucket& b, std::int64_t m) { return b.m < m; };
    if (range.all) {
      visit_range(buckets.begin(), buckets.end());
    } else if (range.lo <= range.hi) {
      auto first = std::lower_bound(buckets.begin(), buckets.end(), range.lo, by_m);
      auto last = std::lower_bound(first, buckets.end(), range.hi + 1, by_m);
      visit_range(first, last);
    } else {
      visit_range(buckets.begin(), std::lower_bound(buckets.begin(), buckets.end(), range.hi + 1, by_m));
      visit_range(std::lower_bound(buckets.begin(), buckets.end(), range.lo, by_m), buckets.end());
    }
  }
}

template <bool kCenterMetric>
NearestObstacle SpatialIndex::nearest_impl(Point p, double max_value,
                                           std::optional<std::size_t> exclude) const {
  NearestObstacle best;
  if (discs_.empty()) return best;
  const double delta = std::max(1.0 - p.norm(), 0.0);
  double radius = 0.25 * std::max(delta, std::ldexp(1.0, -deepest_ - 1));
  radius = std::min(radius, 1.0 / 16.0);
  for (;;) {
    double best_value = kInf;
    std::size_t best_id = 0;
    scan_ball(p, radius, [&](std::uint32_t id) {
      if (exclude && *exclude == id) return;
      const Disc& d = discs_[id];
      const double dist = distance(p, d.center);
      const double value = kCenterMetric ? dist : std::max(0.0, dist - d.radius);
      if (value < best_value || (value == best_value && id < best_id)) {
        best_value = value;
        best_id = id;
      }
    });
    const bool settled = best_value <= radius || radius >= 2.0;
    if (settled || radius >= max_value) {
      if (best_value <= max_value && std::isfinite(best_value)) {
        const Disc& d = discs_[best_id];
        best.found = true;
        best.id = best_id;
        best.center = d.center;
        best.radius = d.radius;
        best.log_radius = d.log_radius;
        best.center_distance = distance(p, d.center);
        best.gap = std::max(0.0, best.center_distance - d.radius);
        best.free_radius = free_radius_.empty() ? 0.0 : free_radius_[best_id];
      }
      // A value in (radius, max_value] found at radius >= max_value is exact
      // only when settled; otherwise nothing within max_value exists.
      if (!settled && best.found && best_value > radius) best = NearestObstacle{};
      return best;
    }
    radius = std::min(2.0 * radius, 2.0);
  }
}

NearestObstacle SpatialIndex::nearest(Point p, double max_gap) const {
  return nearest_impl<false>(p, max_gap, std::nullopt);
}

std::pair<double, std::optional<std::size_t>> SpatialIndex::nearest_center(
    Point p, std::optional<std::size_t> exclude) const {
  const NearestObstacle n = nearest_impl<true>(p, kInf, exclude);
  if (!n.found) return {kInf, std::nullopt};
  return {n.center_distance, static_cast<std::size_t>(n.id)};
}

void SpatialIndex::for_each_within(Point p, double radius,
                                   const std::function<void(std::size_t)>& f) const {
  std::vector<std::uint32_t> hits;
  scan_ball(p, radius, [&](std::uint32_t id) {
    const Disc& d = discs_[id];
    if (distance(p, d.center) - d.radius <= radius) hits.push_back(id);
  });
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  for (std::uint32_t id : hits) f(id);
}

DistanceResult distance_to_obstacles(Point p, const SpatialIndex& index) {
  const NearestObstacle n = index.nearest(p);
  if (!n.found) return {};
  return {n.gap, static_cast<std::size_t>(n.id)};
}

}  // namespace champagne
