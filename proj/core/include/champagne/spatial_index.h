#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "champagne/configuration.h"
#include "champagne/geometry.h"

namespace champagne {

using DiscId = std::uint64_t;

/// Result of a nearest-obstacle query.
struct NearestObstacle {
  bool found = false;
  DiscId id = 0;
  double gap = kInf;              // max(0, |p - x_k| - r_k)
  double center_distance = kInf;  // |p - x_k|
  Point center;
  double radius = 0.0;
  double log_radius = -kInf;
  // Radius of the largest ball about x_k that stays inside the unit disc and
  // meets no other obstacle (a lower bound is acceptable).
  double free_radius = 0.0;
};

/// Read-only obstacle geometry as seen by the walker.
class ObstacleField {
 public:
  virtual ~ObstacleField() = default;
  // Nearest obstacle by gap; found == false when no obstacle has
  // gap <= max_gap.
  virtual NearestObstacle nearest(Point p, double max_gap = kInf) const = 0;
  virtual std::uint64_t obstacle_count() const = 0;
};

/// Bucket grid over an explicit Configuration keyed by Whitney cell, plus a
/// coarse bucket for discs meeting |x| <= 1/2. Each disc is stored in every
/// closed cell it meets, so any disc within distance R of a query point sits
/// in a bucket meeting the query ball. Immutable after construction.
class SpatialIndex final : public ObstacleField {
 public:
  explicit SpatialIndex(const Configuration& config);

  NearestObstacle nearest(Point p, double max_gap = kInf) const override;
  std::uint64_t obstacle_count() const override { return discs_.size(); }

  // Nearest center other than `exclude`: returns (|p - x_j|, j), or
  // (inf, nullopt) for an index without other discs.
  std::pair<double, std::optional<std::size_t>> nearest_center(
      Point p, std::optional<std::size_t> exclude = std::nullopt) const;

  // Calls f(id) for every disc whose closed disc is within distance
  // `radius` of p (gap <= radius). Each disc is reported once.
  void for_each_within(Point p, double radius, const std::function<void(std::size_t)>& f) const;

  const std::vector<Disc>& discs() const { return discs_; }
  double free_radius(std::size_t id) const { return free_radius_[id]; }
  int deepest_generation() const { return deepest_; }

 private:
  struct Bucket {
    std::int64_t m;
    std::uint32_t begin;
    std::uint32_t end;
  };
  struct GenerationBuckets {
    std::vector<Bucket> buckets;  // sorted by m
  };

  template <class Visit>
  void scan_ball(Point p, double radius, Visit&& visit) const;

  template <bool kCenterMetric>
  NearestObstacle nearest_impl(Point p, double max_value, std::optional<std::size_t> exclude) const;

  std::vector<Disc> discs_;
  std::vector<double> free_radius_;
  std::vector<GenerationBuckets> generations_;  // indexed by n
  std::vector<std::uint32_t> bucket_ids_;
  std::vector<std::uint32_t> coarse_;
  int deepest_ = 0;
};

struct DistanceResult {
  double distance = kInf;
  std::optional<std::size_t> nearest;
};

// min_k max(0, |p - x_k| - r_k) together with the minimizing disc.
DistanceResult distance_to_obstacles(Point p, const SpatialIndex& index);

}  // namespace champagne
