#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "champagne/configuration.h"
#include "champagne/geometry.h"
#include "champagne/spatial_index.h"

namespace champagne {

/// N equally spaced discs of one radius on the circle |x| = 1 - delta, at
/// angles 2π(t + phase)/N for t in [skip, N). Grid generators place their
/// centers on such rings: one ring per subsquare row of a generation.
struct Ring {
  int generation = 1;
  int row = 0;                // subsquare row inside the cell, 0 = innermost
  int per_cell = 1;           // p: subsquares per cell side
  std::int64_t count = 0;     // N = 2^(n+4) * p
  double phase = 0.5;
  double delta = 0.0;         // 1 - |x|
  double log_radius = -kInf;  // shared log r
  std::int64_t skip = 0;      // leading indices removed by drop_first

  double rho() const { return 1.0 - delta; }
  double radius() const { return std::exp(log_radius); }
  double angle(std::int64_t t) const;
  Point center(std::int64_t t) const;
  Disc disc(std::int64_t t) const;
  std::int64_t active() const { return count - skip; }
  bool is_active(std::int64_t t) const { return t >= skip && t < count; }
  // t = m*p + j; the cell index m and column j of index t.
  std::int64_t cell_of(std::int64_t t) const { return t / per_cell; }
};

/// Closest pair between two rings (or within one ring when a == b).
struct RingPairDistance {
  double distance = kInf;
  std::int64_t ta = -1;
  std::int64_t tb = -1;
};

// Exact minimum center distance over active points. Uses the gcd structure
// of the two angular lattices; falls back to a sweep when skips are present.
RingPairDistance ring_pair_min_distance(const Ring& a, const Ring& b, bool same_ring);

/// Ring-structured configuration. Disc ids follow canonical order: within a
/// generation the full index is m*p^2 + row*p + j (t = m*p + j), and
/// `dropped` leading discs are removed from the whole sequence.
class RingConfiguration {
 public:
  RingConfiguration() = default;
  // rings must be sorted by (generation, row) with a constant per_cell per
  // generation; skips must describe a canonical prefix.
  RingConfiguration(std::vector<Ring> rings, std::uint64_t dropped, nlohmann::json provenance);

  const std::vector<Ring>& rings() const { return rings_; }
  std::uint64_t size() const { return total_ - dropped_; }
  bool empty() const { return size() == 0; }
  std::uint64_t dropped() const { return dropped_; }
  double ratio_sup() const { return ratio_sup_; }
  int n_max() const { return n_max_; }
  const nlohmann::json& provenance() const { return provenance_; }
  nlohmann::json& provenance() { return provenance_; }

  // Canonical id of (ring, t) in the materialized configuration.
  DiscId id(std::size_t ring, std::int64_t t) const;
  std::pair<std::size_t, std::int64_t> locate(DiscId id) const;
  Disc disc(DiscId id) const;

  // Discs of generation <= n_max; the first `drop_first` further discs
  // removed in canonical order.
  RingConfiguration truncated(int n_max, std::uint64_t drop_first) const;
  RingConfiguration shrunk(double factor) const;

  // Explicit list; throws std::length_error above max_discs.
  Configuration materialize(std::uint64_t max_discs = 5'000'000) const;

  // Disc count per generation present.
  std::vector<std::pair<int, std::uint64_t>> generation_counts() const;

 private:
  std::uint64_t full_index(std::size_t ring, std::int64_t t) const;

  std::vector<Ring> rings_;
  std::vector<std::uint64_t> gen_base_;  // full index of the first disc of each ring's generation
  std::uint64_t total_ = 0;
  std::uint64_t dropped_ = 0;
  double ratio_sup_ = 0.0;
  int n_max_ = 0;
  nlohmann::json provenance_ = nlohmann::json::object();
};

/// Minimum gap |x_j - x_k| - r_j - r_k over all pairs, with the pair.
struct RingOverlapReport {
  bool disjoint = true;
  double min_gap = kInf;
  DiscId first = 0;
  DiscId second = 0;
};
RingOverlapReport check_ring_disjointness(const RingConfiguration& c);

/// Nearest-obstacle queries straight from the ring structure.
class RingField final : public ObstacleField {
 public:
  explicit RingField(const RingConfiguration& config);

  NearestObstacle nearest(Point p, double max_gap = kInf) const override;
  std::uint64_t obstacle_count() const override { return config_.size(); }

 private:
  struct Hit {
    double gap = kInf;
    std::size_t ring = 0;
    std::int64_t t = -1;
  };
  Hit nearest_impl(Point p, double max_gap, std::optional<std::pair<std::size_t, std::int64_t>> exclude) const;

  RingConfiguration config_;
  std::vector<std::size_t> by_rho_;  // ring indices sorted by rho
  std::vector<double> rho_sorted_;
  double max_radius_ = 0.0;
};

}  // namespace champagne
