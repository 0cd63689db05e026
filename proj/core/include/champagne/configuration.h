#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "champagne/geometry.h"

namespace champagne {

/// Finite truncation of a champagne configuration: the obstacle set
/// E = ∪ B̄(x_k, r_k) inside the unit disc, with Ω = B \ E.
///
/// Discs are kept in canonical order: generation ascending, then the angular
/// index m of the cell holding the center, then 1 - |x| descending, then
/// polar angle. "Drop the first N discs" refers to this order.
struct Configuration {
  std::vector<Disc> discs;
  double ratio_sup = 0.0;  // max r_k / (1 - |x_k|) over stored discs
  int n_max = 0;           // deepest generation holding a center
  nlohmann::json provenance = nlohmann::json::object();

  // Sorts into canonical order and fills ratio_sup / n_max.
  static Configuration from_discs(std::vector<Disc> discs,
                                  nlohmann::json provenance = nlohmann::json::object());

  std::size_t size() const { return discs.size(); }
  bool empty() const { return discs.empty(); }
};

// Canonical ordering key used by Configuration::from_discs.
bool canonical_less(const Disc& a, const Disc& b);

struct ValidationOptions {
  bool require_origin_free = true;
  std::size_t max_reported_overlaps = 1000;
};

struct ValidationReport {
  bool valid = true;
  std::vector<std::pair<std::size_t, std::size_t>> overlaps;  // (j, k), j < k
  std::size_t overlap_count = 0;
  double ratio_sup = 0.0;
  bool ratio_violation = false;  // ratio_sup >= 1
  bool ratio_mismatch = false;   // stored ratio_sup differs from recomputed
  std::vector<std::size_t> covering_origin;
  std::vector<std::size_t> outside_unit_disc;  // |x| + r >= 1
  std::vector<std::size_t> bad_radius;         // non-finite log radius

  std::vector<std::string> messages() const;
};

ValidationReport validate_configuration(const Configuration& c,
                                        const ValidationOptions& options = {});

}  // namespace champagne
