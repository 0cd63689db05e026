#include "champagne/configuration.h"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "champagne/spatial_index.h"

namespace champagne {
namespace {

struct CanonicalKey {
  int generation;
  std::int64_t m;
  double delta;
  double theta;
  double log_radius;
};

CanonicalKey key_of(const Disc& d) {
  const double delta = d.boundary_gap();
  CanonicalKey k{INT_MAX, 0, delta, d.center.angle(), d.log_radius};
  if (delta > 0.0) {
    k.generation = generation_of(delta);
    if (k.generation >= 1 && k.generation <= kMaxGeneration) {
      k.m = cell_containing(d.center).m;
    }
  }
  return k;
}

bool key_less(const CanonicalKey& a, const CanonicalKey& b) {
  if (a.generation != b.generation) return a.generation < b.generation;
  if (a.m != b.m) return a.m < b.m;
  // 1 - |x| descending within a cell: the innermost row comes first. Gaps
  // recomputed from rotated centers differ in the last bits, so rows are
  // compared with a relative tolerance.
  if (std::abs(a.delta - b.delta) > 1e-12 * std::max(a.delta, b.delta)) return a.delta > b.delta;
  return std::tie(a.theta, a.log_radius) < std::tie(b.theta, b.log_radius);
}

}  // namespace

bool canonical_less(const Disc& a, const Disc& b) { return key_less(key_of(a), key_of(b)); }

Configuration Configuration::from_discs(std::vector<Disc> discs, nlohmann::json provenance) {
  std::vector<CanonicalKey> keys;
  keys.reserve(discs.size());
  for (const Disc& d : discs) keys.push_back(key_of(d));
  std::vector<std::size_t> order(discs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return key_less(keys[i], keys[j]); });

  Configuration c;
  c.discs.reserve(discs.size());
  for (std::size_t i : order) {
    c.discs.push_back(discs[i]);
    const double delta = discs[i].boundary_gap();
    if (delta > 0.0) {
      c.ratio_sup = std::max(c.ratio_sup, std::exp(discs[i].log_radius - std::log(delta)));
      c.n_max = std::max(c.n_max, generation_of(delta));
    }
  }
  c.provenance = std::move(provenance);
  return c;
}

std::vector<std::string> ValidationReport::messages() const {
  std::vector<std::string> out;
  for (auto [j, k] : overlaps) {
    std::ostringstream os;
    os << "discs " << j << " and " << k << " are not disjoint";
    out.push_back(os.str());
  }
  if (overlap_count > overlaps.size()) {
    out.push_back(std::to_string(overlap_count - overlaps.size()) + " further overlapping pairs");
  }
  if (ratio_violation) {
    std::ostringstream os;
    os.precision(17);
    os << "sup r_k/(1-|x_k|) = " << ratio_sup << " is not < 1";
    out.push_back(os.str());
  }
  if (ratio_mismatch) out.push_back("stored ratio_sup does not match the discs");
  for (std::size_t k : covering_origin) out.push_back("disc " + std::to_string(k) + " covers the origin");
  for (std::size_t k : outside_unit_disc) {
    out.push_back("disc " + std::to_string(k) + " is not inside the unit disc");
  }
  for (std::size_t k : bad_radius) out.push_back("disc " + std::to_string(k) + " has an invalid radius");
  return out;
}

ValidationReport validate_configuration(const Configuration& c, const ValidationOptions& options) {
  ValidationReport report;
  std::vector<Disc> inside;
  std::vector<std::size_t> inside_ids;
  double ratio = 0.0;
  for (std::size_t k = 0; k < c.discs.size(); ++k) {
    const Disc& d = c.discs[k];
    if (!std::isfinite(d.log_radius) || !(d.radius >= 0.0)) {
      report.bad_radius.push_back(k);
      continue;
    }
    const double norm = d.center.norm();
    if (!(norm + d.radius < 1.0)) {
      report.outside_unit_disc.push_back(k);
      continue;
    }
    if (norm <= d.radius) report.covering_origin.push_back(k);
    ratio = std::max(ratio, std::exp(d.log_radius - std::log(1.0 - norm)));
    inside.push_back(d);
    inside_ids.push_back(k);
  }
  report.ratio_sup = ratio;
  report.ratio_violation = ratio >= 1.0;
  report.ratio_mismatch = std::abs(ratio - c.ratio_sup) > 1e-12 * std::max(1.0, ratio);

  Configuration sub;
  sub.discs = inside;  // keep the given order so ids map back through inside_ids
  const SpatialIndex index(sub);
  for (std::size_t k = 0; k < inside.size(); ++k) {
    index.for_each_within(inside[k].center, inside[k].radius, [&](std::size_t j) {
      if (j >= k) return;
      ++report.overlap_count;
      if (report.overlaps.size() < options.max_reported_overlaps) {
        report.overlaps.emplace_back(inside_ids[j], inside_ids[k]);
      }
    });
  }
  std::sort(report.overlaps.begin(), report.overlaps.end());

  report.valid = report.overlap_count == 0 && !report.ratio_violation && !report.ratio_mismatch &&
                 report.outside_unit_disc.empty() && report.bad_radius.empty() &&
                 (!options.require_origin_free || report.covering_origin.empty());
  return report;
}

}  // namespace champagne
