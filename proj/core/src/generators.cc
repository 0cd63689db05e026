#include "champagne/generators.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "champagne/spatial_index.h"

namespace champagne {
namespace {

std::string format_pair(const RingOverlapReport& r) {
  return "discs " + std::to_string(r.first) + " and " + std::to_string(r.second) +
         " overlap (gap " + std::to_string(r.min_gap) + ")";
}

// Number of integers u in [0, x) with u mod n >= skip.
std::int64_t active_below(std::int64_t x, std::int64_t n, std::int64_t skip) {
  return (x / n) * (n - skip) + std::max<std::int64_t>(0, x % n - skip);
}

RingConfiguration build_rings(const std::function<int(int)>& rows, const PhiSpec& phi, int n_min,
                              int n_max, nlohmann::json provenance) {
  std::vector<Ring> rings;
  for (int n = n_min; n <= n_max; ++n) {
    const int p = rows(n);
    const double width = std::ldexp(1.0, -n);
    for (int i = 0; i < p; ++i) {
      Ring r;
      r.generation = n;
      r.row = i;
      r.per_cell = p;
      r.count = cells_in_generation(n) * p;
      r.phase = 0.5;
      r.delta = width - (i + 0.5) * (0.5 * width) / p;
      r.log_radius = std::log(r.delta) + phi.log_phi_at_gap(r.delta);
      rings.push_back(r);
    }
  }
  RingConfiguration c(std::move(rings), 0, std::move(provenance));
  if (!(c.ratio_sup() < 1.0)) throw GeneratorError("generated radii violate r < 1 - |x|");
  const RingOverlapReport overlap = check_ring_disjointness(c);
  if (!overlap.disjoint) throw GeneratorError("generated " + format_pair(overlap));
  return c;
}

}  // namespace

PhiSpec PhiSpec::exp_power(double c0, double beta) {
  PhiSpec s;
  s.form = Form::kExpPower;
  s.c0 = c0;
  s.beta = beta;
  return s;
}

PhiSpec PhiSpec::constant_value(double value) {
  PhiSpec s;
  s.form = Form::kConstant;
  s.constant = value;
  return s;
}

PhiSpec PhiSpec::from_table(std::vector<std::pair<double, double>> knots) {
  PhiSpec s;
  s.form = Form::kTable;
  s.table = std::move(knots);
  return s;
}

double PhiSpec::log_phi_at_gap(double delta) const {
  switch (form) {
    case Form::kExpPower:
      return -1.0 / (c0 * std::pow(delta, beta));
    case Form::kConstant:
      return std::log(constant);
    case Form::kTable: {
      const double t = 1.0 - delta;
      if (t <= table.front().first) return std::log(table.front().second);
      if (t >= table.back().first) return std::log(table.back().second);
      auto it = std::upper_bound(table.begin(), table.end(), t,
                                 [](double v, const auto& k) { return v < k.first; });
      const auto& [t1, f1] = *it;
      const auto& [t0, f0] = *(it - 1);
      const double w = (t - t0) / (t1 - t0);
      return (1.0 - w) * std::log(f0) + w * std::log(f1);
    }
  }
  return 0.0;
}

void PhiSpec::validate() const {
  switch (form) {
    case Form::kExpPower:
      if (!(c0 > 0.0 && c0 < 1.0)) throw GeneratorError("phi: c0 must lie in (0, 1)");
      if (!(beta > 0.0)) throw GeneratorError("phi: beta must be positive");
      break;
    case Form::kConstant:
      if (!(constant > 0.0 && constant < 1.0)) throw GeneratorError("phi: constant must lie in (0, 1)");
      break;
    case Form::kTable:
      if (table.empty()) throw GeneratorError("phi: empty table");
      for (std::size_t i = 0; i < table.size(); ++i) {
        const auto [t, f] = table[i];
        if (!(t >= 0.0 && t < 1.0) || !(f > 0.0 && f < 1.0)) {
          throw GeneratorError("phi: table knots need t in [0,1) and phi in (0,1)");
        }
        if (i > 0 && (!(t > table[i - 1].first) || f > table[i - 1].second)) {
          throw GeneratorError("phi: table must have increasing t and nonincreasing phi");
        }
      }
      break;
  }
}

nlohmann::json PhiSpec::to_json() const {
  switch (form) {
    case Form::kExpPower:
      return {{"form", "exp_power"}, {"c0", c0}, {"beta", beta}};
    case Form::kConstant:
      return {{"form", "constant"}, {"value", constant}};
    case Form::kTable: {
      nlohmann::json knots = nlohmann::json::array();
      for (const auto& [t, f] : table) knots.push_back({t, f});
      return {{"form", "table"}, {"knots", knots}};
    }
  }
  return {};
}

double MSpec::measured_doubling(int samples) const {
  double worst = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    worst = std::max(worst, value(1.0 - t / 2.0) / value(1.0 - t));
  }
  return worst;
}

void GeneratorParams::validate() const {
  phi().validate();
  if (!(alpha > 1.0)) throw GeneratorError("alpha must exceed 1");
  if (n_min < 1 || n_max > kMaxGeneration || n_min > n_max) {
    throw GeneratorError("need 1 <= n_min <= n_max <= " + std::to_string(kMaxGeneration));
  }
  if (certify_budget && !(beta > 1.0 / (alpha - 1.0))) {
    throw GeneratorError("beta = " + std::to_string(beta) + " must exceed 1/(alpha-1) = " +
                         std::to_string(1.0 / (alpha - 1.0)) + " for a convergent budget");
  }
}

nlohmann::json GeneratorParams::to_json() const {
  return {{"alpha", alpha}, {"beta", beta},   {"c0", c0}, {"n_min", n_min}, {"n_max", n_max},
          {"drop_first", drop_first}, {"certify_budget", certify_budget}};
}

int subdivision(int n, double beta) {
  const double v = std::exp2(0.5 * n * beta);
  if (v >= 1u << 30) throw GeneratorError("subdivision p_n too large");
  return static_cast<int>(std::floor(v));
}

RingConfiguration generate_corollary(const GeneratorParams& params) {
  params.validate();
  nlohmann::json prov = {{"generator", "corollary"}, {"params", params.to_json()}};
  RingConfiguration c = build_rings([&](int n) { return subdivision(n, params.beta); }, params.phi(),
                                    params.n_min, params.n_max, std::move(prov));
  if (params.drop_first > 0) {
    nlohmann::json p = c.provenance();
    c = RingConfiguration(c.rings(), params.drop_first, std::move(p));
  }
  return c;
}

RingConfiguration generate_phi_grid(const PhiSpec& phi, int per_cell, int n_min, int n_max) {
  phi.validate();
  if (per_cell < 1) throw GeneratorError("per_cell must be at least 1");
  if (n_min < 1 || n_max > kMaxGeneration || n_min > n_max) throw GeneratorError("bad generation range");
  nlohmann::json prov = {{"generator", "phi_grid"},
                         {"params", {{"phi", phi.to_json()}, {"per_cell", per_cell}, {"n_min", n_min}, {"n_max", n_max}}}};
  return build_rings([&](int) { return per_cell; }, phi, n_min, n_max, std::move(prov));
}

std::vector<double> RemarkSchedule::log_radii_for(double target) const {
  std::vector<double> out;
  switch (rule) {
    case Rule::kGeometric:
      for (int k = 1; k <= count; ++k) out.push_back(-std::ldexp(std::log(4.0), k + 2));
      break;
    case Rule::kFill:
      // log(1/r_k) = 2^k / target, so the budget is target (1 - 2^-K).
      for (int k = 1; k <= count; ++k) out.push_back(-std::ldexp(1.0, k) / target);
      break;
    case Rule::kExplicit:
      out = log_radii;
      break;
  }
  return out;
}

Configuration generate_remark_avoidable(const RemarkSchedule& schedule, double target) {
  const double threshold = 1.0 / (2.0 * std::log(4.0));
  if (!(target > 0.0) || target > threshold * (1.0 + 1e-12)) {
    throw GeneratorError("target must lie in (0, 1/(2 log 4)]");
  }
  if (!(schedule.ring_radius > 0.5 && schedule.ring_radius < 1.0)) {
    throw GeneratorError("ring radius must lie in (1/2, 1)");
  }
  const std::vector<double> logs = schedule.log_radii_for(target);
  double budget = 0.0;
  double comp = 0.0;
  std::vector<Disc> discs;
  const auto k_count = static_cast<double>(logs.size());
  for (std::size_t k = 0; k < logs.size(); ++k) {
    const double lr = logs[k];
    if (!(lr < 0.0) || !std::isfinite(lr)) throw GeneratorError("radius schedule needs 0 < r_k < 1");
    const double y = -1.0 / lr - comp;
    const double t = budget + y;
    comp = (t - budget) - y;
    budget = t;
    const Disc d = Disc::from_log_radius(from_polar(schedule.ring_radius, kTwoPi * k / k_count), lr);
    if (!(d.center.norm() - d.radius > 0.5)) throw GeneratorError("disc " + std::to_string(k) + " meets B(0,1/2)");
    discs.push_back(d);
  }
  if (budget > target) {
    throw GeneratorError("schedule budget " + std::to_string(budget) + " exceeds target " + std::to_string(target));
  }
  nlohmann::json prov = {{"generator", "remark_avoidable"},
                         {"params", {{"target", target}, {"count", logs.size()}, {"ring_radius", schedule.ring_radius}}},
                         {"budget", budget}};
  const char* rule = schedule.rule == RemarkSchedule::Rule::kGeometric ? "geometric"
                     : schedule.rule == RemarkSchedule::Rule::kFill    ? "fill"
                                                                       : "explicit";
  prov["params"]["rule"] = rule;
  Configuration c = Configuration::from_discs(std::move(discs), std::move(prov));
  const ValidationReport report = validate_configuration(c);
  if (!report.valid) throw GeneratorError("remark configuration invalid: " + report.messages().front());
  return c;
}

Configuration truncate(const Configuration& c, int n_max, std::uint64_t drop_first) {
  std::vector<Disc> kept;
  for (const Disc& d : c.discs) {
    const double gap = d.boundary_gap();
    if (gap > 0.0 && generation_of(gap) <= n_max) kept.push_back(d);
  }
  nlohmann::json prov = c.provenance;
  prov["truncate"] = {{"n_max", n_max}, {"drop_first", drop_first}};
  Configuration sorted = Configuration::from_discs(std::move(kept));
  const auto drop = static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(drop_first, sorted.discs.size()));
  std::vector<Disc> rest(sorted.discs.begin() + drop, sorted.discs.end());
  return Configuration::from_discs(std::move(rest), std::move(prov));
}

Configuration shrink(const Configuration& c, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("shrink factor must lie in (0, 1]");
  Configuration out = c;
  const double shift = std::log(delta);
  out.ratio_sup = 0.0;
  for (Disc& d : out.discs) {
    d.radius *= delta;
    d.log_radius += shift;
    out.ratio_sup = std::max(out.ratio_sup, std::exp(d.log_radius - std::log(d.boundary_gap())));
  }
  out.provenance["shrink"] = delta;
  return out;
}

RingConfiguration truncate(const RingConfiguration& c, int n_max, std::uint64_t drop_first) {
  return c.truncated(n_max, drop_first);
}

RingConfiguration shrink(const RingConfiguration& c, double delta) { return c.shrunk(delta); }

std::uint64_t count_centers(const RingConfiguration& c, Point x, double a) {
  const double s = x.norm();
  const double radius = a * (1.0 - s);
  const double psi = x.angle();
  std::uint64_t total = 0;
  for (const Ring& r : c.rings()) {
    if (r.active() <= 0 || std::abs(r.rho() - s) > radius) continue;
    const std::int64_t n = r.count;
    double half = kPi;
    if (s > 0.0) {
      const double cosine = (r.rho() * r.rho() + s * s - radius * radius) / (2.0 * r.rho() * s);
      if (cosine >= 1.0) {
        half = 0.0;
      } else if (cosine > -1.0) {
        half = std::acos(cosine);
      }
    }
    if (half >= kPi) {
      total += static_cast<std::uint64_t>(r.active());
      continue;
    }
    const double scale = static_cast<double>(n) / kTwoPi;
    auto lo = static_cast<std::int64_t>(std::ceil((psi - half) * scale - r.phase));
    auto hi = static_cast<std::int64_t>(std::floor((psi + half) * scale - r.phase));
    if (hi < lo) continue;
    if (hi - lo + 1 >= n) {
      total += static_cast<std::uint64_t>(r.active());
      continue;
    }
    const std::int64_t shift = (lo < 0 ? (-lo / n + 1) * n : 0);
    lo += shift;
    hi += shift;
    total += static_cast<std::uint64_t>(active_below(hi + 1, n, r.skip) - active_below(lo, n, r.skip));
  }
  return total;
}

std::uint64_t count_centers(const Configuration& c, Point x, double a) {
  const double radius = a * (1.0 - x.norm());
  return static_cast<std::uint64_t>(std::count_if(c.discs.begin(), c.discs.end(), [&](const Disc& d) {
    return distance(d.center, x) <= radius;
  }));
}

DensityReport density_report(const RingConfiguration& c, double a, const MSpec& m, int angles) {
  DensityReport report;
  report.a = a;
  // Balls about points outside the populated band hold no centers at all.
  const int first = c.rings().empty() ? 1 : c.rings().front().generation;
  const int deepest = c.n_max() - 2;
  for (int s = 4 * first; s <= 4 * deepest; ++s) {
    const double delta = std::exp2(-0.25 * s);
    for (int k = 0; k < angles; ++k) {
      const Point x = from_polar(1.0 - delta, kTwoPi * (k + 0.25) / angles);
      const double ratio = static_cast<double>(count_centers(c, x, a)) / m.value(1.0 - delta);
      if (ratio < report.min_ratio) {
        report.min_ratio = ratio;
        report.argmin = x;
      }
      report.max_ratio = std::max(report.max_ratio, ratio);
      ++report.samples;
    }
  }
  return report;
}

}  // namespace champagne
