#include "champagne/criteria.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "champagne/numeric.h"
#include "champagne/spatial_index.h"

namespace champagne {
namespace {

// |y - x|^2 for |y| = 1, x at radius 1 - delta and angular offset dtheta.
double boundary_distance2(double delta, double dtheta) {
  const double s = std::sin(0.5 * dtheta);
  return delta * delta + 4.0 * (1.0 - delta) * s * s;
}

SeriesReport finish(const BoundaryPoint& y, SeriesKind kind, const std::map<int, KahanSum>& groups) {
  SeriesReport report;
  report.y = y;
  report.kind = kind;
  KahanSum running;
  for (const auto& [n, sum] : groups) {
    report.per_generation.emplace_back(n, sum.value());
    running.add(sum.value());
    report.cumulative.emplace_back(n, running.value());
  }
  return report;
}

double log_ratio_checked(double delta, double log_radius, DiscId id) {
  const double l = std::log(delta) - log_radius;
  if (!(l > 0.0)) {
    throw CriteriaError("disc " + std::to_string(id) + ": log((1-|x|)/r) is not positive");
  }
  return l;
}

SeriesReport explicit_series(const Configuration& c, const BoundaryPoint& y, bool with_log) {
  std::map<int, KahanSum> groups;
  for (std::size_t k = 0; k < c.discs.size(); ++k) {
    const Disc& d = c.discs[k];
    const double delta = d.boundary_gap();
    if (!(delta > 0.0)) throw CriteriaError("disc " + std::to_string(k) + " is not inside the unit disc");
    const double dtheta = d.center.angle() - y.theta;
    double term = delta * delta / boundary_distance2(delta, dtheta);
    if (with_log) term /= log_ratio_checked(delta, d.log_radius, k);
    groups[generation_of(delta)].add(term);
  }
  return finish(y, with_log ? SeriesKind::kTheorem1 : SeriesKind::kPoissonOnly, groups);
}

SeriesReport ring_series(const RingConfiguration& c, const BoundaryPoint& y, bool with_log) {
  std::map<int, KahanSum> groups;
  const auto& rings = c.rings();
  for (std::size_t k = 0; k < rings.size(); ++k) {
    const Ring& r = rings[k];
    if (r.active() <= 0) continue;
    double term = r.delta * r.delta * ring_inverse_square_sum(r, y);
    if (with_log) term /= log_ratio_checked(r.delta, r.log_radius, c.id(k, r.skip));
    groups[r.generation].add(term);
  }
  return finish(y, with_log ? SeriesKind::kTheorem1 : SeriesKind::kPoissonOnly, groups);
}

double separation_weight(double delta, double log_radius, SeparationKind kind,
                         const std::optional<PhiSpec>& phi, DiscId id) {
  switch (kind) {
    case SeparationKind::kSep0:
      return 1.0 / delta;
    case SeparationKind::kSep:
      return std::sqrt(log_ratio_checked(delta, log_radius, id)) / delta;
    case SeparationKind::kSep3: {
      const double l = phi ? -phi->log_phi_at_gap(delta) : log_ratio_checked(delta, log_radius, id);
      if (!(l > 0.0)) throw CriteriaError("disc " + std::to_string(id) + ": log(1/phi) is not positive");
      return std::sqrt(l) / delta;
    }
  }
  return 0.0;
}

}  // namespace

BoundaryPoint BoundaryPoint::at(double theta) {
  const double t = wrap_angle(theta);
  return BoundaryPoint{t, from_polar(1.0, t)};
}

std::vector<BoundaryPoint> boundary_grid(int count) {
  std::vector<BoundaryPoint> out;
  for (int k = 0; k < count; ++k) out.push_back(BoundaryPoint::at(kTwoPi * k / count));
  return out;
}

const char* to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::kTheorem1:
      return "theorem1";
    case SeriesKind::kPoissonOnly:
      return "poisson_only";
    case SeriesKind::kEssen:
      return "essen";
  }
  return "";
}

double SeriesReport::cumulative_at(int n) const {
  double v = 0.0;
  for (const auto& [g, s] : cumulative) {
    if (g > n) break;
    v = s;
  }
  return v;
}

double full_ring_inverse_square_sum(double rho, double delta, std::int64_t count, double theta0,
                                    double psi) {
  // Σ_j P_ρ(θ_j - ψ) = N P_{ρ^N}(N(θ_0 - ψ)) for the Poisson kernel P.
  const auto n = static_cast<double>(count);
  const double log_rho = std::log1p(-delta);
  const double rho_n = std::exp(n * log_rho);
  const double one_minus_rho_n = -std::expm1(n * log_rho);
  const double one_minus_rho_2n = -std::expm1(2.0 * n * log_rho);
  const double half = std::remainder(0.5 * n * (theta0 - psi), kPi);
  const double s = std::sin(half);
  const double denom = one_minus_rho_n * one_minus_rho_n + 4.0 * rho_n * s * s;
  return n * one_minus_rho_2n / (delta * (1.0 + rho) * denom);
}

double ring_inverse_square_sum(const Ring& ring, const BoundaryPoint& y) {
  auto direct = [&](std::int64_t lo, std::int64_t hi) {
    KahanSum sum;
    for (std::int64_t t = lo; t < hi; ++t) {
      sum.add(1.0 / boundary_distance2(ring.delta, ring.angle(t) - y.theta));
    }
    return sum.value();
  };
  if (ring.active() <= 0) return 0.0;
  if (ring.active() <= ring.count / 2) return direct(ring.skip, ring.count);
  const double full = full_ring_inverse_square_sum(ring.rho(), ring.delta, ring.count, ring.angle(0), y.theta);
  return ring.skip == 0 ? full : full - direct(0, ring.skip);
}

SeriesReport theorem1_series(const Configuration& c, const BoundaryPoint& y) {
  return explicit_series(c, y, true);
}
SeriesReport theorem1_series(const RingConfiguration& c, const BoundaryPoint& y) {
  return ring_series(c, y, true);
}
SeriesReport poisson_series(const Configuration& c, const BoundaryPoint& y) {
  return explicit_series(c, y, false);
}
SeriesReport poisson_series(const RingConfiguration& c, const BoundaryPoint& y) {
  return ring_series(c, y, false);
}

const char* to_string(SeparationKind kind) {
  switch (kind) {
    case SeparationKind::kSep0:
      return "sep0";
    case SeparationKind::kSep:
      return "sep";
    case SeparationKind::kSep3:
      return "sep3";
  }
  return "";
}

SeparationReport separation(const Configuration& c, SeparationKind kind, const std::optional<PhiSpec>& phi) {
  SeparationReport report;
  report.kind = kind;
  if (c.discs.size() < 2) return report;
  const SpatialIndex index(c);
  for (std::size_t k = 0; k < c.discs.size(); ++k) {
    const Disc& d = c.discs[k];
    const double w = separation_weight(d.boundary_gap(), d.log_radius, kind, phi, k);
    const auto [dist, j] = index.nearest_center(d.center, k);
    if (!j) continue;
    const double v = dist * w;
    if (v < report.value) {
      report.value = v;
      report.argmin_pair = {*j, k};
    }
  }
  return report;
}

SeparationReport separation_brute_force(const Configuration& c, SeparationKind kind,
                                        const std::optional<PhiSpec>& phi) {
  SeparationReport report;
  report.kind = kind;
  for (std::size_t k = 0; k < c.discs.size(); ++k) {
    const Disc& dk = c.discs[k];
    const double w = separation_weight(dk.boundary_gap(), dk.log_radius, kind, phi, k);
    for (std::size_t j = 0; j < c.discs.size(); ++j) {
      if (j == k) continue;
      const double v = distance(dk.center, c.discs[j].center) * w;
      if (v < report.value) {
        report.value = v;
        report.argmin_pair = {j, k};
      }
    }
  }
  return report;
}

SeparationReport separation(const RingConfiguration& c, SeparationKind kind,
                            const std::optional<PhiSpec>& phi) {
  SeparationReport report;
  report.kind = kind;
  if (c.size() < 2) return report;
  const auto& rings = c.rings();
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < rings.size(); ++k) {
    if (rings[k].active() > 0) order.push_back(k);
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rings[a].rho() < rings[b].rho(); });
  const auto size = static_cast<std::ptrdiff_t>(order.size());
  for (std::ptrdiff_t ia = 0; ia < size; ++ia) {
    const std::size_t ka = order[static_cast<std::size_t>(ia)];
    const Ring& a = rings[ka];
    const double w = separation_weight(a.delta, a.log_radius, kind, phi, c.id(ka, a.skip));
    auto consider = [&](std::ptrdiff_t ib) {
      const std::size_t kb = order[static_cast<std::size_t>(ib)];
      const Ring& b = rings[kb];
      if (w * std::abs(b.rho() - a.rho()) >= report.value) return false;
      const RingPairDistance d = ring_pair_min_distance(a, b, ka == kb);
      if (d.ta >= 0 && w * d.distance < report.value) {
        report.value = w * d.distance;
        report.argmin_pair = {c.id(kb, d.tb), c.id(ka, d.ta)};
      }
      return true;
    };
    consider(ia);
    for (std::ptrdiff_t ib = ia + 1; ib < size && consider(ib); ++ib) {
    }
    for (std::ptrdiff_t ib = ia - 1; ib >= 0 && consider(ib); --ib) {
    }
  }
  return report;
}

IntegralResult integral_test(const MSpec& m, const PhiSpec& phi, double T) {
  if (!(T >= 0.0 && T < 1.0)) throw CriteriaError("integral_test: T must lie in [0, 1)");
  const double upper = -std::log1p(-T);
  auto integrand = [&](double u) {
    const double delta = std::exp(-u);
    const double log_inv_phi = -phi.log_phi_at_gap(delta);
    const double v = std::exp(m.beta * u) / log_inv_phi;  // M(t) = (1-t)^(-β) = e^{βu}
    if (!std::isfinite(v) || !(log_inv_phi > 0.0)) {
      throw CriteriaError("integral_test: nonintegrable singularity at t = " + std::to_string(1.0 - delta));
    }
    return v;
  };
  IntegralResult out;
  if (upper == 0.0) return out;
  double error = 0.0;
  out.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 15, 1e-12,
                                                                            &error);
  out.error_estimate = error;
  return out;
}

BudgetSums budget_sums(const Configuration& c, double alpha) {
  KahanSum ra;
  KahanSum la;
  KahanSum l1;
  for (std::size_t k = 0; k < c.discs.size(); ++k) {
    const double lr = c.discs[k].log_radius;
    if (!(lr < 0.0)) throw CriteriaError("disc " + std::to_string(k) + ": radius must lie in (0, 1)");
    ra.add(std::exp(alpha * lr));
    la.add(std::pow(-lr, -alpha));
    l1.add(-1.0 / lr);
  }
  return {ra.value(), la.value(), l1.value()};
}

BudgetSums budget_sums(const RingConfiguration& c, double alpha) {
  KahanSum ra;
  KahanSum la;
  KahanSum l1;
  const auto& rings = c.rings();
  for (std::size_t k = 0; k < rings.size(); ++k) {
    const Ring& r = rings[k];
    if (r.active() <= 0) continue;
    const double lr = r.log_radius;
    if (!(lr < 0.0)) throw CriteriaError("disc " + std::to_string(c.id(k, r.skip)) + ": radius must lie in (0, 1)");
    const auto count = static_cast<double>(r.active());
    ra.add(count * std::exp(alpha * lr));
    la.add(count * std::pow(-lr, -alpha));
    l1.add(-count / lr);
  }
  return {ra.value(), la.value(), l1.value()};
}

double corollary_budget_bound(double c0, double alpha, double beta, int n_min, int n_max) {
  const double q = std::exp2(-beta * (alpha - 1.0) + 1.0);
  KahanSum sum;
  for (int n = n_min; n <= n_max; ++n) sum.add(std::pow(q, n));
  return 16.0 * std::pow(c0, alpha) * sum.value();
}

double power_log_constant(double alpha) {
  const double v = 2.0 / (std::numbers::e * alpha);
  return v * v;
}

std::vector<GridSummary> summarize_grid(const std::vector<SeriesReport>& reports) {
  std::vector<GridSummary> out;
  if (reports.empty()) return out;
  std::vector<int> gens;
  for (const auto& r : reports) {
    for (const auto& [n, v] : r.cumulative) gens.push_back(n);
  }
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  for (int n : gens) {
    std::vector<double> values;
    for (const auto& r : reports) values.push_back(r.cumulative_at(n));
    std::sort(values.begin(), values.end());
    const std::size_t h = values.size() / 2;
    const double median = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
    out.push_back({n, values.front(), median, values.back()});
  }
  return out;
}

GrowthFit fit_growth(const SeriesReport& report, int n_lo, int n_hi) {
  GrowthFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> contrib;
  for (int n = n_lo; n <= n_hi; ++n) {
    xs.push_back(n);
    ys.push_back(report.cumulative_at(n));
    double c = 0.0;
    for (const auto& [g, v] : report.per_generation) {
      if (g == n) c = v;
    }
    contrib.push_back(c);
  }
  const auto count = static_cast<double>(xs.size());
  if (xs.size() < 2) return fit;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fit.max_residual = std::max(fit.max_residual, std::abs(ys[i] - (fit.intercept + fit.slope * xs[i])));
  }
  fit.range = std::abs(fit.slope) * (n_hi - n_lo);
  fit.residual_fraction = fit.range > 0.0 ? fit.max_residual / fit.range : kInf;
  const std::size_t half = contrib.size() / 2;
  const double early = std::accumulate(contrib.begin(), contrib.begin() + static_cast<std::ptrdiff_t>(half), 0.0) /
                       static_cast<double>(half);
  const double late = std::accumulate(contrib.end() - static_cast<std::ptrdiff_t>(half), contrib.end(), 0.0) /
                      static_cast<double>(half);
  fit.tail_ratio = early > 0.0 ? late / early : (late > 0.0 ? kInf : 0.0);
  fit.affine = fit.slope > 0.0 && fit.residual_fraction < 0.2;
  fit.label = fit.slope > 0.0 && fit.tail_ratio >= 0.5 ? "consistent with divergence"
                                                        : "consistent with convergence";
  return fit;
}

std::string series_csv(const std::vector<SeriesReport>& reports) {
  std::ostringstream os;
  os << "y_index,theta,n,per_generation,cumulative\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const SeriesReport& r = reports[i];
    for (std::size_t g = 0; g < r.per_generation.size(); ++g) {
      os << i << ',' << format_real(r.y.theta) << ',' << r.per_generation[g].first << ','
         << format_real(r.per_generation[g].second) << ',' << format_real(r.cumulative[g].second) << '\n';
    }
  }
  return os.str();
}

}  // namespace champagne
