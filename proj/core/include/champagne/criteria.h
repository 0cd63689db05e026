#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "champagne/configuration.h"
#include "champagne/generators.h"
#include "champagne/ring_configuration.h"

namespace champagne {

struct CriteriaError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BoundaryPoint {
  double theta = 0.0;
  Point point{1.0, 0.0};

  static BoundaryPoint at(double theta);
};

// count equally spaced boundary points, theta_k = 2πk/count.
std::vector<BoundaryPoint> boundary_grid(int count);

enum class SeriesKind { kTheorem1, kPoissonOnly, kEssen };
const char* to_string(SeriesKind kind);

struct SeriesReport {
  BoundaryPoint y;
  SeriesKind kind = SeriesKind::kTheorem1;
  // (n, contribution); generation 0 collects discs in |x| < 1/2.
  std::vector<std::pair<int, double>> per_generation;
  std::vector<std::pair<int, double>> cumulative;

  double total() const { return cumulative.empty() ? 0.0 : cumulative.back().second; }
  // Cumulative value through generation n (0 before the first entry).
  double cumulative_at(int n) const;
};

// Σ_k (1-|x_k|)^2 / |y - x_k|^2 · {log((1-|x_k|)/r_k)}^(-1), by generation.
SeriesReport theorem1_series(const Configuration& c, const BoundaryPoint& y);
SeriesReport theorem1_series(const RingConfiguration& c, const BoundaryPoint& y);
// Σ_k (1-|x_k|)^2 / |y - x_k|^2, by generation.
SeriesReport poisson_series(const Configuration& c, const BoundaryPoint& y);
SeriesReport poisson_series(const RingConfiguration& c, const BoundaryPoint& y);

// Σ_{t in [skip, N)} 1/|y - x_t|^2 over the active points of a ring, for a
// unit boundary point y. Closed form for the full ring.
double ring_inverse_square_sum(const Ring& ring, const BoundaryPoint& y);
// Same sum over all N points of an equally spaced ring of radius rho,
// first angle theta0.
double full_ring_inverse_square_sum(double rho, double delta, std::int64_t count, double theta0,
                                    double psi);

enum class SeparationKind { kSep0, kSep, kSep3 };
const char* to_string(SeparationKind kind);

struct SeparationReport {
  SeparationKind kind = SeparationKind::kSep0;
  double value = kInf;
  // Ordered pair (j, k) attaining the infimum of |x_k - x_j| w_k.
  std::pair<DiscId, DiscId> argmin_pair{0, 0};
};

// inf over j != k of |x_k - x_j| w_k / (1 - |x_k|) with w_k = 1 (sep0),
// {log((1-|x_k|)/r_k)}^(1/2) (sep) or {log(1/φ(|x_k|))}^(1/2) (sep3; the
// implied φ = r/(1-|x|) when none is given).
SeparationReport separation(const Configuration& c, SeparationKind kind,
                            const std::optional<PhiSpec>& phi = std::nullopt);
SeparationReport separation(const RingConfiguration& c, SeparationKind kind,
                            const std::optional<PhiSpec>& phi = std::nullopt);
// O(K^2) reference scan.
SeparationReport separation_brute_force(const Configuration& c, SeparationKind kind,
                                        const std::optional<PhiSpec>& phi = std::nullopt);

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
};
// ∫_0^T M(t) / ((1-t) log(1/φ(t))) dt, computed in u = -log(1-t).
IntegralResult integral_test(const MSpec& m, const PhiSpec& phi, double T);

struct BudgetSums {
  double sum_r_alpha = 0.0;
  double sum_log_inv_alpha = 0.0;
  double sum_log_inv_1 = 0.0;
};
BudgetSums budget_sums(const Configuration& c, double alpha);
BudgetSums budget_sums(const RingConfiguration& c, double alpha);

// 16 c0^α Σ_{n=n_min}^{n_max} (2^{-β(α-1)+1})^n.
double corollary_budget_bound(double c0, double alpha, double beta, int n_min, int n_max);
// c(α) = (2/(eα))^2, the best constant in r^α <= c(α) {log(1/r)}^(-2).
double power_log_constant(double alpha);

struct GridSummary {
  int n = 0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};
// Per-generation min/median/max of the cumulative sums over a y-grid.
std::vector<GridSummary> summarize_grid(const std::vector<SeriesReport>& reports);

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  double range = 0.0;               // fitted value span over [n_lo, n_hi]
  double residual_fraction = 0.0;   // max_residual / range
  double tail_ratio = 0.0;          // mean late contribution / mean early contribution
  bool affine = false;              // slope > 0 and residual_fraction < 0.2
  std::string label;                // "consistent with divergence" / "... convergence"
};
GrowthFit fit_growth(const SeriesReport& report, int n_lo, int n_hi);

// CSV: y_index,theta,n,per_generation,cumulative
std::string series_csv(const std::vector<SeriesReport>& reports);

}  // namespace champagne
