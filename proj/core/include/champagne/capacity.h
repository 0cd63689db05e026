#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "champagne/configuration.h"
#include "champagne/criteria.h"
#include "champagne/ring_configuration.h"
#include "champagne/simplex_qp.h"

namespace champagne {

struct CapacityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Closed disc, optionally intersected with a closed Whitney cell.
struct DiscPiece {
  Disc disc;
  std::optional<WhitneyIndex> clip;
};

struct SegmentPiece {
  Point a;
  Point b;
};

/// Compact set: union of pieces, all multiplied by `scale`.
struct Shape {
  std::vector<std::variant<DiscPiece, SegmentPiece>> pieces;
  double scale = 1.0;

  static Shape disc(const Disc& d);
  static Shape segment(Point a, Point b);
  // B̄(d) ∩ S_{m,n}; a disc inside the open cell is stored unclipped.
  static Shape clipped_disc(const Disc& d, WhitneyIndex cell);
  void add(const Shape& other);
  Shape scaled(double factor) const;
};

enum class CapacityMethod { kExactDisc, kEnergyMinimization, kChargeModel, kAggregatedCharge, kPolar };
const char* to_string(CapacityMethod method);

struct CapacityEstimate {
  double value = 0.0;       // exp(log_value); may underflow to 0
  double log_value = -kInf;
  CapacityMethod method = CapacityMethod::kPolar;
  int boundary_points = 0;  // elements in the discretization
  double error_hint = 0.0;  // relative

  bool polar() const { return method == CapacityMethod::kPolar; }
};

struct CapacityOptions {
  int boundary_points = 256;        // elements on a full circle or a segment
  int arc_points = 64;              // samples per clipped arc or cell edge
  double charge_ratio = 0.01;       // r <= ratio * clearance -> point charge
  std::size_t aggregate_above = 4096;
  bool estimate_error = false;      // rerun at half resolution for error_hint
  QpOptions qp;
};

// Logarithmic capacity exp(-V), V the Robin constant, by minimizing the
// logarithmic energy of measures that are uniform on boundary elements.
CapacityEstimate log_capacity(const Shape& shape, const CapacityOptions& options = {});

struct C2Estimate {
  double value = 0.0;
  double lower = 0.0;
  double upper = kInf;
  bool polar = false;
};

// C₂ with kernel log⁺(2/|x-y|) for sets of diameter <= 2: the optimal
// probability measure for log(2/|x-y|) normalized so that its potential is
// >= 1 on the targets (element midpoints, charges, interior grid).
C2Estimate c2_capacity(const Shape& shape, const CapacityOptions& options = {});

// {(1/r^2) ∫_0^r t log(2/t) dt}^(-1) = 1/(log(2/r)/2 + 1/4), with the
// bracket c3^(∓1) {log(1/r)}^(-1).
C2Estimate c2_disc(double r, double c3 = 4.0);

struct PaperConstants {
  double c1 = 4.0;  // cell overlap constant; 4/(1 - ratio_sup) by default
  double c3 = 4.0;  // C₂ ball bracket constant

  static PaperConstants for_ratio(double ratio_sup, double c3 = 4.0);
  double quasisep_threshold() const;     // 8√π c3 c1^2
  double alpha(int n) const;             // (4π c1 c3)^(-1) 2^n
  nlohmann::json to_json() const;
};

using CapacityOracle = std::function<CapacityEstimate(const Shape&)>;

struct EssenCell {
  WhitneyIndex index;
  std::uint64_t multiplicity = 1;  // cells sharing this capacity (ring templates)
  CapacityEstimate capacity;
  double weight = 0.0;             // {log(2^-n / c)}^(-1), 0 when polar
};

/// Σ_{m,n<=n_max} (2^-n/|z_{m,n} - y|)^2 {log(2^-n / c(E ∩ S_{m,n}))}^(-1).
/// Capacities are computed once at construction; evaluate() is cheap.
class EssenEvaluator {
 public:
  EssenEvaluator(const Configuration& c, int n_max, CapacityOracle oracle = {});
  EssenEvaluator(const RingConfiguration& c, int n_max, CapacityOracle oracle = {});

  SeriesReport evaluate(const BoundaryPoint& y) const;
  const std::vector<EssenCell>& cells() const { return cells_; }

 private:
  struct Template {
    int n = 0;
    double weight = 0.0;
    Ring centers;  // cell corners z_{m,n} of fully populated cells
  };
  std::vector<EssenCell> cells_;         // every evaluated cell, templates included
  std::vector<std::size_t> individual_;  // cells_ entries summed one by one
  std::vector<Template> templates_;
};

SeriesReport essen_sum(const Configuration& c, const BoundaryPoint& y, int n_max, CapacityOracle oracle = {});

// Discs meeting the closed cell.
std::vector<Disc> discs_meeting_cell(const Configuration& c, WhitneyIndex idx);
std::vector<Disc> discs_meeting_cell(const RingConfiguration& c, WhitneyIndex idx);
// Union of the discs clipped to the cell.
Shape cell_shape(const std::vector<Disc>& discs, WhitneyIndex idx);

struct QuasiadditivityResult {
  double ratio = 1.0;       // C₂(α_n[union]) / Σ C₂(α_n[part])
  double union_c2 = 0.0;
  double parts_c2 = 0.0;
  std::size_t parts = 0;
  double min_part_bound = kInf;  // min over parts of C₂(α_n part) log((1-|x|)/r)
};

struct QuasisepCheck {
  bool satisfied = false;
  double statistic = 0.0;  // the sep statistic
  double threshold = 0.0;
  std::pair<DiscId, DiscId> pair{0, 0};
};
QuasisepCheck check_quasisep(const Configuration& c, const PaperConstants& k);
QuasisepCheck check_quasisep(const RingConfiguration& c, const PaperConstants& k);

// Requires the quasisep precondition (checked by the caller through
// check_quasisep); throws CapacityError for polar cells.
QuasiadditivityResult quasiadditivity_ratio(const std::vector<Disc>& cell_discs, WhitneyIndex idx,
                                            const PaperConstants& k, const CapacityOptions& options = {});

struct LoginCheck {
  double lhs = 0.0;  // C₂(α_n[E° ∩ S°])
  double rhs = 0.0;  // {log(2^-n / c(E ∩ S))}^(-1)
};
LoginCheck login_check(const std::vector<Disc>& cell_discs, WhitneyIndex idx, const PaperConstants& k,
                       const CapacityOptions& options = {});

// 1/log(1/r), the Green capacity bound of B̄(x, r) relative to B(0, 2).
double green_capacity_disc_bound(double r);
double green_capacity_bound_log(double log_r);

struct RemarkCertificate {
  bool issued = false;
  bool trivial = false;
  double budget = 0.0;      // Σ 1/log(1/r_k)
  double threshold = 0.0;   // 1/(2 log 4)
  double clearance = kInf;  // min |x_k| - r_k - 1/2
  std::string reason;
  nlohmann::json to_json() const;
};
RemarkCertificate remark_certificate(const Configuration& c);
RemarkCertificate remark_certificate(const RingConfiguration& c);

// CSV: n,m,multiplicity,log_capacity,capacity,method,c2,essen_weight,quasiadditivity_ratio
struct CellRecord {
  EssenCell cell;
  double c2 = 0.0;
  double quasiadditivity = 0.0;
};
std::string cells_csv(const std::vector<CellRecord>& records);

}  // namespace champagne
