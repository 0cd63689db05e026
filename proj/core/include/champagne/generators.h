#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "champagne/configuration.h"
#include "champagne/ring_configuration.h"

namespace champagne {

struct GeneratorError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Decreasing radius profile φ: [0,1) -> (0,1) with r = (1-|x|) φ(|x|).
struct PhiSpec {
  enum class Form { kExpPower, kTable, kConstant };
  Form form = Form::kExpPower;
  double c0 = 0.05;
  double beta = 1.5;
  double constant = 0.01;
  // (t, φ(t)) knots, t ascending; log φ is interpolated linearly in t and
  // held constant beyond the end knots.
  std::vector<std::pair<double, double>> table;

  static PhiSpec exp_power(double c0, double beta);
  static PhiSpec constant_value(double value);
  static PhiSpec from_table(std::vector<std::pair<double, double>> knots);

  // log φ at |x| = 1 - delta; exact for tiny delta.
  double log_phi_at_gap(double delta) const;
  double log_phi(double t) const { return log_phi_at_gap(1.0 - t); }
  // Throws GeneratorError on an invalid specification.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Growth function M(t) = (1-t)^(-β).
struct MSpec {
  double beta = 1.5;
  double doubling_c() const { return std::exp2(beta); }
  double value(double t) const { return std::pow(1.0 - t, -beta); }
  // max over sampled t in (0,1] of M(1 - t/2) / M(1 - t).
  double measured_doubling(int samples = 1000) const;
};

struct GeneratorParams {
  double alpha = 2.0;
  double beta = 1.5;
  double c0 = 0.05;
  int n_min = 1;
  int n_max = 8;
  std::uint64_t drop_first = 0;
  // Require β > 1/(α-1) so the Corollary budget series converges.
  bool certify_budget = true;

  PhiSpec phi() const { return PhiSpec::exp_power(c0, beta); }
  void validate() const;
  nlohmann::json to_json() const;
};

// p_n = floor(2^(nβ/2)).
int subdivision(int n, double beta);

RingConfiguration generate_corollary(const GeneratorParams& params);
RingConfiguration generate_phi_grid(const PhiSpec& phi, int per_cell, int n_min, int n_max);

struct RemarkSchedule {
  enum class Rule { kGeometric, kFill, kExplicit };
  Rule rule = Rule::kGeometric;
  int count = 8;                   // K discs
  std::vector<double> log_radii;   // kExplicit only
  double ring_radius = 0.75;

  // log r_k for k = 1..K.
  std::vector<double> log_radii_for(double target) const;
};
Configuration generate_remark_avoidable(const RemarkSchedule& schedule, double target);

Configuration truncate(const Configuration& c, int n_max, std::uint64_t drop_first);
Configuration shrink(const Configuration& c, double delta);
RingConfiguration truncate(const RingConfiguration& c, int n_max, std::uint64_t drop_first);
RingConfiguration shrink(const RingConfiguration& c, double delta);

// N_a(x): number of centers in B(x, a(1-|x|)).
std::uint64_t count_centers(const RingConfiguration& c, Point x, double a);
std::uint64_t count_centers(const Configuration& c, Point x, double a);

struct DensityReport {
  double a = 0.0;
  double min_ratio = kInf;  // min N_a(x) / M(|x|) over the sample grid
  double max_ratio = 0.0;
  Point argmin;
  int samples = 0;
};
// Radial grid |x| = 1 - 2^(-s/4), s = 4 n_first..4 (n_max - 2), times
// `angles` angles; n_first is the shallowest populated generation.
DensityReport density_report(const RingConfiguration& c, double a, const MSpec& m, int angles = 16);

}  // namespace champagne
