#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "champagne/generators.h"

namespace champagne {
namespace {

TEST(SubdivisionTest, FloorOfPower) {
  EXPECT_EQ(subdivision(1, 1.5), 1);   // 2^0.75 = 1.68
  EXPECT_EQ(subdivision(4, 1.5), 8);   // 2^3
  EXPECT_EQ(subdivision(5, 1.5), 13);  // 2^3.75 = 13.45
  EXPECT_EQ(subdivision(6, 0.5), 2);   // 2^1.5 = 2.83
}

TEST(CorollaryGeneratorTest, CountsAndRadiiFollowTheConstruction) {
  GeneratorParams params;
  params.n_max = 5;
  const RingConfiguration rings = generate_corollary(params);
  const Configuration c = rings.materialize();
  std::map<int, std::uint64_t> per_generation;
  std::map<std::pair<int, std::int64_t>, int> per_cell;
  for (const Disc& d : c.discs) {
    const double delta = d.boundary_gap();
    const int n = generation_of(delta);
    ++per_generation[n];
    ++per_cell[{n, cell_containing(d.center).m}];
    const double log_phi = -1.0 / (params.c0 * std::pow(delta, params.beta));
    EXPECT_NEAR(d.log_radius, std::log(delta) + log_phi, 1e-9 * std::abs(d.log_radius));
    EXPECT_TRUE(whitney_cell(cell_containing(d.center)).contains_disc_interior(d));
  }
  for (int n = 1; n <= 5; ++n) {
    const std::uint64_t p = static_cast<std::uint64_t>(std::floor(std::exp2(0.75 * n)));
    EXPECT_EQ(per_generation[n], (std::uint64_t{1} << (n + 4)) * p * p) << n;
    for (std::int64_t m = 0; m < cells_in_generation(n); m += 7) EXPECT_EQ(per_cell[std::make_pair(n, m)], static_cast<int>(p * p));
  }
  EXPECT_TRUE(validate_configuration(c).valid);
}

TEST(CorollaryGeneratorTest, RejectsDivergentBudget) {
  GeneratorParams params;
  params.alpha = 2.0;
  params.beta = 1.0;
  EXPECT_THROW(generate_corollary(params), GeneratorError);
  params.certify_budget = false;
  params.n_max = 3;
  EXPECT_NO_THROW(generate_corollary(params));
  params.c0 = 1.5;
  EXPECT_THROW(generate_corollary(params), GeneratorError);
}

TEST(CorollaryGeneratorTest, DropFirstRemovesCanonicalPrefix) {
  GeneratorParams params;
  params.n_max = 4;
  const Configuration full = generate_corollary(params).materialize();
  params.drop_first = 40;
  const Configuration dropped = generate_corollary(params).materialize();
  ASSERT_EQ(dropped.size() + 40, full.size());
  for (std::size_t k = 0; k < dropped.size(); ++k) {
    EXPECT_EQ(dropped.discs[k].center, full.discs[k + 40].center);
  }
}

TEST(PhiGridTest, ConstantPhiGivesProportionalRadii) {
  const RingConfiguration c = generate_phi_grid(PhiSpec::constant_value(0.01), 2, 1, 3);
  for (const Ring& r : c.rings()) EXPECT_NEAR(r.log_radius, std::log(0.01 * r.delta), 1e-12);
  EXPECT_EQ(c.size(), (32u + 64u + 128u) * 4u);
}

TEST(PhiSpecTest, TableInterpolatesLogPhi) {
  const PhiSpec s = PhiSpec::from_table({{0.0, 0.1}, {0.5, 0.01}});
  EXPECT_NEAR(s.log_phi(0.25), 0.5 * (std::log(0.1) + std::log(0.01)), 1e-12);
  EXPECT_NEAR(s.log_phi(0.9), std::log(0.01), 1e-12);
  EXPECT_THROW(PhiSpec::from_table({{0.0, 0.01}, {0.5, 0.1}}).validate(), GeneratorError);
}

TEST(MSpecTest, DoublingConstantIsTwoToBeta) {
  const MSpec m{1.5};
  EXPECT_NEAR(m.measured_doubling(), std::exp2(1.5), 1e-9);
  EXPECT_NEAR(m.doubling_c(), std::exp2(1.5), 1e-15);
}

TEST(RemarkGeneratorTest, BudgetsMatchClosedForms) {
  const double threshold = 1.0 / (2.0 * std::log(4.0));
  for (int k_count : {1, 4, 8}) {
    RemarkSchedule geometric;
    geometric.count = k_count;
    const Configuration g = generate_remark_avoidable(geometric, threshold);
    double budget = 0.0;
    for (const Disc& d : g.discs) {
      budget += -1.0 / d.log_radius;
      EXPECT_GT(d.center.norm() - d.radius, 0.5);
    }
    EXPECT_NEAR(budget, (1.0 - std::ldexp(1.0, -k_count)) / (4.0 * std::log(4.0)), 1e-15);

    RemarkSchedule fill;
    fill.rule = RemarkSchedule::Rule::kFill;
    fill.count = k_count;
    const Configuration f = generate_remark_avoidable(fill, threshold);
    budget = 0.0;
    for (const Disc& d : f.discs) budget += -1.0 / d.log_radius;
    EXPECT_NEAR(budget, threshold * (1.0 - std::ldexp(1.0, -k_count)), 1e-15);
    EXPECT_LE(budget, threshold);
  }
}

TEST(RemarkGeneratorTest, RejectsBadInputs) {
  RemarkSchedule s;
  EXPECT_THROW(generate_remark_avoidable(s, 1.0), GeneratorError);
  s.ring_radius = 0.4;
  EXPECT_THROW(generate_remark_avoidable(s, 0.3), GeneratorError);
  RemarkSchedule big;
  big.rule = RemarkSchedule::Rule::kExplicit;
  big.log_radii = {std::log(0.1)};
  EXPECT_THROW(generate_remark_avoidable(big, 0.3), GeneratorError);
}

TEST(CountCentersTest, RingCountMatchesExplicitCount) {
  GeneratorParams params;
  params.n_max = 5;
  params.drop_first = 33;
  const RingConfiguration rings = generate_corollary(params);
  const Configuration c = rings.materialize();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> rad(0.3, 0.98);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  for (int i = 0; i < 300; ++i) {
    const Point x = from_polar(rad(rng), ang(rng));
    for (double a : {0.25, 0.5, 0.9}) EXPECT_EQ(count_centers(rings, x, a), count_centers(c, x, a));
  }
}

TEST(DensityTest, GridConfigurationsHaveComparableDensity) {
  GeneratorParams params;
  params.n_max = 8;
  const DensityReport r = density_report(generate_corollary(params), 0.5, MSpec{params.beta});
  EXPECT_GT(r.min_ratio, 0.0);
  EXPECT_LT(r.max_ratio / r.min_ratio, 100.0);
  EXPECT_GT(r.samples, 0);
}

TEST(TransformTest, ShrinkAndTruncateExplicit) {
  GeneratorParams params;
  params.n_max = 4;
  const Configuration c = generate_corollary(params).materialize();
  const Configuration s = shrink(c, 0.25);
  for (std::size_t k = 0; k < c.size(); ++k) EXPECT_NEAR(s.discs[k].log_radius, c.discs[k].log_radius + std::log(0.25), 1e-12);
  const Configuration t = truncate(c, 2, 0);
  for (const Disc& d : t.discs) EXPECT_LE(generation_of(d.boundary_gap()), 2);
  EXPECT_EQ(t.size(), 32u + 64u * 4u);
}

}  // namespace
}  // namespace champagne
