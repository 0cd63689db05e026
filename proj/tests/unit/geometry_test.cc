#include "champagne/geometry.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace champagne {
namespace {

TEST(GenerationTest, BoundaryValuesBelongToTheOuterGeneration) {
  EXPECT_EQ(generation_of(0.5), 1);
  EXPECT_EQ(generation_of(0.25), 2);
  EXPECT_EQ(generation_of(0.3), 1);
  EXPECT_EQ(generation_of(std::ldexp(1.0, -20)), 20);
  EXPECT_EQ(generation_of(0.6), 0);
}

TEST(GenerationTest, AgreesWithDefinitionOnRandomGaps) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-30.0, -1.0);
  for (int i = 0; i < 2000; ++i) {
    const double delta = std::exp2(u(rng));
    const int n = generation_of(delta);
    EXPECT_LE(std::ldexp(1.0, -n - 1), delta);
    EXPECT_LE(delta, std::ldexp(1.0, -n));
  }
}

TEST(WhitneyIndexTest, ReducesAngularIndex) {
  const WhitneyIndex idx = WhitneyIndex::make(2, 64 + 3);
  EXPECT_EQ(idx.m, 3);
  EXPECT_EQ(WhitneyIndex::make(1, -1).m, 31);
  EXPECT_THROW(WhitneyIndex::make(0, 0), std::invalid_argument);
  EXPECT_THROW(WhitneyIndex::make(kMaxGeneration + 1, 0), std::invalid_argument);
}

TEST(WhitneyCellTest, DiameterMatchesSampledMaximum) {
  for (int n : {1, 3, 6}) {
    const WhitneyCell cell = whitney_cell(WhitneyIndex::make(n, 5));
    double best = 0.0;
    std::vector<Point> corners;
    for (double r : {cell.r_inner, cell.r_outer}) {
      for (int k = 0; k <= 200; ++k) {
        const double t = cell.theta_lo + cell.angular_width() * k / 200.0;
        corners.push_back(from_polar(r, t));
      }
    }
    for (const Point& a : corners) {
      for (const Point& b : corners) best = std::max(best, distance(a, b));
    }
    EXPECT_NEAR(cell.diameter(), best, 1e-9 * best);
  }
}

TEST(WhitneyCellTest, AreaIsSectorArea) {
  const WhitneyCell cell = whitney_cell(WhitneyIndex::make(3, 0));
  const double expected = 0.5 * cell.angular_width() * (cell.r_outer * cell.r_outer - cell.r_inner * cell.r_inner);
  EXPECT_NEAR(cell.area(), expected, 1e-15);
}

TEST(WhitneyCellTest, CellContainingContainsPoint) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r(0.5, 0.999999);
  std::uniform_real_distribution<double> t(0.0, kTwoPi);
  for (int i = 0; i < 2000; ++i) {
    const Point p = from_polar(r(rng), t(rng));
    const WhitneyCell cell = whitney_cell(cell_containing(p));
    EXPECT_TRUE(cell.contains(p, 1e-12));
    EXPECT_EQ(cell.distance_to(p), 0.0);
  }
}

TEST(WhitneyCellTest, DistanceToMatchesDenseSampling) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const WhitneyCell cell = whitney_cell(WhitneyIndex::make(2, 9));
  std::vector<Point> samples;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double r = cell.r_inner + (cell.r_outer - cell.r_inner) * j / 40.0;
      samples.push_back(from_polar(r, cell.theta_lo + cell.angular_width() * i / 400.0));
    }
  }
  for (int i = 0; i < 50; ++i) {
    const Point p{u(rng), u(rng)};
    double best = kInf;
    for (const Point& s : samples) best = std::min(best, distance(p, s));
    const double d = cell.distance_to(p);
    EXPECT_LE(d, best + 1e-12);
    EXPECT_GE(d, best - 2e-3);
  }
}

TEST(CellsIntersectingBallTest, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> rad(0.001, 0.2);
  const int max_n = 5;
  for (int trial = 0; trial < 60; ++trial) {
    const Point c{0.9 * u(rng), 0.9 * u(rng)};
    const double r = rad(rng);
    std::vector<WhitneyIndex> expected;
    for (int n = 1; n <= max_n; ++n) {
      for (std::int64_t m = 0; m < cells_in_generation(n); ++m) {
        const WhitneyIndex idx{n, m};
        if (whitney_cell(idx).distance_to(c) <= r) expected.push_back(idx);
      }
    }
    const std::vector<WhitneyIndex> got = cells_intersecting_ball(c, r, max_n);
    // Boundary-tangent cells may differ by rounding; require inclusion of
    // every cell that clearly meets the ball and nothing clearly disjoint.
    for (const WhitneyIndex& e : expected) {
      if (whitney_cell(e).distance_to(c) < r - 1e-12) {
        EXPECT_TRUE(std::find(got.begin(), got.end(), e) != got.end()) << e.n << ":" << e.m;
      }
    }
    for (const WhitneyIndex& g : got) EXPECT_LE(whitney_cell(g).distance_to(c), r + 1e-12);
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
  }
}

TEST(GeometryTest, WrapAngleAndPolar) {
  EXPECT_NEAR(wrap_angle(-0.5), kTwoPi - 0.5, 1e-15);
  EXPECT_NEAR(wrap_angle(7.0), 7.0 - kTwoPi, 1e-15);
  const Point p = from_polar(2.0, 1.0);
  EXPECT_NEAR(p.norm(), 2.0, 1e-15);
  EXPECT_NEAR(p.angle(), 1.0, 1e-15);
  EXPECT_NEAR(distance_to_segment({0.0, 1.0}, {-1.0, 0.0}, {1.0, 0.0}), 1.0, 1e-15);
  EXPECT_NEAR(distance_to_segment({3.0, 4.0}, {-1.0, 0.0}, {0.0, 0.0}), 5.0, 1e-15);
}

TEST(DiscTest, LogRadiusCarriesUnderflow) {
  const Disc d = Disc::from_log_radius({0.5, 0.0}, -1e4);
  EXPECT_EQ(d.radius, 0.0);
  EXPECT_EQ(d.log_radius, -1e4);
  EXPECT_NEAR(d.log_ratio(), std::log(0.5) + 1e4, 1e-9);
  const Disc e = Disc::make({0.0, 0.75}, 0.125);
  EXPECT_NEAR(e.log_radius, std::log(0.125), 1e-15);
  EXPECT_NEAR(e.boundary_gap(), 0.25, 1e-15);
}

TEST(CellsIntersectingDiscTest, SmallDiscsMeetAtMostFourCells) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const double delta = std::exp2(-1.0 - 15.0 * u(rng));
    const Point c = from_polar(1.0 - delta, kTwoPi * u(rng));
    const double r = delta / 128.0 * u(rng);
    const std::vector<WhitneyIndex> cells = cells_intersecting_disc(Disc::make(c, r));
    EXPECT_GE(cells.size(), 1u);
    EXPECT_LE(cells.size(), 4u);
  }
  // A common corner of two cells in each of generations 1 and 2.
  const Point corner = from_polar(0.75, kTwoPi * 4.0 / 64.0);
  EXPECT_EQ(cells_intersecting_disc(Disc::make(corner, 1e-6)).size(), 4u);
}

}  // namespace
}  // namespace champagne
