#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "champagne/capacity.h"
#include "champagne/generators.h"

namespace champagne {
namespace {

TEST(LogCapacityTest, DiscIsExact) {
  for (double r : {1e-6, 1e-3, 0.1, 0.7}) {
    const CapacityEstimate c = log_capacity(Shape::disc(Disc::make({0.3, -0.2}, r)));
    EXPECT_EQ(c.value, r);
    EXPECT_EQ(c.method, CapacityMethod::kExactDisc);
  }
  const CapacityEstimate tiny = log_capacity(Shape::disc(Disc::from_log_radius({0.5, 0.0}, -1e5)));
  EXPECT_EQ(tiny.log_value, -1e5);
  EXPECT_FALSE(tiny.polar());
}

TEST(LogCapacityTest, SegmentConvergesToQuarterLength) {
  double previous_error = kInf;
  for (int points : {128, 256, 512}) {
    CapacityOptions o;
    o.boundary_points = points;
    const double v = log_capacity(Shape::segment({0.0, 0.0}, {1.0, 0.0}), o).value;
    const double error = std::abs(v - 0.25);
    EXPECT_LT(error, 0.01);
    EXPECT_LT(error, 0.75 * previous_error);
    previous_error = error;
  }
}

TEST(LogCapacityTest, SquareMatchesGammaFormula) {
  // c(unit square) = Γ(1/4)^2 / (4 π^(3/2)).
  const double expected = std::pow(std::tgamma(0.25), 2) / (4.0 * std::pow(kPi, 1.5));
  Shape square;
  const Point corners[4] = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  for (int i = 0; i < 4; ++i) square.add(Shape::segment(corners[i], corners[(i + 1) % 4]));
  EXPECT_NEAR(log_capacity(square).value, expected, 0.01 * expected);
}

TEST(LogCapacityTest, DistantSmallDiscsBehaveLikeCharges) {
  // Two point charges of radius r at distance D: c = sqrt(r D).
  const double r = 1e-5;
  const double d = 0.5;
  Shape s = Shape::disc(Disc::make({0.0, 0.0}, r));
  s.add(Shape::disc(Disc::make({d, 0.0}, r)));
  const CapacityEstimate c = log_capacity(s);
  EXPECT_NEAR(c.value, std::sqrt(r * d), 1e-6 * std::sqrt(r * d));
}

TEST(LogCapacityTest, TwoDiscsAboveUniformCircleBound) {
  // Uniform measures on the two circles give energy (-log r - log D)/2, so
  // the capacity is at least sqrt(r D), and only slightly more.
  const double r = 0.1;
  const double d = 0.5;
  Shape s = Shape::disc(Disc::make({0.0, 0.0}, r));
  s.add(Shape::disc(Disc::make({d, 0.0}, r)));
  const double v = log_capacity(s).value;
  EXPECT_GE(v, std::sqrt(r * d) * (1.0 - 1e-3));
  EXPECT_LE(v, std::sqrt(r * d) * 1.05);
}

TEST(LogCapacityTest, ScalingAndMonotonicityOnClippedDiscs) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const WhitneyIndex idx = WhitneyIndex::make(2 + trial % 3, trial * 5);
    const WhitneyCell cell = whitney_cell(idx);
    const Point c = from_polar(cell.r_inner + u(rng) * (cell.r_outer - cell.r_inner),
                               cell.theta_lo + u(rng) * cell.angular_width());
    const double r = (0.3 + u(rng)) * (cell.r_outer - cell.r_inner);
    const Shape s = Shape::clipped_disc(Disc::make(c, r), idx);
    const CapacityEstimate base = log_capacity(s);
    ASSERT_FALSE(base.polar());
    EXPECT_LE(base.value, r * (1.0 + 1e-3));
    for (double a : {0.5, 2.0}) {
      EXPECT_NEAR(log_capacity(s.scaled(a)).log_value, base.log_value + std::log(a), 1e-9);
    }
  }
}

TEST(LogCapacityTest, DiscInsideItsCellStaysExact) {
  const WhitneyIndex idx = WhitneyIndex::make(3, 4);
  const Disc d = Disc::make(cell_center(idx), 1e-3);
  const CapacityEstimate c = log_capacity(Shape::clipped_disc(d, idx));
  EXPECT_EQ(c.method, CapacityMethod::kExactDisc);
  EXPECT_EQ(c.value, 1e-3);
}

TEST(LogCapacityTest, EmptyIntersectionIsPolar) {
  const Disc d = Disc::make(cell_center(WhitneyIndex::make(3, 4)), 1e-3);
  EXPECT_TRUE(log_capacity(Shape::clipped_disc(d, WhitneyIndex::make(3, 40))).polar());
  EXPECT_TRUE(log_capacity(Shape{}).polar());
}

TEST(C2Test, ClosedFormDiscValues) {
  EXPECT_NEAR(c2_disc(0.5).value, 1.0 / (0.5 * std::log(4.0) + 0.25), 1e-15);
  EXPECT_NEAR(c2_disc(0.5).value, 1.0603, 1e-4);
  for (double r : {1e-8, 1e-4, 0.01, 0.5}) {
    const C2Estimate e = c2_disc(r);
    EXPECT_LE(e.lower, e.value);
    EXPECT_LE(e.value, e.upper);
  }
  EXPECT_THROW(c2_disc(0.6), CapacityError);
  EXPECT_THROW(c2_disc(0.1, 1.0), CapacityError);
}

TEST(C2Test, EquilibriumValuesForDiscAndSegment) {
  EXPECT_NEAR(c2_capacity(Shape::disc(Disc::make({0.1, 0.1}, 0.2))).value, 1.0 / std::log(10.0), 1e-14);
  // Robin constant of a segment of length L is log(4/L).
  const double seg = c2_capacity(Shape::segment({0.0, 0.0}, {1.0, 0.0})).value;
  EXPECT_NEAR(seg, 1.0 / std::log(8.0), 0.01 / std::log(8.0));
  EXPECT_THROW(c2_capacity(Shape::segment({0.0, 0.0}, {2.5, 0.0})), CapacityError);
}

TEST(C2Test, SubadditiveOnSeparatedDiscs) {
  Shape s;
  double parts = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Disc d = Disc::make(from_polar(0.5, kTwoPi * k / 4), 1e-4);
    s.add(Shape::disc(d));
    parts += c2_capacity(Shape::disc(d)).value;
  }
  const double whole = c2_capacity(s).value;
  EXPECT_LE(whole, parts * (1.0 + 1e-6));
  EXPECT_GT(whole, 0.25 * parts);
}

TEST(QuasiadditivityTest, SingleDiscHasUnitRatio) {
  const WhitneyIndex idx = WhitneyIndex::make(4, 3);
  const std::vector<Disc> discs = {Disc::make(cell_center(idx), 1e-6)};
  const QuasiadditivityResult r = quasiadditivity_ratio(discs, idx, PaperConstants{});
  EXPECT_NEAR(r.ratio, 1.0, 1e-12);
  EXPECT_EQ(r.parts, 1u);
  EXPECT_THROW(quasiadditivity_ratio({}, idx, PaperConstants{}), CapacityError);
}

TEST(QuasiadditivityTest, GridCellRatioInUnitInterval) {
  GeneratorParams params;
  params.c0 = 1e-7;
  params.n_max = 3;
  const RingConfiguration c = generate_corollary(params);
  const PaperConstants k = PaperConstants::for_ratio(c.ratio_sup());
  const WhitneyIndex idx = WhitneyIndex::make(3, 11);
  const std::vector<Disc> discs = discs_meeting_cell(c, idx);
  ASSERT_EQ(discs.size(), 16u);
  const QuasiadditivityResult r = quasiadditivity_ratio(discs, idx, k);
  EXPECT_GT(r.ratio, 0.0);
  EXPECT_LE(r.ratio, 1.0 + 1e-6);
  const LoginCheck l = login_check(discs, idx, k);
  EXPECT_GT(l.lhs, 0.0);
  EXPECT_GT(l.rhs, 0.0);
}

TEST(PaperConstantsTest, ThresholdAndAlpha) {
  const PaperConstants k = PaperConstants::for_ratio(0.5);
  EXPECT_EQ(k.c1, 8.0);
  EXPECT_NEAR(k.quasisep_threshold(), 8.0 * std::sqrt(kPi) * 4.0 * 64.0, 1e-9);
  EXPECT_NEAR(k.alpha(3), 8.0 / (4.0 * kPi * 32.0), 1e-15);
}

TEST(EssenTest, SingleDiscTerm) {
  const WhitneyIndex idx = WhitneyIndex::make(3, 10);
  const double r = 1e-4;
  const Configuration c = Configuration::from_discs({Disc::make(cell_center(idx), r)});
  const BoundaryPoint y = BoundaryPoint::at(0.4);
  const double width = 0.125;
  const Point z = from_polar(1.0 - width, kTwoPi * 10 / 128.0);
  const double expected = std::pow(width / distance(z, y.point), 2) / std::log(width / r);
  EXPECT_NEAR(essen_sum(c, y, 3).total(), expected, 1e-12 * expected);
}

TEST(EssenTest, RingTemplatesMatchExplicitCells) {
  GeneratorParams params;
  params.n_max = 4;
  params.drop_first = 20;
  const RingConfiguration rings = generate_corollary(params);
  const Configuration c = rings.materialize();
  const EssenEvaluator ring_eval(rings, 4);
  const EssenEvaluator explicit_eval(c, 4);
  for (const BoundaryPoint& y : boundary_grid(5)) {
    const double a = ring_eval.evaluate(y).total();
    const double b = explicit_eval.evaluate(y).total();
    EXPECT_NEAR(a, b, 1e-6 * b);
  }
}

TEST(DiscsMeetingCellTest, RingMatchesExplicit) {
  GeneratorParams params;
  params.n_max = 4;
  const RingConfiguration rings = generate_corollary(params);
  const Configuration c = rings.materialize();
  for (int n = 1; n <= 4; ++n) {
    for (std::int64_t m = 0; m < cells_in_generation(n); m += 9) {
      const WhitneyIndex idx{n, m};
      EXPECT_EQ(discs_meeting_cell(rings, idx).size(), discs_meeting_cell(c, idx).size());
    }
  }
}

TEST(CertificateTest, RemarkCorollaryAndEmpty) {
  RemarkSchedule s;
  const RemarkCertificate good = remark_certificate(generate_remark_avoidable(s, 1.0 / (2.0 * std::log(4.0))));
  EXPECT_TRUE(good.issued);
  EXPECT_FALSE(good.trivial);
  EXPECT_GT(good.clearance, 0.0);
  GeneratorParams params;
  params.n_max = 4;
  const RemarkCertificate bad = remark_certificate(generate_corollary(params));
  EXPECT_FALSE(bad.issued);
  const RemarkCertificate empty = remark_certificate(Configuration{});
  EXPECT_TRUE(empty.issued);
  EXPECT_TRUE(empty.trivial);
  EXPECT_NEAR(green_capacity_disc_bound(0.01), 1.0 / std::log(100.0), 1e-15);
  EXPECT_THROW(green_capacity_disc_bound(1.0), CapacityError);
}

TEST(CellsCsvTest, Header) {
  const std::string csv = cells_csv({});
  EXPECT_EQ(csv, "n,m,multiplicity,log_capacity,capacity,method,c2,essen_weight,quasiadditivity_ratio\n");
}

}  // namespace
}  // namespace champagne
