// Acceptance suite: prints one PASS/FAIL line per criterion. With
// `--criterion N` only criterion N runs; the exit status is nonzero when any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "champagne/capacity.h"
#include "champagne/criteria.h"
#include "champagne/generators.h"
#include "champagne/serialization.h"
#include "champagne/walker.h"
#include "champagne_cli/cli.h"

namespace champagne {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

GeneratorParams corollary_params(int n_max, double c0 = 0.05) {
  GeneratorParams p;
  p.alpha = 2.0;
  p.beta = 1.5;
  p.c0 = c0;
  p.n_max = n_max;
  return p;
}

// 1. Escape from |x| = s in the annulus r0 < |x| < 1.
Outcome annulus_oracle() {
  Outcome out{true, ""};
  const std::vector<std::pair<double, double>> cases = {{0.25, 0.5}, {0.1, 0.55}, {0.5, 0.75}};
  for (const auto& [r0, s] : cases) {
    const Configuration c = Configuration::from_discs({Disc::make({0.0, 0.0}, r0)});
    WalkParams params;
    params.n_walks = 100000;
    params.eps_shell = 1e-4;
    params.start = {s, 0.0};
    const EscapeEstimate e = estimate_escape(params, SpatialIndex(c));
    // Closed form derived independently: harmonic measure of |x| = 1 in the
    // annulus is log(s/r0)/log(1/r0).
    const double expected = std::log(s / r0) / std::log(1.0 / r0);
    const double tol = std::max(3.0 * e.ci95_halfwidth, 0.01);
    const bool ok = std::abs(e.p_escape - expected) <= tol;
    out.pass = out.pass && ok;
    out.detail += "(" + fmt(r0) + "," + fmt(s) + "): " + fmt(e.p_escape, 5) + " vs " + fmt(expected, 5) + "; ";
  }
  return out;
}

// 2. Exact disc capacity, segment capacity and homogeneity.
Outcome capacity_exactness() {
  Outcome out{true, ""};
  for (double r : {1e-6, 1e-3, 1e-1}) {
    const double v = log_capacity(Shape::disc(Disc::make({0.6, 0.1}, r))).value;
    if (std::abs(v - r) > 2.0 * std::numeric_limits<double>::epsilon() * r) {
      out.pass = false;
      out.detail += "disc " + fmt(r) + " gives " + fmt(v, 17) + "; ";
    }
  }
  out.detail += "discs exact; ";
  const double seg = log_capacity(Shape::segment({0.0, 0.0}, {1.0, 0.0})).value;
  const double seg_err = std::abs(seg / 0.25 - 1.0);
  out.pass = out.pass && seg_err <= 0.05;
  out.detail += "segment " + fmt(seg) + " (rel err " + fmt(seg_err, 3) + "); ";

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    const WhitneyIndex idx = WhitneyIndex::make(n, static_cast<std::int64_t>(u(rng) * cells_in_generation(n)));
    const WhitneyCell cell = whitney_cell(idx);
    std::vector<Disc> discs;
    const int k = 1 + trial % 3;
    const double h = cell.r_outer - cell.r_inner;
    for (int i = 0; i < k; ++i) {
      const Point c = from_polar(cell.r_inner + u(rng) * h, cell.theta_lo + u(rng) * cell.angular_width());
      discs.push_back(Disc::make(c, (0.05 + 0.4 * u(rng)) * h));
    }
    const Shape shape = cell_shape(discs, idx);
    const double a = std::exp(std::log(0.1) + u(rng) * std::log(100.0));
    const CapacityEstimate base = log_capacity(shape);
    const CapacityEstimate scaled = log_capacity(shape.scaled(a));
    worst = std::max(worst, std::abs(std::expm1(scaled.log_value - base.log_value - std::log(a))));
  }
  out.pass = out.pass && worst <= 0.01;
  out.detail += "scaling worst rel err " + fmt(worst, 3) + " over 20 clipped unions";
  return out;
}

// 3. C2 ball bracket and small-radius asymptotics.
Outcome c2_bracket() {
  Outcome out{true, ""};
  int outside = 0;
  const int points = 60;
  for (int i = 0; i <= points; ++i) {
    const double r = i == points ? 0.5 : std::exp(std::log(1e-8) + (std::log(0.5) - std::log(1e-8)) * i / points);
    const double v = c2_disc(r, 4.0).value;
    const double inv_log = 1.0 / std::log(1.0 / r);
    if (!(v >= inv_log / 4.0 && v <= 4.0 * inv_log)) ++outside;
  }
  out.pass = outside == 0;
  out.detail = std::to_string(outside) + " of " + std::to_string(points + 1) + " grid radii outside [1/4, 4]/log(1/r); ";
  const double r = 1e-6;
  const double product = c2_disc(r).value * std::log(1.0 / r);
  const double rel = std::abs(product / 2.0 - 1.0);
  out.pass = out.pass && rel <= 0.05;
  out.detail += "value*log(1/r) at r=1e-6 is " + fmt(product, 5) + " vs limit 2 (rel dev " + fmt(rel, 3) + ")";
  return out;
}

// 4. Integral test against c0 log(1/(1-T)).
Outcome integral_identity() {
  Outcome out{true, ""};
  const double c0 = 0.05;
  const double beta = 1.5;
  for (double T : {0.9, 0.99, 0.999}) {
    const double v = integral_test(MSpec{beta}, PhiSpec::exp_power(c0, beta), T).value;
    const double expected = c0 * std::log(1.0 / (1.0 - T));
    const double rel = std::abs(v / expected - 1.0);
    out.pass = out.pass && rel <= 1e-6;
    out.detail += "T=" + fmt(T) + ": rel err " + fmt(rel, 3) + "; ";
  }
  return out;
}

// 5. Budget series bound and the power-log inequality.
Outcome corollary_budget() {
  Outcome out;
  const GeneratorParams p = corollary_params(12);
  const RingConfiguration c = generate_corollary(p);
  const double sum = budget_sums(c, p.alpha).sum_log_inv_alpha;
  // Bound evaluated here from its definition: 16 c0^α Σ_{n<=12} 2^{-0.5 n}.
  double geometric = 0.0;
  for (int n = 1; n <= 12; ++n) geometric += std::pow(2.0, -0.5 * n);
  const double bound = 16.0 * p.c0 * p.c0 * geometric;
  out.pass = sum <= bound;
  out.detail = "sum " + fmt(sum) + " <= bound " + fmt(bound) + "; ";
  int violations = 0;
  for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
    const double k = power_log_constant(alpha);
    for (int i = 1; i <= 400; ++i) {
      const double log_inv = std::pow(10.0, -3.0 + 7.0 * i / 400.0);  // log(1/r) in [1e-3, 1e4]
      if (std::exp(-alpha * log_inv) > k * std::pow(log_inv, -2.0) * (1.0 + 1e-12)) ++violations;
    }
  }
  out.pass = out.pass && violations == 0;
  out.detail += std::to_string(violations) + " violations of r^a <= c(a) log(1/r)^-2 on 1600 grid points";
  return out;
}

// 6. Cumulative series affine in n over 6..12 at every y.
Outcome divergence_signature() {
  const RingConfiguration c = generate_corollary(corollary_params(12));
  int bad = 0;
  double min_slope = kInf;
  double worst_residual = 0.0;
  for (const BoundaryPoint& y : boundary_grid(64)) {
    const GrowthFit fit = fit_growth(theorem1_series(c, y), 6, 12);
    min_slope = std::min(min_slope, fit.slope);
    worst_residual = std::max(worst_residual, fit.residual_fraction);
    if (!(fit.slope > 0.0 && fit.residual_fraction < 0.2)) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " of 64 y fail; min slope " + fmt(min_slope) + ", worst residual/range " +
                        fmt(worst_residual, 3)};
}

// 7. sep3 over n_max = 6..12.
Outcome separation_stability() {
  double lo = kInf;
  double hi = 0.0;
  std::string values;
  for (int n = 6; n <= 12; ++n) {
    const GeneratorParams p = corollary_params(n);
    const double v = separation(generate_corollary(p), SeparationKind::kSep3, p.phi()).value;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    values += fmt(v, 5) + " ";
  }
  const double spread = (hi - lo) / hi;
  return {lo > 0.0 && spread < 0.05, "sep3 = " + values + "(spread " + fmt(spread, 3) + ")"};
}

// 8. Essén sum against the log-weighted series.
Outcome essen_comparability() {
  double lo = kInf;
  double hi = 0.0;
  for (int depth : {6, 8, 10, 12}) {
    const RingConfiguration c = generate_corollary(corollary_params(depth));
    const EssenEvaluator essen(c, depth);
    for (const BoundaryPoint& y : boundary_grid(64)) {
      const SeriesReport e = essen.evaluate(y);
      const SeriesReport t = theorem1_series(c, y);
      for (int n = 1; n <= depth; ++n) {
        const double ratio = e.cumulative_at(n) / t.cumulative_at(n);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    }
  }
  const double factor = std::max(hi, 1.0 / lo);
  return {factor <= 50.0, "ratio range [" + fmt(lo, 4) + ", " + fmt(hi, 4) + "], factor C = " + fmt(factor, 4)};
}

// 9. Quasiadditivity on cells of a configuration satisfying quasisep.
Outcome quasiadditivity() {
  const GeneratorParams p = corollary_params(6, 1e-7);
  const RingConfiguration c = generate_corollary(p);
  const PaperConstants k = PaperConstants::for_ratio(c.ratio_sup());
  const QuasisepCheck q = check_quasisep(c, k);
  if (!q.satisfied) return {false, "quasisep not satisfied: " + fmt(q.statistic) + " < " + fmt(q.threshold)};
  const double tolerance = 1e-3;
  double lo = kInf;
  double hi = 0.0;
  int cells = 0;
  for (int n = 1; n <= 6; ++n) {
    const std::int64_t count = cells_in_generation(n);
    const std::int64_t stride = std::max<std::int64_t>(1, count / 24);
    for (std::int64_t m = 0; m < count; m += stride) {
      const WhitneyIndex idx{n, m};
      const QuasiadditivityResult r = quasiadditivity_ratio(discs_meeting_cell(c, idx), idx, k);
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
      ++cells;
    }
  }
  const bool ok = cells >= 100 && lo > 0.0 && hi <= 1.0 + tolerance;
  return {ok, std::to_string(cells) + " cells, quasisep " + fmt(q.statistic) + " >= " + fmt(q.threshold) +
                  ", ratio range [" + fmt(lo, 12) + ", " + fmt(hi, 12) + "]"};
}

// 10. Budget certificate and escape probability of the avoidable example at
// every truncation depth.
Outcome avoidable_example() {
  const double threshold = 1.0 / (2.0 * std::log(4.0));
  Outcome out{true, ""};
  RemarkSchedule s;
  s.count = 8;
  const Configuration full = generate_remark_avoidable(s, threshold);
  for (int depth : {6, 8, 10, 12}) {
    const Configuration c = truncate(full, depth, 0);
    const RemarkCertificate cert = remark_certificate(c);
    WalkParams params;
    params.n_walks = 100000;
    const EscapeEstimate e = estimate_escape(params, c);
    const bool ok = cert.issued && e.p_escape >= 0.45 && !e.unreliable;
    out.pass = out.pass && ok;
    out.detail += "n=" + std::to_string(depth) + ": " + std::to_string(c.size()) + " discs, budget " +
                  fmt(cert.budget, 4) + (cert.issued ? " certified" : " NOT certified") + ", p " +
                  fmt(e.p_escape, 4) + "; ";
  }
  return out;
}

// 11. Escape probability decreasing in depth.
Outcome unavoidability_trend() {
  GeneratorParams p;
  p.alpha = 4.0;
  p.beta = 0.5;
  p.c0 = 0.05;
  WalkParams params;
  params.n_walks = 100000;
  std::vector<EscapeEstimate> rows;
  Outcome out{true, "alpha 4, beta 0.5, c0 0.05: "};
  for (int depth : {6, 8, 10, 12}) {
    p.n_max = depth;
    rows.push_back(estimate_escape(params, RingField(generate_corollary(p))));
    out.detail += "n=" + std::to_string(depth) + " p " + fmt(rows.back().p_escape, 4) + " +- " +
                  fmt(rows.back().ci95_halfwidth, 2) + "; ";
    out.pass = out.pass && !rows.back().unreliable;
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double margin = 2.0 * std::max(rows[i - 1].ci95_halfwidth, rows[i].ci95_halfwidth);
    out.pass = out.pass && rows[i - 1].p_escape - rows[i].p_escape > margin;
  }
  return out;
}

// 12. Byte-identical outputs across reruns and thread counts.
int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "champagne");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  return cli::run(static_cast<int>(argv.size()), argv.data(), sink, sink);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = read_text_file(entry.path());
  }
  return files;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "champagne_acceptance_determinism";
  const std::string dir = (root / "out").string();
  const std::string cfg = (root / "out" / "configuration.json").string();
  auto pipeline = [&](const std::string& threads) {
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> commands = {
        {"generate", "--n-max", "6", "--seed", "5"},
        {"check", "--config", cfg, "--y-grid", "16"},
        {"capacity", "--config", cfg, "--per-generation", "2", "--n-hi", "4"},
        {"capacity", "--segment", "1", "--out", (root / "segment").string()},
        {"simulate", "--config", cfg, "--depths", "4,6", "--walks", "3000", "--trace", "--seed", "7"},
        {"sweep", "--n-max", "6", "--depths", "4,6", "--walks", "2000", "--y-grid", "8", "--out",
         (root / "sweep").string()},
        {"report", "--dir", dir},
    };
    int failures = 0;
    for (auto args : commands) {
      if (std::find(args.begin(), args.end(), "--out") == args.end()) {
        args.push_back("--out");
        args.push_back(dir);
      }
      args.push_back("--threads");
      args.push_back(threads);
      if (run_cli(args) != cli::kExitOk) ++failures;
    }
    return std::make_pair(failures, snapshot(root));
  };
  const auto [fail_a, first] = pipeline("1");
  const auto [fail_b, second] = pipeline("3");
  const auto [fail_c, third] = pipeline("1");
  fs::remove_all(root);
  int differing = 0;
  for (const auto& [name, bytes] : first) {
    const auto b = second.find(name);
    const auto c = third.find(name);
    if (b == second.end() || c == third.end() || b->second != bytes || c->second != bytes) ++differing;
  }
  const bool ok = fail_a + fail_b + fail_c == 0 && differing == 0 && first.size() == second.size() &&
                  first.size() == third.size() && !first.empty();
  return {ok, std::to_string(first.size()) + " files from 7 commands, threads 1/3/1; " + std::to_string(differing) +
                  " differ; " + std::to_string(fail_a + fail_b + fail_c) + " command failures"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace champagne

int main(int argc, char** argv) {
  using champagne::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "annulus oracle", champagne::annulus_oracle},
      {2, "capacity exactness and scaling", champagne::capacity_exactness},
      {3, "C2 ball bracket", champagne::c2_bracket},
      {4, "integral identity", champagne::integral_identity},
      {5, "budget bound", champagne::corollary_budget},
      {6, "divergence signature", champagne::divergence_signature},
      {7, "separation stability", champagne::separation_stability},
      {8, "Essen comparability", champagne::essen_comparability},
      {9, "quasiadditivity", champagne::quasiadditivity},
      {10, "avoidable certificate and escape", champagne::avoidable_example},
      {11, "unavoidability trend", champagne::unavoidability_trend},
      {12, "determinism", champagne::determinism},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    champagne::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s: %s [%s] (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                seconds);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
