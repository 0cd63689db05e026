#include <ostream>

#include <CLI11.hpp>

#include "champagne/serialization.h"
#include "commands.h"

namespace champagne::cli {
namespace {

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--out", o.out, "Output directory (default $CHAMPAGNE_OUT_DIR or ./out)");
  app->add_option("--threads", o.threads, "Worker threads (default $CHAMPAGNE_THREADS or 1)");
  app->add_option("--seed", o.seed, "Random seed, recorded in every output");
}

void add_family(CLI::App* app, FamilyOptions& f, bool with_family) {
  if (with_family) {
    app->add_option("--family", f.family, "corollary | phi-grid | remark")
        ->check(CLI::IsMember({"corollary", "phi-grid", "remark"}));
  }
  app->add_option("--alpha", f.alpha, "Budget exponent alpha");
  app->add_option("--beta", f.beta, "Growth exponent beta");
  app->add_option("--c0", f.c0, "Radius constant c0");
  app->add_option("--n-min", f.n_min, "First generation");
  app->add_option("--n-max", f.n_max, "Last generation");
  app->add_option("--drop-first", f.drop_first, "Drop the first discs in canonical order");
  app->add_flag("--no-certify", f.no_certify, "Allow beta <= 1/(alpha-1)");
  app->add_option("--per-cell", f.per_cell, "Subsquares per cell side (phi-grid)");
  app->add_option("--rule", f.rule, "Remark radius schedule: geometric | fill");
  app->add_option("--count", f.count, "Remark disc count");
  app->add_option("--target", f.target, "Remark budget target (default 1/(2 log 4))");
  app->add_option("--ring-radius", f.ring_radius, "Remark ring radius");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Champagne subregion toolkit: generators, criteria, capacities and escape simulation"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a configuration file");
  add_common(generate, gen.common);
  add_family(generate, gen.family, true);
  generate->add_option("--format", gen.format, "auto | explicit | rings");
  generate->add_option("--output", gen.output, "File name inside the output directory");

  CheckOptions chk;
  auto* check = app.add_subcommand("check", "Evaluate the analytic criteria over a y-grid");
  add_common(check, chk.common);
  check->add_option("--config", chk.config, "Configuration file")->required();
  check->add_option("--y-grid", chk.y_grid, "Number of boundary points");
  check->add_option("--alpha", chk.alpha, "Budget exponent (default: generator alpha or 2)");
  check->add_option("--n-lo", chk.n_lo, "First generation of the growth fit");
  check->add_option("--n-hi", chk.n_hi, "Last generation of the growth fit");
  check->add_option("--essen-n-max", chk.essen_n_max, "Deepest generation of the Essen sum");
  check->add_option("--criteria", chk.criteria,
                    "Subset of series, separation, budget, integral, essen, quasisep, certificate")
      ->delimiter(',');

  CapacityCliOptions cap;
  auto* capacity = app.add_subcommand("capacity", "Cell capacities, C2 and quasiadditivity");
  add_common(capacity, cap.common);
  capacity->add_option("--config", cap.config, "Configuration file");
  capacity->add_option("--disc", cap.disc, "Capacity of a single disc of this radius");
  capacity->add_option("--segment", cap.segment, "Capacity of a segment of this length");
  capacity->add_option("--cells", cap.cells, "Cells as n:m")->delimiter(',');
  capacity->add_option("--per-generation", cap.per_generation, "Sampled cells per generation");
  capacity->add_option("--n-lo", cap.n_lo, "First sampled generation");
  capacity->add_option("--n-hi", cap.n_hi, "Last sampled generation");
  capacity->add_flag("--quasiadditivity", cap.quasiadditivity, "Also compute C2 ratios and login checks");
  capacity->add_option("--c3", cap.c3, "C2 bracket constant");
  capacity->add_option("--boundary-points", cap.boundary_points, "Elements per circle or segment");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Walk-on-spheres escape probabilities");
  add_common(simulate, sim.common);
  add_family(simulate, sim.family, false);
  simulate->add_option("--config", sim.config, "Configuration file (truncated at each depth)");
  simulate->add_option("--preset", sim.preset, "annulus | corollary | remark")
      ->check(CLI::IsMember({"annulus", "corollary", "remark"}));
  simulate->add_option("--depths", sim.depths, "Truncation depths n_max")->delimiter(',');
  simulate->add_option("--walks", sim.walks, "Walks per depth");
  simulate->add_option("--eps", sim.eps, "Absorption shell width");
  simulate->add_option("--max-steps", sim.max_steps, "Censoring limit");
  simulate->add_option("--start", sim.start, "Start point x,y")->delimiter(',');
  simulate->add_option("--r0", sim.r0, "Annulus inner radius");
  simulate->add_option("--s", sim.s, "Annulus start radius");
  simulate->add_flag("--trace", sim.trace, "Write per-walk traces");

  SweepOptions swp;
  auto* sweep = app.add_subcommand("sweep", "Criteria and escape over a family of depths");
  add_common(sweep, swp.common);
  add_family(sweep, swp.family, true);
  sweep->add_option("--depths", swp.depths, "Truncation depths n_max")->delimiter(',');
  sweep->add_option("--walks", swp.walks, "Walks per depth");
  sweep->add_option("--eps", swp.eps, "Absorption shell width");
  sweep->add_option("--y-grid", swp.y_grid, "Number of boundary points");

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Cross-check verdicts from check and simulate outputs");
  add_common(report, rep.common);
  report->add_option("--dir", rep.dir, "Directory holding check.json and simulate.json");
  report->add_option("--min-separation", rep.min_separation, "Floor for the sep3 statistic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*check) return cmd_check(chk, out);
    if (*capacity) return cmd_capacity(cap, out);
    if (*simulate) {
      if (sim.preset.empty() && sim.config.empty()) throw ValidationFailure("give --config or --preset");
      return cmd_simulate(sim, out);
    }
    if (*sweep) return cmd_sweep(swp, out);
    if (*report) return cmd_report(rep, out);
  } catch (const ValidationFailure& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& d : e.details) err << "  " << d << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace champagne::cli
