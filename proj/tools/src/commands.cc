#include "commands.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "champagne/capacity.h"
#include "champagne/criteria.h"
#include "champagne/generators.h"
#include "champagne/numeric.h"
#include "champagne/serialization.h"
#include "champagne/walker.h"

namespace champagne::cli {
namespace fs = std::filesystem;

namespace {

double remark_threshold() { return 1.0 / (2.0 * std::log(4.0)); }

// ---------------------------------------------------------------------------
// Configuration helpers over both representations.

std::size_t disc_count(const AnyConfiguration& c) {
  return std::visit([](const auto& x) { return static_cast<std::size_t>(x.size()); }, c);
}

int config_n_max(const AnyConfiguration& c) {
  if (const auto* e = std::get_if<Configuration>(&c)) return e->n_max;
  return std::get<RingConfiguration>(c).n_max();
}

double config_ratio_sup(const AnyConfiguration& c) {
  if (const auto* e = std::get_if<Configuration>(&c)) return e->ratio_sup;
  return std::get<RingConfiguration>(c).ratio_sup();
}

const nlohmann::json& config_provenance(const AnyConfiguration& c) {
  if (const auto* e = std::get_if<Configuration>(&c)) return e->provenance;
  return std::get<RingConfiguration>(c).provenance();
}

nlohmann::json generation_counts(const AnyConfiguration& c) {
  std::map<int, std::uint64_t> counts;
  if (const auto* e = std::get_if<Configuration>(&c)) {
    for (const Disc& d : e->discs) ++counts[generation_of(d.boundary_gap())];
  } else {
    for (const auto& [n, k] : std::get<RingConfiguration>(c).generation_counts()) counts[n] += k;
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [n, k] : counts) out.push_back({{"n", n}, {"count", k}});
  return out;
}

nlohmann::json to_document(const AnyConfiguration& c) {
  return std::visit([](const auto& x) { return to_json(x); }, c);
}

void validate_any(const AnyConfiguration& c) {
  if (const auto* e = std::get_if<Configuration>(&c)) {
    const ValidationReport report = validate_configuration(*e);
    if (!report.valid) throw ValidationFailure("invalid configuration", report.messages());
    return;
  }
  const auto& rc = std::get<RingConfiguration>(c);
  if (!(rc.ratio_sup() < 1.0)) throw ValidationFailure("invalid configuration", {"ratio_sup >= 1"});
  const RingOverlapReport overlap = check_ring_disjointness(rc);
  if (!overlap.disjoint) {
    throw ValidationFailure("invalid configuration", {"discs " + std::to_string(overlap.first) + " and " +
                                                      std::to_string(overlap.second) + " overlap"});
  }
}

struct Loaded {
  AnyConfiguration config;
  std::string hash;
};

Loaded load_configuration(const std::string& path) {
  if (path.empty()) throw ValidationFailure("--config is required");
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationFailure(std::string("malformed configuration: ") + e.what());
  }
  Loaded out{any_from_json(j), hash_hex(text)};
  validate_any(out.config);
  return out;
}

AnyConfiguration truncate_any(const AnyConfiguration& c, int n_max) {
  return std::visit([&](const auto& x) -> AnyConfiguration { return truncate(x, n_max, 0); }, c);
}

std::unique_ptr<ObstacleField> make_field(const AnyConfiguration& c) {
  if (const auto* e = std::get_if<Configuration>(&c)) return std::make_unique<SpatialIndex>(*e);
  return std::make_unique<RingField>(std::get<RingConfiguration>(c));
}

// ---------------------------------------------------------------------------
// Families.

GeneratorParams generator_params(const FamilyOptions& f, int n_max) {
  GeneratorParams g;
  g.alpha = f.alpha;
  g.beta = f.beta;
  g.c0 = f.c0;
  g.n_min = f.n_min;
  g.n_max = n_max;
  g.drop_first = f.drop_first;
  g.certify_budget = !f.no_certify;
  return g;
}

RemarkSchedule remark_schedule(const FamilyOptions& f, int count) {
  RemarkSchedule s;
  if (f.rule == "geometric") {
    s.rule = RemarkSchedule::Rule::kGeometric;
  } else if (f.rule == "fill") {
    s.rule = RemarkSchedule::Rule::kFill;
  } else {
    throw ValidationFailure("unknown remark rule '" + f.rule + "'");
  }
  s.count = count;
  s.ring_radius = f.ring_radius;
  return s;
}

double family_target(const FamilyOptions& f) { return f.target > 0.0 ? f.target : remark_threshold(); }

nlohmann::json family_json(const FamilyOptions& f) {
  nlohmann::json j = {{"family", f.family}};
  if (f.family == "remark") {
    j["rule"] = f.rule;
    j["count"] = f.count;
    j["target"] = family_target(f);
    j["ring_radius"] = f.ring_radius;
  } else {
    j["alpha"] = f.alpha;
    j["beta"] = f.beta;
    j["c0"] = f.c0;
    j["n_min"] = f.n_min;
    j["n_max"] = f.n_max;
    j["drop_first"] = f.drop_first;
    j["certify_budget"] = !f.no_certify;
    if (f.family == "phi-grid") j["per_cell"] = f.per_cell;
  }
  return j;
}

// Truncation of the family at generation `depth`.
AnyConfiguration build_family(const FamilyOptions& f, int depth) {
  if (f.family == "corollary") return generate_corollary(generator_params(f, depth));
  if (f.family == "phi-grid") {
    return generate_phi_grid(PhiSpec::exp_power(f.c0, f.beta), f.per_cell, f.n_min, depth);
  }
  if (f.family == "remark") {
    return truncate(generate_remark_avoidable(remark_schedule(f, f.count), family_target(f)), depth, 0);
  }
  throw ValidationFailure("unknown family '" + f.family + "'");
}

int family_depth(const FamilyOptions& f) { return f.n_max; }

// ---------------------------------------------------------------------------
// Output.

RunSpec make_spec(const std::string& command, const CommonOptions& common, nlohmann::json params) {
  RunSpec spec;
  spec.command = command;
  spec.params = std::move(params);
  spec.seed = common.seed;
  spec.out_dir = resolve_out_dir(common.out);
  spec.threads = resolve_threads(common.threads);
  return spec;
}

std::string params_hash(const RunSpec& spec) { return hash_hex(dump_document(spec.params)); }

std::string csv_document(const nlohmann::json& envelope, const std::string& body) {
  std::string header = dump_document(envelope);
  header.pop_back();
  return "# " + header + "\n" + body;
}

void write_json(const RunSpec& spec, const std::string& name, const nlohmann::json& doc) {
  write_text_file(spec.out_dir / name, dump_document(doc));
}

void write_csv(const RunSpec& spec, const std::string& name, const nlohmann::json& envelope,
               const std::string& body) {
  write_text_file(spec.out_dir / name, csv_document(envelope, body));
}

nlohmann::json real_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

nlohmann::json configuration_summary(const AnyConfiguration& c) {
  return {{"kind", std::holds_alternative<Configuration>(c) ? "explicit" : "rings"},
          {"discs", disc_count(c)},
          {"n_max", config_n_max(c)},
          {"ratio_sup", config_ratio_sup(c)},
          {"generations", generation_counts(c)}};
}

std::vector<int> default_depths(const SimulateOptions& o) {
  if (!o.depths.empty()) return o.depths;
  return {6, 8, 10, 12};
}

WalkParams walk_params(const RunSpec& spec, std::int64_t walks, double eps, std::int64_t max_steps) {
  if (walks < 1) throw ValidationFailure("--walks must be at least 1");
  WalkParams p;
  p.n_walks = walks;
  p.eps_shell = eps;
  p.max_steps = max_steps;
  p.seed = spec.seed;
  p.threads = spec.threads;
  return p;
}

// Strictly decreasing beyond `sigmas` times the larger CI between
// consecutive rows.
bool strictly_decreasing(const std::vector<DepthRow>& rows, double sigmas) {
  if (rows.size() < 2) return false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const EscapeEstimate& a = rows[i - 1].estimate;
    const EscapeEstimate& b = rows[i].estimate;
    const double margin = sigmas * std::max(a.ci95_halfwidth, b.ci95_halfwidth);
    if (!(a.p_escape - b.p_escape > margin)) return false;
  }
  return true;
}

bool wants(const std::vector<std::string>& selected, const std::string& name) {
  return selected.empty() || std::find(selected.begin(), selected.end(), name) != selected.end();
}

std::optional<std::pair<MSpec, PhiSpec>> corollary_pair(const nlohmann::json& provenance) {
  if (provenance.value("generator", "") != "corollary" || !provenance.contains("params")) return std::nullopt;
  const auto& p = provenance["params"];
  MSpec m;
  m.beta = p.at("beta").get<double>();
  return std::make_pair(m, PhiSpec::exp_power(p.at("c0").get<double>(), p.at("beta").get<double>()));
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  RunSpec spec = make_spec("generate", o.common, family_json(o.family));
  spec.params["format"] = o.format;
  AnyConfiguration c = build_family(o.family, family_depth(o.family));
  if (o.format == "explicit" || (o.format == "auto" && o.family.family == "remark")) {
    if (auto* rc = std::get_if<RingConfiguration>(&c)) c = rc->materialize();
  } else if (o.format == "rings") {
    if (std::holds_alternative<Configuration>(c)) throw ValidationFailure("family has no ring form");
  } else if (o.format != "auto") {
    throw ValidationFailure("unknown format '" + o.format + "'");
  }
  const nlohmann::json envelope = spec.envelope(params_hash(spec));
  if (auto* e = std::get_if<Configuration>(&c)) {
    e->provenance["run"] = envelope;
  } else {
    std::get<RingConfiguration>(c).provenance()["run"] = envelope;
  }
  write_text_file(spec.out_dir / o.output, dump_document(to_document(c)));
  out << "wrote " << (spec.out_dir / o.output).string() << " (" << disc_count(c) << " discs)\n";
  for (const auto& g : generation_counts(c)) {
    out << "generation " << g["n"].get<int>() << ": " << g["count"].get<std::uint64_t>() << " discs\n";
  }
  if (o.family.family == "remark") {
    const RemarkCertificate cert = remark_certificate(std::get<Configuration>(c));
    out << (cert.issued ? "avoidable budget satisfied" : "avoidable budget NOT satisfied") << ": budget "
        << format_real(cert.budget) << " vs " << format_real(cert.threshold) << "\n";
  }
  return kExitOk;
}

int cmd_check(const CheckOptions& o, std::ostream& out) {
  const Loaded loaded = load_configuration(o.config);
  const AnyConfiguration& c = loaded.config;
  if (o.y_grid < 1) throw ValidationFailure("--y-grid must be at least 1");
  RunSpec spec = make_spec("check", o.common,
                           {{"config", o.config}, {"y_grid", o.y_grid}, {"alpha", o.alpha}, {"n_lo", o.n_lo},
                            {"n_hi", o.n_hi}, {"essen_n_max", o.essen_n_max}, {"criteria", o.criteria}});
  const nlohmann::json envelope = spec.envelope(loaded.hash);
  nlohmann::json doc = envelope;
  doc["configuration"] = configuration_summary(c);
  const int n_max = config_n_max(c);
  const nlohmann::json& prov = config_provenance(c);
  const auto ys = boundary_grid(o.y_grid);
  const bool empty = disc_count(c) == 0;

  std::vector<SeriesReport> theorem1;
  if (wants(o.criteria, "series") || wants(o.criteria, "essen")) {
    for (const auto& y : ys) theorem1.push_back(std::visit([&](const auto& x) { return theorem1_series(x, y); }, c));
  }
  if (wants(o.criteria, "series")) {
    std::vector<SeriesReport> poisson;
    for (const auto& y : ys) poisson.push_back(std::visit([&](const auto& x) { return poisson_series(x, y); }, c));
    nlohmann::json s = {{"y_grid", o.y_grid}};
    const int hi = o.n_hi > 0 ? o.n_hi : n_max;
    const int lo = std::min(o.n_lo, hi - 1);
    s["n_lo"] = lo;
    s["n_hi"] = hi;
    nlohmann::json summary = nlohmann::json::array();
    for (const GridSummary& g : summarize_grid(theorem1)) {
      summary.push_back({{"n", g.n}, {"min", g.min}, {"median", g.median}, {"max", g.max}});
    }
    s["theorem1_summary"] = summary;
    double total_min = kInf, total_max = 0.0, poisson_max = 0.0;
    for (const auto& r : theorem1) {
      total_min = std::min(total_min, r.total());
      total_max = std::max(total_max, r.total());
    }
    for (const auto& r : poisson) poisson_max = std::max(poisson_max, r.total());
    s["theorem1_total_min"] = empty ? 0.0 : total_min;
    s["theorem1_total_max"] = total_max;
    s["poisson_total_max"] = poisson_max;
    if (!empty && hi - lo >= 2 && lo >= 1) {
      double min_slope = kInf, max_resid = 0.0, min_tail = kInf;
      int divergent = 0, affine = 0;
      for (const auto& r : theorem1) {
        const GrowthFit fit = fit_growth(r, lo, hi);
        min_slope = std::min(min_slope, fit.slope);
        max_resid = std::max(max_resid, fit.residual_fraction);
        min_tail = std::min(min_tail, fit.tail_ratio);
        divergent += fit.label == "consistent with divergence";
        affine += fit.affine;
      }
      s["growth"] = {{"min_slope", min_slope},         {"max_residual_fraction", max_resid},
                     {"min_tail_ratio", min_tail},     {"divergent_count", divergent},
                     {"affine_count", affine},         {"all_divergent", divergent == o.y_grid},
                     {"all_affine", affine == o.y_grid}};
    } else {
      s["growth"] = {{"all_divergent", false}, {"all_affine", false}, {"note", "not enough generations"}};
    }
    doc["series"] = s;
    write_csv(spec, "series.csv", envelope, series_csv(theorem1));
    write_csv(spec, "poisson.csv", envelope, series_csv(poisson));
  }

  if (wants(o.criteria, "separation") && !empty) {
    nlohmann::json s = nlohmann::json::object();
    const std::optional<PhiSpec> phi =
        corollary_pair(prov) ? std::optional<PhiSpec>(corollary_pair(prov)->second) : std::nullopt;
    for (SeparationKind kind : {SeparationKind::kSep0, SeparationKind::kSep, SeparationKind::kSep3}) {
      const SeparationReport r = std::visit([&](const auto& x) { return separation(x, kind, phi); }, c);
      s[to_string(kind)] = {{"value", real_or_null(r.value)}, {"pair", {r.argmin_pair.first, r.argmin_pair.second}}};
    }
    doc["separation"] = s;
  }

  if (wants(o.criteria, "budget")) {
    double alpha = o.alpha;
    if (!(alpha > 0.0)) alpha = prov.contains("params") ? prov["params"].value("alpha", 2.0) : 2.0;
    const BudgetSums b = std::visit([&](const auto& x) { return budget_sums(x, alpha); }, c);
    nlohmann::json s = {{"alpha", alpha},
                        {"sum_r_alpha", b.sum_r_alpha},
                        {"sum_log_inv_alpha", b.sum_log_inv_alpha},
                        {"sum_log_inv_1", b.sum_log_inv_1},
                        {"power_log_constant", power_log_constant(alpha)}};
    if (prov.value("generator", "") == "corollary") {
      const auto& p = prov["params"];
      const double bound = corollary_budget_bound(p.at("c0").get<double>(), alpha, p.at("beta").get<double>(),
                                                  p.at("n_min").get<int>(), p.at("n_max").get<int>());
      s["corollary_bound"] = bound;
      s["within_bound"] = b.sum_log_inv_alpha <= bound;
    }
    doc["budget"] = s;
  }

  if (wants(o.criteria, "integral")) {
    if (const auto pair = corollary_pair(prov)) {
      nlohmann::json rows = nlohmann::json::array();
      for (int j = 1; j <= std::max(n_max, 1); ++j) {
        const double t = 1.0 - std::ldexp(1.0, -j);
        const IntegralResult r = integral_test(pair->first, pair->second, t);
        rows.push_back({{"T", t}, {"value", r.value}, {"error_estimate", r.error_estimate}});
      }
      doc["integral"] = rows;
    }
  }

  if (wants(o.criteria, "essen")) {
    const int essen_max = o.essen_n_max > 0 ? o.essen_n_max : n_max;
    const EssenEvaluator ev = std::visit([&](const auto& x) { return EssenEvaluator(x, essen_max); }, c);
    std::vector<SeriesReport> essen;
    double lo = kInf, hi = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      essen.push_back(ev.evaluate(ys[i]));
      for (const auto& [n, v] : essen.back().cumulative) {
        const double t1 = theorem1[i].cumulative_at(n);
        if (v > 0.0 && t1 > 0.0) {
          lo = std::min(lo, v / t1);
          hi = std::max(hi, v / t1);
        }
      }
    }
    nlohmann::json s = {{"n_max", essen_max}, {"cells", ev.cells().size()}};
    if (hi > 0.0) {
      s["ratio_min"] = lo;
      s["ratio_max"] = hi;
      s["factor"] = std::max(hi, 1.0 / lo);
    }
    doc["essen"] = s;
    write_csv(spec, "essen.csv", envelope, series_csv(essen));
    std::vector<CellRecord> records;
    for (const EssenCell& cell : ev.cells()) records.push_back({cell, std::nan(""), std::nan("")});
    write_csv(spec, "cells.csv", envelope, cells_csv(records));
  }

  if (wants(o.criteria, "quasisep") && !empty) {
    const PaperConstants k = PaperConstants::for_ratio(config_ratio_sup(c));
    const QuasisepCheck q = std::visit([&](const auto& x) { return check_quasisep(x, k); }, c);
    doc["quasisep"] = {{"constants", k.to_json()},
                       {"statistic", real_or_null(q.statistic)},
                       {"threshold", q.threshold},
                       {"satisfied", q.satisfied},
                       {"pair", {q.pair.first, q.pair.second}}};
  }

  if (wants(o.criteria, "certificate")) {
    const RemarkCertificate cert = std::visit([](const auto& x) { return remark_certificate(x); }, c);
    doc["certificate"] = cert.to_json();
  }

  write_json(spec, "check.json", doc);
  out << "checked " << o.config << " (" << disc_count(c) << " discs); wrote " << (spec.out_dir / "check.json").string()
      << "\n";
  if (doc.contains("certificate") && doc["certificate"]["issued"].get<bool>()) {
    out << "certificate issued: " << doc["certificate"]["reason"].get<std::string>() << "\n";
  }
  return kExitOk;
}

int cmd_capacity(const CapacityCliOptions& o, std::ostream& out) {
  CapacityOptions options;
  options.boundary_points = o.boundary_points;
  options.estimate_error = true;
  RunSpec spec = make_spec("capacity", o.common,
                           {{"config", o.config}, {"disc", o.disc}, {"segment", o.segment}, {"cells", o.cells},
                            {"per_generation", o.per_generation}, {"n_lo", o.n_lo}, {"n_hi", o.n_hi},
                            {"quasiadditivity", o.quasiadditivity}, {"c3", o.c3},
                            {"boundary_points", o.boundary_points}});
  auto estimate_json = [](const CapacityEstimate& e) {
    return nlohmann::json{{"value", e.value},
                          {"log_value", real_or_null(e.log_value)},
                          {"method", to_string(e.method)},
                          {"boundary_points", e.boundary_points},
                          {"error_hint", e.error_hint}};
  };

  if (o.config.empty()) {
    if ((o.disc > 0.0) == (o.segment > 0.0)) throw ValidationFailure("give exactly one of --config, --disc, --segment");
    nlohmann::json doc = spec.envelope(params_hash(spec));
    if (o.disc > 0.0) {
      const CapacityEstimate e = log_capacity(Shape::disc(Disc::make({0.0, 0.0}, o.disc)), options);
      doc["shape"] = {{"disc", o.disc}};
      doc["capacity"] = estimate_json(e);
      if (o.disc <= 0.5) {
        const C2Estimate c2 = c2_disc(o.disc, o.c3);
        doc["c2_disc"] = {{"value", c2.value}, {"lower", c2.lower}, {"upper", c2.upper}};
      }
      out << "capacity " << format_real(e.value) << " (" << to_string(e.method) << ")\n";
    } else {
      const CapacityEstimate e = log_capacity(Shape::segment({0.0, 0.0}, {o.segment, 0.0}), options);
      doc["shape"] = {{"segment", o.segment}};
      doc["capacity"] = estimate_json(e);
      out << "capacity " << format_real(e.value) << " (" << to_string(e.method) << ")\n";
    }
    write_json(spec, "capacity.json", doc);
    return kExitOk;
  }

  const Loaded loaded = load_configuration(o.config);
  const AnyConfiguration& c = loaded.config;
  const nlohmann::json envelope = spec.envelope(loaded.hash);
  const PaperConstants k = PaperConstants::for_ratio(config_ratio_sup(c), o.c3);

  std::vector<WhitneyIndex> cells;
  for (const std::string& text : o.cells) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ValidationFailure("cell '" + text + "' is not n:m");
    try {
      cells.push_back(WhitneyIndex::make(std::stoi(text.substr(0, colon)), std::stoll(text.substr(colon + 1))));
    } catch (const std::logic_error&) {
      throw ValidationFailure("cell '" + text + "' is not n:m");
    }
  }
  if (cells.empty()) {
    const int hi = o.n_hi > 0 ? o.n_hi : config_n_max(c);
    for (int n = std::max(1, o.n_lo); n <= hi; ++n) {
      const std::int64_t total = cells_in_generation(n);
      int taken = 0;
      for (int s = 0; s < 4 * o.per_generation && taken < o.per_generation; ++s) {
        const std::int64_t m = (total * s) / (4 * o.per_generation);
        const WhitneyIndex idx = WhitneyIndex::make(n, m);
        const auto discs = std::visit([&](const auto& x) { return discs_meeting_cell(x, idx); }, c);
        if (discs.empty()) continue;
        cells.push_back(idx);
        ++taken;
      }
    }
  }

  nlohmann::json doc = envelope;
  doc["constants"] = k.to_json();
  if (o.quasiadditivity) {
    const QuasisepCheck q = std::visit([&](const auto& x) { return check_quasisep(x, k); }, c);
    doc["quasisep"] = {{"statistic", real_or_null(q.statistic)}, {"threshold", q.threshold},
                       {"satisfied", q.satisfied}, {"pair", {q.pair.first, q.pair.second}}};
    if (!q.satisfied) {
      throw ValidationFailure("quasiadditivity precondition fails",
                              {"pair (" + std::to_string(q.pair.first) + ", " + std::to_string(q.pair.second) +
                               "): statistic " + format_real(q.statistic) + " < " + format_real(q.threshold)});
    }
  }
  std::vector<CellRecord> records;
  nlohmann::json rows = nlohmann::json::array();
  double c4 = kInf, ratio_max = 0.0, part_bound = kInf;
  int login_violations = 0;
  for (const WhitneyIndex& idx : cells) {
    const auto discs = std::visit([&](const auto& x) { return discs_meeting_cell(x, idx); }, c);
    CellRecord rec;
    rec.cell.index = idx;
    rec.c2 = std::nan("");
    rec.quasiadditivity = std::nan("");
    nlohmann::json row = {{"n", idx.n}, {"m", idx.m}, {"discs", discs.size()}};
    if (!discs.empty()) {
      const Shape shape = cell_shape(discs, idx);
      rec.cell.capacity = log_capacity(shape, options);
      const double l = -idx.n * std::log(2.0) - rec.cell.capacity.log_value;
      rec.cell.weight = l > 0.0 ? 1.0 / l : std::nan("");
      row["capacity"] = estimate_json(rec.cell.capacity);
      if (o.quasiadditivity) {
        const QuasiadditivityResult q = quasiadditivity_ratio(discs, idx, k, options);
        const LoginCheck login = login_check(discs, idx, k, options);
        rec.c2 = q.union_c2;
        rec.quasiadditivity = q.ratio;
        c4 = std::min(c4, q.ratio);
        ratio_max = std::max(ratio_max, q.ratio);
        part_bound = std::min(part_bound, q.min_part_bound);
        login_violations += login.lhs > login.rhs * (1.0 + 1e-6);
        row["c2_union"] = q.union_c2;
        row["c2_parts"] = q.parts_c2;
        row["quasiadditivity_ratio"] = q.ratio;
        row["login"] = {{"lhs", login.lhs}, {"rhs", login.rhs}};
      }
    }
    rows.push_back(row);
    records.push_back(rec);
  }
  doc["cells"] = rows;
  if (o.quasiadditivity) {
    doc["quasiadditivity"] = {{"cells", cells.size()}, {"min_ratio", real_or_null(c4)}, {"max_ratio", ratio_max},
                              {"min_part_bound", real_or_null(part_bound)}, {"login_violations", login_violations}};
  }
  write_json(spec, "capacity.json", doc);
  write_csv(spec, "cells.csv", envelope, cells_csv(records));
  out << "evaluated " << cells.size() << " cells; wrote " << (spec.out_dir / "cells.csv").string() << "\n";
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  nlohmann::json params = {{"config", o.config}, {"preset", o.preset}, {"walks", o.walks}, {"eps", o.eps},
                           {"max_steps", o.max_steps}, {"trace", o.trace}};
  if (!o.start.empty()) params["start"] = o.start;
  if (o.preset == "annulus") {
    params["r0"] = o.r0;
    params["s"] = o.s;
  } else if (o.preset == "corollary" || o.preset == "remark") {
    params["family"] = family_json(o.family);
  }
  const std::vector<int> depths = o.preset == "annulus" ? std::vector<int>{0} : default_depths(o);
  params["depths"] = depths;
  RunSpec spec = make_spec("simulate", o.common, params);
  WalkParams wp = walk_params(spec, o.walks, o.eps, o.max_steps);
  if (!o.start.empty()) {
    if (o.start.size() != 2) throw ValidationFailure("--start takes two numbers");
    wp.start = {o.start[0], o.start[1]};
  }
  wp.keep_trace = o.trace;
  wp.validate();

  std::string hash = params_hash(spec);
  std::vector<DepthRow> rows;
  std::vector<std::uint64_t> counts;
  nlohmann::json doc;
  if (o.preset == "annulus") {
    if (o.start.empty()) wp.start = {o.s, 0.0};
    const double expected = annulus_escape_probability(o.r0, wp.start.norm());
    Configuration c = Configuration::from_discs({Disc::make({0.0, 0.0}, o.r0)});
    rows.push_back({0, estimate_escape(wp, SpatialIndex(c))});
    counts.push_back(1);
    doc = spec.envelope(hash);
    doc["closed_form"] = expected;
  } else {
    std::optional<Loaded> loaded;
    if (o.preset.empty()) {
      loaded = load_configuration(o.config);
      hash = loaded->hash;
    } else if (o.preset != "corollary" && o.preset != "remark") {
      throw ValidationFailure("unknown preset '" + o.preset + "'");
    }
    FamilyOptions family = o.family;
    if (!o.preset.empty()) family.family = o.preset;
    std::vector<int> run_depths = depths;
    if (loaded && o.depths.empty()) run_depths = {config_n_max(loaded->config)};
    spec.params["depths"] = run_depths;
    for (int depth : run_depths) {
      const AnyConfiguration c = loaded ? truncate_any(loaded->config, depth) : build_family(family, depth);
      const auto field = make_field(c);
      rows.push_back({depth, estimate_escape(wp, *field)});
      counts.push_back(disc_count(c));
    }
    doc = spec.envelope(hash);
  }
  const nlohmann::json envelope = spec.envelope(hash);
  nlohmann::json table = nlohmann::json::array();
  nlohmann::json warnings = nlohmann::json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.push_back({{"n_max", rows[i].n_max}, {"discs", counts[i]}, {"estimate", rows[i].estimate.to_json()}});
    if (rows[i].estimate.unreliable) {
      warnings.push_back("depth " + std::to_string(rows[i].n_max) + ": " +
                         std::to_string(rows[i].estimate.n_censored) + " censored walks (over 1%)");
    }
    if (o.trace) {
      write_csv(spec, "trace_" + std::to_string(rows[i].n_max) + ".csv", envelope, trace_csv(rows[i].estimate.trace));
    }
  }
  doc["rows"] = table;
  doc["warnings"] = warnings;
  doc["strictly_decreasing"] = strictly_decreasing(rows, 2.0);
  write_json(spec, "simulate.json", doc);
  write_csv(spec, "escape.csv", envelope, depth_csv(rows));
  out << "seed " << spec.seed << "\n" << depth_csv(rows);
  for (const auto& w : warnings) out << "warning: " << w.get<std::string>() << "\n";
  return kExitOk;
}

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  nlohmann::json params = family_json(o.family);
  params["depths"] = o.depths;
  params["walks"] = o.walks;
  params["eps"] = o.eps;
  params["y_grid"] = o.y_grid;
  RunSpec spec = make_spec("sweep", o.common, params);
  const WalkParams wp = walk_params(spec, o.walks, o.eps, 1'000'000);
  const nlohmann::json envelope = spec.envelope(params_hash(spec));
  const auto ys = boundary_grid(o.y_grid);
  std::ostringstream csv;
  csv << "n_max,discs,sep3,theorem1_mean,essen_mean,p_escape,ci95,n_censored\n";
  nlohmann::json rows = nlohmann::json::array();
  for (int depth : o.depths) {
    const AnyConfiguration c = build_family(o.family, depth);
    const std::optional<PhiSpec> phi =
        o.family.family == "remark" ? std::nullopt : std::optional<PhiSpec>(PhiSpec::exp_power(o.family.c0, o.family.beta));
    const double sep3 = disc_count(c) < 2 ? kInf
                                          : std::visit([&](const auto& x) {
                                              return separation(x, SeparationKind::kSep3, phi).value;
                                            }, c);
    const EssenEvaluator ev = std::visit([&](const auto& x) { return EssenEvaluator(x, config_n_max(c)); }, c);
    KahanSum t1, es;
    for (const auto& y : ys) {
      t1 += std::visit([&](const auto& x) { return theorem1_series(x, y).total(); }, c);
      es += ev.evaluate(y).total();
    }
    const double n_y = static_cast<double>(ys.size());
    const auto field = make_field(c);
    const EscapeEstimate e = estimate_escape(wp, *field);
    csv << depth << ',' << disc_count(c) << ',' << format_real(sep3) << ',' << format_real(t1.value() / n_y) << ','
        << format_real(es.value() / n_y) << ',' << format_real(e.p_escape) << ',' << format_real(e.ci95_halfwidth)
        << ',' << e.n_censored << '\n';
    rows.push_back({{"n_max", depth}, {"discs", disc_count(c)}, {"sep3", real_or_null(sep3)},
                    {"theorem1_mean", t1.value() / n_y}, {"essen_mean", es.value() / n_y},
                    {"estimate", e.to_json()}});
  }
  nlohmann::json doc = envelope;
  doc["rows"] = rows;
  write_json(spec, "sweep.json", doc);
  write_csv(spec, "sweep.csv", envelope, csv.str());
  out << csv.str();
  return kExitOk;
}

int cmd_report(const ReportOptions& o, std::ostream& out) {
  RunSpec spec = make_spec("report", o.common, {{"dir", o.dir}, {"min_separation", o.min_separation}});
  const fs::path dir = o.dir.empty() ? spec.out_dir : fs::path(o.dir);
  const fs::path check_path = dir / "check.json";
  const fs::path simulate_path = dir / "simulate.json";
  if (!fs::exists(check_path)) throw IoError("missing inputs: " + check_path.string());
  const std::string check_text = read_text_file(check_path);
  std::string joined = check_text;
  std::optional<nlohmann::json> simulate;
  if (fs::exists(simulate_path)) {
    const std::string sim_text = read_text_file(simulate_path);
    joined += sim_text;
    simulate = nlohmann::json::parse(sim_text);
  }
  ReportThresholds thresholds;
  thresholds.min_separation = o.min_separation;
  const CrossCheckReport report = build_report(nlohmann::json::parse(check_text), simulate, thresholds);
  nlohmann::json doc = spec.envelope(hash_hex(joined));
  doc["report"] = report.to_json();
  // Without --out the report lands next to its inputs.
  if (o.common.out.empty()) spec.out_dir = dir;
  write_json(spec, "report.json", doc);
  write_text_file(spec.out_dir / "report.txt", report.to_text());
  out << report.to_text();
  return kExitOk;
}

}  // namespace champagne::cli
