#include <cstdlib>
#include <sstream>

#include "champagne/numeric.h"
#include "champagne/serialization.h"
#include "champagne_cli/cli.h"

namespace champagne::cli {
namespace {

double number_or(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_number()) return fallback;
  return j[key].get<double>();
}

Verdict missing(const std::string& test, const std::string& what) { return {test, "missing", what, 0.0, 0.0}; }

}  // namespace

nlohmann::json RunSpec::envelope(const std::string& input_hash) const {
  return {{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}, {"command", command},
          {"params", params},                 {"seed", seed},                 {"input_hash", input_hash}};
}

std::filesystem::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CHAMPAGNE_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "out";
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("CHAMPAGNE_THREADS"); env != nullptr && *env != '\0') {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

nlohmann::json CrossCheckReport::to_json() const {
  nlohmann::json tests = nlohmann::json::array();
  for (const Verdict& v : verdicts) {
    tests.push_back({{"test", v.test}, {"outcome", v.outcome}, {"evidence", v.evidence}, {"value", v.value},
                     {"threshold", v.threshold}});
  }
  return {{"verdict", verdict}, {"tests", tests}, {"summary", summary}};
}

std::string CrossCheckReport::to_text() const {
  std::ostringstream out;
  out << "verdict: " << verdict << "\n";
  for (const Verdict& v : verdicts) out << "  " << v.test << ": " << v.outcome << " (" << v.evidence << ")\n";
  return out.str();
}

CrossCheckReport build_report(const nlohmann::json& check, const std::optional<nlohmann::json>& simulate,
                              const ReportThresholds& thresholds) {
  CrossCheckReport report;
  for (const char* key : {"configuration", "separation", "budget", "integral", "essen", "quasisep", "certificate"}) {
    if (check.contains(key)) report.summary[key] = check[key];
  }
  if (check.contains("series")) report.summary["series_growth"] = check["series"].value("growth", nlohmann::json());
  if (simulate) report.summary["escape"] = simulate->value("rows", nlohmann::json::array());

  // Budget certificate for the avoidable case.
  bool certified = false;
  bool trivial = false;
  if (check.contains("certificate")) {
    const auto& c = check["certificate"];
    certified = c.value("issued", false);
    trivial = c.value("trivial", false);
    const double budget = number_or(c, "budget", 0.0);
    const double threshold = number_or(c, "threshold", 0.0);
    report.verdicts.push_back({"remark_certificate", certified ? "pass" : "fail",
                               "budget " + format_real(budget) + " vs 1/(2 log 4) = " + format_real(threshold) +
                                   "; " + c.value("reason", std::string()),
                               budget, threshold});
  } else {
    report.verdicts.push_back(missing("remark_certificate", "check.json has no certificate"));
  }

  // Divergent series growth at every boundary point.
  bool growth = false;
  if (check.contains("series") && check["series"].contains("growth")) {
    const auto& g = check["series"]["growth"];
    growth = g.value("all_divergent", false);
    const double slope = number_or(g, "min_slope", 0.0);
    report.verdicts.push_back({"series_growth", growth ? "pass" : "fail",
                               "min slope " + format_real(slope) + " > 0 and tail ratio >= 0.5 at every y; " +
                                   std::to_string(g.value("divergent_count", 0)) + " divergent",
                               slope, 0.0});
  } else {
    report.verdicts.push_back(missing("series_growth", "check.json has no series growth"));
  }

  // sep3 above its floor.
  bool separated = false;
  if (check.contains("separation") && check["separation"].contains("sep3")) {
    const double sep3 = number_or(check["separation"]["sep3"], "value", 0.0);
    separated = sep3 >= thresholds.min_separation;
    report.verdicts.push_back({"separation", separated ? "pass" : "fail",
                               "sep3 " + format_real(sep3) + " vs floor " + format_real(thresholds.min_separation),
                               sep3, thresholds.min_separation});
  } else {
    report.verdicts.push_back(missing("separation", "check.json has no sep3 statistic"));
  }

  // Escape probability decreasing with depth.
  bool decreasing = false;
  if (simulate && simulate->contains("rows")) {
    const auto& rows = (*simulate)["rows"];
    decreasing = rows.size() >= 2;
    for (std::size_t i = 1; decreasing && i < rows.size(); ++i) {
      const auto& a = rows[i - 1]["estimate"];
      const auto& b = rows[i]["estimate"];
      const double margin =
          thresholds.escape_sigmas * std::max(number_or(a, "ci95_halfwidth", 0.0), number_or(b, "ci95_halfwidth", 0.0));
      decreasing = number_or(a, "p_escape", 0.0) - number_or(b, "p_escape", 0.0) > margin;
    }
    report.verdicts.push_back({"escape_trend", decreasing ? "pass" : "fail",
                               std::to_string(rows.size()) + " depths; each drop must exceed " +
                                   format_real(thresholds.escape_sigmas) + " x CI",
                               static_cast<double>(rows.size()), thresholds.escape_sigmas});
  } else {
    report.verdicts.push_back(missing("escape_trend", "simulate.json not found"));
  }

  if (certified) {
    report.verdict = trivial ? "certified avoidable (trivial)" : "certified avoidable (Remark 1.4)";
  } else if (growth && separated && decreasing) {
    report.verdict = "consistent with unavoidable";
  } else {
    report.verdict = "inconclusive";
  }
  return report;
}

}  // namespace champagne::cli
