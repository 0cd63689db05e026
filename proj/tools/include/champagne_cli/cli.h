#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace champagne::cli {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2 };

// A configuration or parameter set that failed validation; `details` lists
// the individual findings.
struct ValidationFailure : std::runtime_error {
  ValidationFailure(const std::string& what, std::vector<std::string> details = {})
      : std::runtime_error(what), details(std::move(details)) {}
  std::vector<std::string> details;
};

/// Everything that determines a command's output.
struct RunSpec {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
  int threads = 1;
  std::optional<std::filesystem::path> input;

  // Header embedded in every output: tool version, schema, params, seed and
  // the FNV-1a hash of the input bytes (or of the params when no input).
  nlohmann::json envelope(const std::string& input_hash) const;
};

struct Verdict {
  std::string test;       // producing test
  std::string outcome;    // "pass", "fail" or "missing"
  std::string evidence;   // value against threshold, human readable
  double value = 0.0;
  double threshold = 0.0;
};

/// Joins the check and simulate outputs of one configuration.
struct CrossCheckReport {
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  // "certified avoidable (Remark 1.4)", "certified avoidable (trivial)",
  // "consistent with unavoidable" or "inconclusive".
  std::string verdict = "inconclusive";

  nlohmann::json to_json() const;
  std::string to_text() const;
};

struct ReportThresholds {
  double min_separation = 0.5;  // floor for the sep3 statistic
  double escape_sigmas = 2.0;   // consecutive depths must drop by this many CI
};

// Verdict logic: an issued budget certificate gives "certified avoidable";
// divergent series growth at every y, sep3 above its floor and a strictly
// decreasing escape table give "consistent with unavoidable"; anything else
// is "inconclusive".
CrossCheckReport build_report(const nlohmann::json& check, const std::optional<nlohmann::json>& simulate,
                              const ReportThresholds& thresholds = {});

// Resolves CHAMPAGNE_OUT_DIR / CHAMPAGNE_THREADS when the flags are unset.
std::filesystem::path resolve_out_dir(const std::string& flag);
int resolve_threads(int flag);

// Runs the command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace champagne::cli
