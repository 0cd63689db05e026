#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "champagne/serialization.h"
#include "champagne_cli/cli.h"

namespace champagne::cli {
namespace {

namespace fs = std::filesystem;

int run_args(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "champagne");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text != nullptr) *err_text = err.str();
  return code;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("champagne_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(run_args({"--help"}), kExitOk);
  EXPECT_EQ(run_args({"bogus"}), kExitValidation);
  EXPECT_EQ(run_args({"check", "--config", (fs::temp_directory_path() / "champagne_cli_test_missing.json").string(), "--out", scratch("io").string()}), kExitIo);
  EXPECT_EQ(run_args({"simulate", "--preset", "annulus", "--walks", "0", "--out", scratch("walks").string()}),
            kExitValidation);
  EXPECT_EQ(run_args({"generate", "--beta", "0.5", "--out", scratch("beta").string()}), kExitValidation);
  EXPECT_EQ(run_args({"report", "--dir", scratch("empty").string(), "--out", scratch("empty_out").string()}), kExitIo);
}

TEST(CliTest, InvalidConfigurationIsAValidationFailure) {
  const fs::path dir = scratch("invalid");
  fs::create_directories(dir);
  write_text_file(dir / "bad.json",
                  R"({"schema_version":1,"kind":"explicit","discs":[{"x":0.7,"y":0,"r":0.1},{"x":0.72,"y":0,"r":0.1}]})");
  std::string err;
  EXPECT_EQ(run_args({"check", "--config", (dir / "bad.json").string(), "--out", dir.string()}, &err),
            kExitValidation);
  EXPECT_NE(err.find("not disjoint"), std::string::npos) << err;
}

TEST(CliTest, GenerateIsByteIdenticalAndStamped) {
  const fs::path dir = scratch("generate");
  ASSERT_EQ(run_args({"generate", "--n-max", "5", "--seed", "9", "--out", dir.string()}), kExitOk);
  const std::string first = read_text_file(dir / "configuration.json");
  ASSERT_EQ(run_args({"generate", "--n-max", "5", "--seed", "9", "--threads", "4", "--out", dir.string()}), kExitOk);
  EXPECT_EQ(read_text_file(dir / "configuration.json"), first);
  const nlohmann::json doc = nlohmann::json::parse(first);
  EXPECT_EQ(doc["provenance"]["run"]["seed"], 9);
  EXPECT_EQ(doc["provenance"]["run"]["tool_version"], kToolVersion);
  EXPECT_EQ(doc["kind"], "rings");
}

TEST(CliTest, RemarkPipelineIsCertified) {
  const fs::path dir = scratch("remark");
  ASSERT_EQ(run_args({"generate", "--family", "remark", "--count", "4", "--out", dir.string()}), kExitOk);
  ASSERT_EQ(run_args({"check", "--config", (dir / "configuration.json").string(), "--y-grid", "8", "--out",
                      dir.string()}),
            kExitOk);
  ASSERT_EQ(run_args({"report", "--dir", dir.string(), "--out", dir.string()}), kExitOk);
  const nlohmann::json report = read_json_file(dir / "report.json");
  EXPECT_EQ(report["report"]["verdict"], "certified avoidable (Remark 1.4)");
}

TEST(CliTest, EnvironmentDefaults) {
  ::setenv("CHAMPAGNE_OUT_DIR", "/tmp/champagne_env_out", 1);
  ::setenv("CHAMPAGNE_THREADS", "3", 1);
  EXPECT_EQ(resolve_out_dir(""), fs::path("/tmp/champagne_env_out"));
  EXPECT_EQ(resolve_out_dir("x"), fs::path("x"));
  EXPECT_EQ(resolve_threads(0), 3);
  EXPECT_EQ(resolve_threads(2), 2);
  ::unsetenv("CHAMPAGNE_OUT_DIR");
  ::unsetenv("CHAMPAGNE_THREADS");
  EXPECT_EQ(resolve_out_dir(""), fs::path("out"));
  EXPECT_EQ(resolve_threads(0), 1);
}

TEST(ReportTest, VerdictLogic) {
  nlohmann::json check = {
      {"certificate", {{"issued", false}, {"trivial", false}, {"budget", 5.0}, {"threshold", 0.36}}},
      {"series", {{"growth", {{"all_divergent", true}, {"min_slope", 0.1}, {"divergent_count", 64}}}}},
      {"separation", {{"sep3", {{"value", 1.7}}}}}};
  auto row = [](double p, double ci) {
    return nlohmann::json{{"estimate", {{"p_escape", p}, {"ci95_halfwidth", ci}}}};
  };
  const std::optional<nlohmann::json> decreasing = nlohmann::json{{"rows", {row(0.2, 0.002), row(0.1, 0.002), row(0.05, 0.001)}}};
  EXPECT_EQ(build_report(check, decreasing).verdict, "consistent with unavoidable");
  const std::optional<nlohmann::json> flat = nlohmann::json{{"rows", {row(0.2, 0.002), row(0.199, 0.002)}}};
  EXPECT_EQ(build_report(check, flat).verdict, "inconclusive");
  EXPECT_EQ(build_report(check, std::nullopt).verdict, "inconclusive");
  check["separation"]["sep3"]["value"] = 0.1;
  EXPECT_EQ(build_report(check, decreasing).verdict, "inconclusive");
  check["certificate"]["issued"] = true;
  EXPECT_EQ(build_report(check, decreasing).verdict, "certified avoidable (Remark 1.4)");
  check["certificate"]["trivial"] = true;
  EXPECT_EQ(build_report(check, decreasing).verdict, "certified avoidable (trivial)");
  const CrossCheckReport r = build_report(check, std::nullopt);
  EXPECT_NE(r.to_text().find("escape_trend: missing"), std::string::npos);
}

}  // namespace
}  // namespace champagne::cli
