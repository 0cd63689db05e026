#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "champagne_cli/cli.h"

namespace champagne::cli {

struct CommonOptions {
  std::string out;
  int threads = 0;
  std::uint64_t seed = 1;
};

struct FamilyOptions {
  std::string family = "corollary";  // corollary | remark | phi-grid
  double alpha = 2.0;
  double beta = 1.5;
  double c0 = 0.05;
  int n_min = 1;
  int n_max = 8;
  std::uint64_t drop_first = 0;
  bool no_certify = false;
  int per_cell = 1;  // phi-grid
  std::string rule = "geometric";  // remark: geometric | fill
  int count = 8;
  double target = 0.0;  // 0 -> 1/(2 log 4)
  double ring_radius = 0.75;
};

struct GenerateOptions {
  CommonOptions common;
  FamilyOptions family;
  std::string format = "auto";  // auto | explicit | rings
  std::string output = "configuration.json";
};

struct CheckOptions {
  CommonOptions common;
  std::string config;
  int y_grid = 64;
  double alpha = 0.0;  // budget exponent; 0 -> generator alpha or 2
  int n_lo = 6;
  int n_hi = 0;        // 0 -> configuration n_max
  int essen_n_max = 0; // 0 -> configuration n_max
  std::vector<std::string> criteria;
};

struct CapacityCliOptions {
  CommonOptions common;
  std::string config;
  double disc = 0.0;
  double segment = 0.0;
  std::vector<std::string> cells;  // "n:m"
  int per_generation = 2;
  int n_lo = 1;
  int n_hi = 0;
  bool quasiadditivity = false;
  double c3 = 4.0;
  int boundary_points = 256;
};

struct SimulateOptions {
  CommonOptions common;
  std::string config;
  std::string preset;  // annulus | corollary | remark
  FamilyOptions family;
  std::vector<int> depths;
  std::int64_t walks = 100000;
  double eps = 1e-4;
  std::int64_t max_steps = 1000000;
  std::vector<double> start;
  double r0 = 0.25;
  double s = 0.5;
  bool trace = false;
};

struct SweepOptions {
  CommonOptions common;
  FamilyOptions family;
  std::vector<int> depths{6, 8, 10, 12};
  std::int64_t walks = 100000;
  double eps = 1e-4;
  int y_grid = 64;
};

struct ReportOptions {
  CommonOptions common;
  std::string dir;
  double min_separation = 0.5;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out);
int cmd_check(const CheckOptions& o, std::ostream& out);
int cmd_capacity(const CapacityCliOptions& o, std::ostream& out);
int cmd_simulate(const SimulateOptions& o, std::ostream& out);
int cmd_sweep(const SweepOptions& o, std::ostream& out);
int cmd_report(const ReportOptions& o, std::ostream& out);

}  // namespace champagne::cli
