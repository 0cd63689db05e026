#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "champagne/geometry.h"
#include "champagne/spatial_index.h"

namespace champagne {

struct WalkError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Philox4x32-10 counter-based generator. A stream is fixed by (seed, walk
/// index); draws advance a private counter, so every walk is reproducible
/// independently of scheduling.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform();

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;
};

struct WalkParams {
  double eps_shell = 1e-4;
  std::int64_t max_steps = 1'000'000;
  Point start{0.0, 0.0};
  std::uint64_t seed = 1;
  std::int64_t n_walks = 100'000;
  int threads = 1;
  bool keep_trace = false;

  void validate() const;
  nlohmann::json to_json() const;
};

enum class WalkTag { kEscaped, kHit, kCensored };
const char* to_string(WalkTag tag);

struct WalkOutcome {
  WalkTag tag = WalkTag::kCensored;
  std::int64_t steps = 0;
  DiscId disc = 0;  // for kHit
};

struct TraceRecord {
  std::int64_t walk = 0;
  WalkOutcome outcome;
};

struct EscapeEstimate {
  double p_escape = 0.0;  // escaped / (escaped + hit)
  double ci95_halfwidth = 0.0;
  std::int64_t n_walks = 0;
  std::int64_t n_escaped = 0;
  std::int64_t n_hit = 0;
  std::int64_t n_censored = 0;
  double mean_steps = 0.0;
  bool unreliable = false;  // censored fraction above 1%
  std::vector<TraceRecord> trace;

  nlohmann::json to_json() const;
};

// One walk-on-spheres move: uniform on the circle about p of radius
// min(1 - |p|, gap to the nearest obstacle). Throws std::logic_error when p
// lies inside an absorption shell.
Point wos_step(Point p, const ObstacleField& field, Philox& rng, double eps_shell);

// Walk from params.start until absorption. Discs much smaller than both the
// shell and their obstacle-free neighbourhood are handled exactly through
// the annulus hitting law instead of the shell rule.
WalkOutcome run_walk(const WalkParams& params, const ObstacleField& field, Philox& rng);

// n_walks walks on `threads` workers; walk i uses Philox(seed, i), so the
// outcome counts do not depend on the thread count.
EscapeEstimate estimate_escape(const WalkParams& params, const ObstacleField& field);
EscapeEstimate estimate_escape(const WalkParams& params, const Configuration& c);

struct DepthRow {
  int n_max = 0;
  EscapeEstimate estimate;
};
using FieldFactory = std::function<std::unique_ptr<ObstacleField>(int n_max)>;
// The same params (and seed) at every depth.
std::vector<DepthRow> escape_vs_depth(const FieldFactory& family, const std::vector<int>& depths,
                                      const WalkParams& params);

// CSV: n_max,n_walks,p_escape,ci95,n_censored,mean_steps
std::string depth_csv(const std::vector<DepthRow>& rows);
// CSV: walk,outcome,steps,disc
std::string trace_csv(const std::vector<TraceRecord>& trace);

// Closed-form escape probability from |x| = s for the annulus r0 < |x| < 1.
double annulus_escape_probability(double r0, double s);

}  // namespace champagne
