#include "champagne/walker.h"

#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "champagne/numeric.h"

namespace champagne {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Discs below this fraction of their free radius count as point-like.
constexpr double kPointLikeRatio = 1e-3;
constexpr std::int64_t kChunk = 256;

Point uniform_on_circle(Philox& rng) {
  const double a = kTwoPi * rng.uniform();
  return {std::cos(a), std::sin(a)};
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

std::array<std::uint32_t, 4> Philox::block(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::uint32_t Philox::next_u32() {
  if (available_ == 0) {
    buffer_ = block(counter_, key_);
    if (++counter_[0] == 0) ++counter_[1];
    available_ = 4;
  }
  return buffer_[static_cast<std::size_t>(4 - available_--)];
}

double Philox::uniform() {
  const std::uint64_t a = next_u32() >> 5;
  const std::uint64_t b = next_u32() >> 6;
  return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
}

void WalkParams::validate() const {
  if (!(eps_shell > 0.0 && eps_shell < 0.5)) throw WalkError("eps_shell must lie in (0, 1/2)");
  if (max_steps < 1) throw WalkError("max_steps must be >= 1");
  if (!(start.norm() < 1.0)) throw WalkError("start must lie in the open unit disc");
  if (n_walks < 1) throw WalkError("n_walks must be >= 1");
  if (threads < 1) throw WalkError("threads must be >= 1");
}

nlohmann::json WalkParams::to_json() const {
  return {{"eps_shell", eps_shell}, {"max_steps", max_steps}, {"start", {start.x, start.y}},
          {"seed", seed},           {"n_walks", n_walks}};
}

const char* to_string(WalkTag tag) {
  switch (tag) {
    case WalkTag::kEscaped: return "escaped";
    case WalkTag::kHit: return "hit";
    case WalkTag::kCensored: return "censored";
  }
  return "unknown";
}

nlohmann::json EscapeEstimate::to_json() const {
  return {{"p_escape", p_escape},     {"ci95_halfwidth", ci95_halfwidth}, {"n_walks", n_walks},
          {"n_escaped", n_escaped},   {"n_hit", n_hit},                   {"n_censored", n_censored},
          {"mean_steps", mean_steps}, {"unreliable", unreliable}};
}

Point wos_step(Point p, const ObstacleField& field, Philox& rng, double eps_shell) {
  const double b = 1.0 - p.norm();
  const NearestObstacle q = field.nearest(p, b);
  const double radius = q.found ? std::min(b, q.gap) : b;
  if (!(radius >= eps_shell)) throw std::logic_error("wos_step called inside an absorption shell");
  return p + radius * uniform_on_circle(rng);
}

WalkOutcome run_walk(const WalkParams& params, const ObstacleField& field, Philox& rng) {
  const double eps = params.eps_shell;
  Point x = params.start;
  WalkOutcome out;
  for (std::int64_t steps = 0;; ++steps) {
    out.steps = steps;
    const double b = 1.0 - x.norm();
    if (b < eps) {
      out.tag = WalkTag::kEscaped;
      return out;
    }
    const NearestObstacle q = field.nearest(x, b);
    const bool point_like = q.found && q.radius < eps && q.radius < kPointLikeRatio * q.free_radius;
    if (q.found && !point_like && q.gap < eps) {
      out.tag = WalkTag::kHit;
      out.disc = q.id;
      return out;
    }
    if (steps >= params.max_steps) {
      out.tag = WalkTag::kCensored;
      return out;
    }
    if (point_like && q.center_distance <= 0.5 * q.free_radius) {
      // Exact step in the obstacle-free ball B(c, R) around a tiny disc: the
      // walk reaches B̄(c, r) before ∂B(c, R) with probability
      // h = log(R/D) / log(R/r); otherwise it exits through ∂B(c, R) with
      // density P(w, ζ) - h, P the Poisson kernel and w = (x - c)/R.
      const double d = q.center_distance;
      const double log_d = std::log(d);
      double big = q.free_radius;
      double h = (std::log(big) - log_d) / (std::log(big) - q.log_radius);
      double w_abs = d / big;
      if (h > (1.0 - w_abs) / (1.0 + w_abs)) {
        big = 2.0 * d;
        w_abs = 0.5;
        h = std::log(2.0) / (std::log(big) - q.log_radius);
      }
      if (h > (1.0 - w_abs) / (1.0 + w_abs)) {
        out.tag = WalkTag::kHit;
        out.disc = q.id;
        out.steps = steps + 1;
        return out;
      }
      const std::complex<double> w((x.x - q.center.x) / big, (x.y - q.center.y) / big);
      const Point u = uniform_on_circle(rng);
      const std::complex<double> uc(u.x, u.y);
      const std::complex<double> zeta = (uc + w) / (1.0 + std::conj(w) * uc);
      const double hit = h * std::norm(zeta - w) / (1.0 - std::norm(w));
      if (rng.uniform() < hit) {
        out.tag = WalkTag::kHit;
        out.disc = q.id;
        out.steps = steps + 1;
        return out;
      }
      x = q.center + big * Point{zeta.real(), zeta.imag()};
      continue;
    }
    const double radius = q.found ? std::min(b, q.gap) : b;
    x = x + radius * uniform_on_circle(rng);
  }
}

EscapeEstimate estimate_escape(const WalkParams& params, const ObstacleField& field) {
  params.validate();
  const NearestObstacle at_start = field.nearest(params.start);
  if (at_start.found && at_start.center_distance <= at_start.radius) {
    throw WalkError("start lies inside obstacle " + std::to_string(at_start.id));
  }

  struct Totals {
    std::int64_t escaped = 0;
    std::int64_t hit = 0;
    std::int64_t censored = 0;
    std::int64_t steps = 0;
  };
  const std::int64_t n = params.n_walks;
  const int workers = static_cast<int>(std::min<std::int64_t>(params.threads, (n + kChunk - 1) / kChunk));
  std::vector<Totals> totals(static_cast<std::size_t>(std::max(workers, 1)));
  std::vector<TraceRecord> trace(params.keep_trace ? static_cast<std::size_t>(n) : 0);
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&](int worker) {
    Totals& t = totals[static_cast<std::size_t>(worker)];
    try {
      for (;;) {
        const std::int64_t begin = next.fetch_add(kChunk);
        if (begin >= n) return;
        const std::int64_t end = std::min(n, begin + kChunk);
        for (std::int64_t i = begin; i < end; ++i) {
          Philox rng(params.seed, static_cast<std::uint64_t>(i));
          const WalkOutcome o = run_walk(params, field, rng);
          t.steps += o.steps;
          if (o.tag == WalkTag::kEscaped) ++t.escaped;
          if (o.tag == WalkTag::kHit) ++t.hit;
          if (o.tag == WalkTag::kCensored) ++t.censored;
          if (params.keep_trace) trace[static_cast<std::size_t>(i)] = {i, o};
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(n);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  EscapeEstimate est;
  Totals sum;
  for (const Totals& t : totals) {
    sum.escaped += t.escaped;
    sum.hit += t.hit;
    sum.censored += t.censored;
    sum.steps += t.steps;
  }
  est.n_walks = n;
  est.n_escaped = sum.escaped;
  est.n_hit = sum.hit;
  est.n_censored = sum.censored;
  const std::int64_t resolved = sum.escaped + sum.hit;
  est.p_escape = resolved > 0 ? static_cast<double>(sum.escaped) / static_cast<double>(resolved) : 0.0;
  est.ci95_halfwidth = 1.96 * std::sqrt(est.p_escape * (1.0 - est.p_escape) / static_cast<double>(n));
  est.mean_steps = static_cast<double>(sum.steps) / static_cast<double>(n);
  est.unreliable = resolved == 0 || static_cast<double>(sum.censored) > 0.01 * static_cast<double>(n);
  est.trace = std::move(trace);
  return est;
}

EscapeEstimate estimate_escape(const WalkParams& params, const Configuration& c) {
  const SpatialIndex index(c);
  return estimate_escape(params, index);
}

std::vector<DepthRow> escape_vs_depth(const FieldFactory& family, const std::vector<int>& depths,
                                      const WalkParams& params) {
  std::vector<DepthRow> rows;
  for (int n : depths) {
    const std::unique_ptr<ObstacleField> field = family(n);
    if (!field) throw WalkError("no obstacle field for depth " + std::to_string(n));
    rows.push_back({n, estimate_escape(params, *field)});
  }
  return rows;
}

std::string depth_csv(const std::vector<DepthRow>& rows) {
  std::ostringstream out;
  out << "n_max,n_walks,p_escape,ci95,n_censored,mean_steps\n";
  for (const DepthRow& r : rows) {
    const EscapeEstimate& e = r.estimate;
    out << r.n_max << ',' << e.n_walks << ',' << format_real(e.p_escape) << ',' << format_real(e.ci95_halfwidth)
        << ',' << e.n_censored << ',' << format_real(e.mean_steps) << '\n';
  }
  return out.str();
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  out << "walk,outcome,steps,disc\n";
  for (const TraceRecord& t : trace) {
    out << t.walk << ',' << to_string(t.outcome.tag) << ',' << t.outcome.steps << ',';
    if (t.outcome.tag == WalkTag::kHit) out << t.outcome.disc;
    out << '\n';
  }
  return out.str();
}

double annulus_escape_probability(double r0, double s) {
  if (!(r0 > 0.0 && r0 < s && s < 1.0)) throw WalkError("annulus needs 0 < r0 < s < 1");
  return 1.0 - std::log(1.0 / s) / std::log(1.0 / r0);
}

}  // namespace champagne
