#pragma once
#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "parkline/interval_engine.hpp"
#include "parkline/rng.hpp"
#include "parkline/size_measure.hpp"

namespace parkline {

struct QueryPastEnd : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Arrival {
  double t = 0.0;  // arrival time
  double x = 0.0;  // requested location
  double l = 0.0;  // mass
};

struct SimConfig {
  SizeMeasure nu = Dirac{1.0};
  double t_end = 0.5;
  double half_width = 200.0;
  double margin = 40.0;
  std::uint64_t seed = 1;
  std::vector<double> trace_times;  // covering snapshots for cross-checks
};

inline void validate_config(const SimConfig& c) {
  validate(c.nu);
  if (!(c.t_end > 0.0) || !(mean_size(c.nu) * c.t_end < 1.0))
    throw std::invalid_argument("t_end must lie in (0, 1/mean)");
  if (!(c.half_width > 0.0)) throw std::invalid_argument("half_width must be positive");
  if (!(c.margin >= 0.0) || !(c.margin < c.half_width))
    throw std::invalid_argument("margin must lie in [0, half_width)");
  for (double s : c.trace_times)
    if (s < 0.0 || s > c.t_end) throw QueryPastEnd("trace time outside [0, t_end]");
}

enum class JumpKind { left_spill, zero_remainder_merge };

inline const char* to_string(JumpKind k) {
  return k == JumpKind::left_spill ? "left_spill" : "zero_remainder_merge";
}

// One left-edge event of the block around the origin: at time T the left
// edge moved by G (or the block first appeared), the right edge moved by
// D, mass R crossed the old left edge, and the block grew by L = G + D.
struct JumpRecord {
  std::size_t i = 0;  // 1-based within the replica
  double T = 0.0;
  double G = 0.0;
  double D = 0.0;
  double R = 0.0;
  double L = 0.0;
  JumpKind kind = JumpKind::left_spill;
};

struct BlockSnapshot {
  double time = 0.0;
  double g = 0.0;
  double d = 0.0;
  double l = 0.0;
};

struct SimResult {
  std::vector<JumpRecord> jump_log;
  std::vector<BlockSnapshot> block_trace;  // every change of the origin block
  std::vector<std::pair<double, double>> on_block_growth;  // (t, right-edge gain)
  std::vector<std::pair<double, CoveringState>> covering_trace;
  CoveringState covering{1.0};  // final covering
  double final_g = 0.0;
  double final_d = 0.0;
  double horizon = 0.0;
  std::size_t n_arrivals = 0;
  bool valid = true;
  std::string invalidation_reason;
};

inline std::vector<Arrival> generate_arrivals(const SimConfig& c, RandomSource& rng) {
  double w = c.half_width;
  double rate = c.t_end * 2.0 * w * total_mass(c.nu);
  std::uint64_t n = rng.poisson(rate);
  std::vector<Arrival> out;
  out.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    Arrival a;
    a.t = rng.uniform(0.0, c.t_end);
    a.x = rng.uniform(-w, w);
    a.l = sample_size(c.nu, rng);
    out.push_back(a);
  }
  std::sort(out.begin(), out.end(), [](const Arrival& p, const Arrival& q) {
    return std::tie(p.t, p.x, p.l) < std::tie(q.t, q.x, q.l);
  });
  return out;
}

// Replays a fixed arrival list chronologically. Each arrival is allocated
// and the block around the origin re-queried; events touching it are
// classified. A replica is discarded when that block's own edges enter
// the safety margins or one of its events runs past the window, because
// those outcomes could differ on the infinite line. Truncation of far
// blocks that never interact with the origin block is harmless: coverage
// strictly left of the window edge never depends on it.
inline SimResult run_with_arrivals(const SimConfig& c,
                                   const std::vector<Arrival>& arrivals) {
  validate_config(c);
  const double w = c.half_width;
  std::vector<double> snap_at = c.trace_times;
  std::sort(snap_at.begin(), snap_at.end());
  std::size_t next_snap = 0;

  SimResult res;
  res.covering = CoveringState(w);
  res.horizon = c.t_end;
  res.n_arrivals = arrivals.size();

  double g = 0.0, d = 0.0;
  bool have_block = false;

  for (const Arrival& a : arrivals) {
    if (a.t < 0.0 || a.t > c.t_end)
      throw std::invalid_argument("arrival outside the simulated horizon");
    while (next_snap < snap_at.size() && snap_at[next_snap] < a.t) {
      res.covering_trace.emplace_back(snap_at[next_snap], res.covering);
      ++next_snap;
    }
    // Free mass between the file and the block's left edge, measured
    // before the allocation; only a file strictly left of the edge (or
    // one able to cover the origin first) can move that edge.
    double free_before = 0.0;
    bool can_jump = have_block ? (a.x < g) : (a.x <= 0.0);
    if (can_jump) free_before = res.covering.free_measure(a.x, have_block ? g : 0.0);
    bool on_block = have_block && a.x >= g && a.x < d;

    auto out = res.covering.allocate(a.x, a.l);
    auto post = res.covering.block_at(0.0);
    double g2 = post ? post->a : 0.0;
    double d2 = post ? post->b : 0.0;

    bool jumped = post && (!have_block || g2 < g);
    if (jumped) {
      JumpRecord rec;
      rec.i = res.jump_log.size() + 1;
      rec.T = a.t;
      rec.G = g - g2;
      rec.D = d2 - d;
      rec.R = a.l - free_before;
      rec.L = rec.G + rec.D;
      rec.kind = rec.R > 0.0 ? JumpKind::left_spill : JumpKind::zero_remainder_merge;
      if (rec.kind == JumpKind::zero_remainder_merge) rec.R = 0.0;
      res.jump_log.push_back(rec);
    } else if (on_block) {
      res.on_block_growth.emplace_back(a.t, d2 - d);
    }

    if (post && (!have_block || g2 != g || d2 != d)) {
      if (out.spilled > 0.0) {
        res.valid = false;
        res.invalidation_reason = "origin-block event ran past the window";
        return res;
      }
      g = g2;
      d = d2;
      have_block = true;
      res.block_trace.push_back({a.t, g, d, d - g});
      if (g < -w + c.margin) {
        res.valid = false;
        res.invalidation_reason = "left edge entered the margin zone";
        return res;
      }
      if (d > w - c.margin) {
        res.valid = false;
        res.invalidation_reason = "right edge entered the margin zone";
        return res;
      }
    }
  }
  while (next_snap < snap_at.size()) {
    res.covering_trace.emplace_back(snap_at[next_snap], res.covering);
    ++next_snap;
  }

  res.final_g = g;
  res.final_d = d;
  return res;
}

inline SimResult run(const SimConfig& c) {
  validate_config(c);
  RandomSource rng(c.seed);
  return run_with_arrivals(c, generate_arrivals(c, rng));
}

// Piecewise-constant state of the origin block at time t; (0,0,0) while
// the origin is uncovered.
inline std::tuple<double, double, double> block_trajectory(const SimResult& r,
                                                           double t) {
  if (t < 0.0 || t > r.horizon) throw QueryPastEnd("query outside [0, t_end]");
  double g = 0.0, d = 0.0, l = 0.0;
  for (const auto& s : r.block_trace) {
    if (s.time > t) break;
    g = s.g;
    d = s.d;
    l = s.l;
  }
  return {g, d, l};
}

}  // namespace parkline
