#pragma once
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parkline/interval_engine.hpp"
#include "parkline/simulator.hpp"
#include "parkline/stats.hpp"

namespace parkline {

using ordered_json = nlohmann::ordered_json;

// One acceptance check inside an experiment: either a goodness-of-fit
// test (pass iff p_value > threshold) or a bound on a statistic.
struct Check {
  enum class Kind { gof, upper_bound, lower_bound };
  std::string name;
  Kind kind = Kind::gof;
  double statistic = 0.0;
  double p_value = 0.0;  // meaningful for gof only
  double threshold = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

inline Check from_gof(const GofReport& g) {
  Check c;
  c.name = g.name;
  c.kind = Check::Kind::gof;
  c.statistic = g.statistic;
  c.p_value = g.p_value;
  c.threshold = g.significance;
  c.n = g.n;
  c.pass = g.p_value > g.significance;
  return c;
}

inline Check upper_bound(std::string name, double stat, double bound, std::size_t n) {
  Check c;
  c.name = std::move(name);
  c.kind = Check::Kind::upper_bound;
  c.statistic = stat;
  c.threshold = bound;
  c.n = n;
  c.pass = stat <= bound;
  return c;
}

inline Check lower_bound(std::string name, double stat, double bound, std::size_t n) {
  Check c;
  c.name = std::move(name);
  c.kind = Check::Kind::lower_bound;
  c.statistic = stat;
  c.threshold = bound;
  c.n = n;
  c.pass = stat >= bound;
  return c;
}

// (x, empirical, theoretical) columns for external plotting.
struct PlotTable {
  std::string name;
  std::vector<std::array<double, 3>> rows;
};

struct ExperimentOutcome {
  std::vector<Check> checks;
  std::size_t requested = 0;
  std::size_t valid = 0;
  std::size_t discarded = 0;
  std::vector<std::string> notes;
  std::vector<PlotTable> plots;
  std::vector<std::string> csv_rows;  // pooled jump log, one line per jump

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  double discard_rate() const {
    return requested ? static_cast<double>(discarded) / requested : 0.0;
  }
};

namespace detail {

inline std::string shortest(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace detail

inline const char* to_string(Check::Kind k) {
  switch (k) {
    case Check::Kind::gof: return "gof";
    case Check::Kind::upper_bound: return "upper_bound";
    default: return "lower_bound";
  }
}

inline ordered_json to_json(const Check& c) {
  ordered_json j;
  j["name"] = c.name;
  j["kind"] = to_string(c.kind);
  j["statistic"] = c.statistic;
  if (c.kind == Check::Kind::gof)
    j["p_value"] = c.p_value;
  else
    j["p_value"] = nullptr;
  j["threshold"] = c.threshold;
  j["n"] = c.n;
  j["pass"] = c.pass;
  return j;
}

inline ordered_json to_json(const CoveringState& s) {
  ordered_json arr = ordered_json::array();
  for (const auto& iv : s.intervals()) arr.push_back({iv.a, iv.b});
  return arr;
}

inline ordered_json to_json(const JumpRecord& r) {
  ordered_json j;
  j["i"] = r.i;
  j["T"] = r.T;
  j["G"] = r.G;
  j["D"] = r.D;
  j["R"] = r.R;
  j["L"] = r.L;
  j["kind"] = to_string(r.kind);
  return j;
}

inline ordered_json to_json(const SimResult& r) {
  ordered_json j;
  j["schema_version"] = 1;
  j["valid"] = r.valid;
  if (!r.valid) j["invalidation_reason"] = r.invalidation_reason;
  j["horizon"] = r.horizon;
  j["n_arrivals"] = r.n_arrivals;
  ordered_json log = ordered_json::array();
  for (const auto& rec : r.jump_log) log.push_back(to_json(rec));
  j["jump_log"] = std::move(log);
  ordered_json trace = ordered_json::array();
  for (const auto& s : r.block_trace) trace.push_back({s.time, s.g, s.d, s.l});
  j["block_trace"] = std::move(trace);
  ordered_json growth = ordered_json::array();
  for (const auto& [t, dd] : r.on_block_growth) growth.push_back({t, dd});
  j["on_block_growth"] = std::move(growth);
  j["final_g"] = r.final_g;
  j["final_d"] = r.final_d;
  j["covering"] = to_json(r.covering);
  if (!r.covering_trace.empty()) {
    ordered_json ct = ordered_json::array();
    for (const auto& [t, cov] : r.covering_trace) {
      ordered_json e;
      e["time"] = t;
      e["covering"] = to_json(cov);
      ct.push_back(std::move(e));
    }
    j["covering_trace"] = std::move(ct);
  }
  return j;
}

inline std::string jump_log_csv_row(std::size_t replica, const JumpRecord& r) {
  std::string row = std::to_string(replica);
  row += ',';
  row += std::to_string(r.i);
  for (double v : {r.T, r.G, r.D, r.R, r.L}) {
    row += ',';
    row += detail::shortest(v);
  }
  row += ',';
  row += to_string(r.kind);
  return row;
}

inline constexpr const char* kJumpLogCsvHeader = "replica,i,T,G,D,R,L,kind";

inline std::string render_plot_table(const PlotTable& t) {
  std::string out = "x\tempirical\ttheoretical\n";
  for (const auto& row : t.rows) {
    out += detail::shortest(row[0]);
    out += '\t';
    out += detail::shortest(row[1]);
    out += '\t';
    out += detail::shortest(row[2]);
    out += '\n';
  }
  return out;
}

}  // namespace parkline
