#pragma once
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "parkline/levy_oracle.hpp"
#include "parkline/report.hpp"
#include "parkline/rng.hpp"
#include "parkline/simulator.hpp"
#include "parkline/stats.hpp"
#include "parkline/theory.hpp"

namespace parkline {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// More than 1% of replicas touched the window margins; the window is too
// small for the requested parameters and the estimates would be biased.
struct WindowDiscardRateExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Named sample channels harvested from the replicas.
using Harvest = std::map<std::string, std::vector<double>>;

struct RunSettings {
  SimConfig cfg;
  std::size_t replicas = 0;
  unsigned threads = 0;         // 0 = hardware default
  bool collect_jump_log = false;  // fill csv_rows on the outcome
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

// Replica k of experiment `name` always sees the same seed, whatever the
// worker count; different experiments sharing a master seed draw disjoint
// streams because the name is folded in.
inline std::uint64_t experiment_master_seed(std::uint64_t seed, std::string_view name) {
  return splitmix64(seed ^ detail::fnv1a64(name));
}

inline void merge_harvest(Harvest& into, Harvest&& part) {
  for (auto& [key, vals] : part) {
    auto& dst = into[key];
    dst.insert(dst.end(), vals.begin(), vals.end());
  }
}

struct ReplicaTally {
  std::size_t requested = 0;
  std::size_t valid = 0;
  std::size_t discarded = 0;
};

// Runs `replicas` independent simulations and feeds every valid result to
// `collect(replica_index, result, harvest)`. Work is split into contiguous
// index chunks, one per worker, and chunk harvests are concatenated in
// index order, so the pooled channels are identical for any worker count.
template <typename Collect>
inline ReplicaTally replicate(const RunSettings& s, std::string_view name,
                              Collect collect, Harvest& out,
                              std::vector<std::string>* csv_rows = nullptr) {
  if (s.replicas == 0) throw ConfigError("replicas must be positive");
  validate_config(s.cfg);
  const std::uint64_t master = experiment_master_seed(s.cfg.seed, name);

  unsigned workers = s.threads;
  if (workers == 0) {
    workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
  }
  if (workers > s.replicas) workers = static_cast<unsigned>(s.replicas);

  std::vector<Harvest> parts(workers);
  std::vector<std::vector<std::string>> csv_parts(workers);
  std::vector<std::size_t> valid(workers, 0), bad(workers, 0);
  std::vector<std::exception_ptr> errors(workers);

  auto body = [&](unsigned c) {
    try {
      std::size_t lo = s.replicas * c / workers;
      std::size_t hi = s.replicas * (c + 1) / workers;
      for (std::size_t k = lo; k < hi; ++k) {
        SimConfig cfg = s.cfg;
        cfg.seed = replica_seed(master, k);
        SimResult r = run(cfg);
        if (!r.valid) {
          ++bad[c];
          continue;
        }
        ++valid[c];
        collect(k, r, parts[c]);
        if (csv_rows && s.collect_jump_log)
          for (const auto& rec : r.jump_log)
            csv_parts[c].push_back(jump_log_csv_row(k, rec));
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned c = 0; c < workers; ++c) pool.emplace_back(body, c);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ReplicaTally tally;
  tally.requested = s.replicas;
  for (unsigned c = 0; c < workers; ++c) {
    tally.valid += valid[c];
    tally.discarded += bad[c];
    merge_harvest(out, std::move(parts[c]));
    if (csv_rows)
      for (auto& row : csv_parts[c]) csv_rows->push_back(std::move(row));
  }
  if (tally.discarded * 100 > tally.requested)
    throw WindowDiscardRateExceeded(
        std::string(name) + ": over 1% of replicas hit the window guard (" +
        std::to_string(tally.discarded) + " of " + std::to_string(tally.requested) +
        "); enlarge --half-width or --margin");
  return tally;
}

struct ExperimentDef {
  std::string name;
  std::string law;  // what is being verified, in plain words
  RunSettings defaults;
  std::function<ExperimentOutcome(const RunSettings&)> execute;
};

namespace detail {

inline void require_unit_files(const SizeMeasure& nu, const std::string& who) {
  const auto* d = std::get_if<Dirac>(&nu);
  if (!d || d->at != 1.0)
    throw ConfigError(who + " needs unit file lengths (--nu dirac:1)");
}

inline void stamp(ExperimentOutcome& o, const ReplicaTally& t) {
  o.requested = t.requested;
  o.valid = t.valid;
  o.discarded = t.discarded;
}

inline PlotTable ecdf_plot(std::string name, std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  PlotTable t;
  t.name = std::move(name);
  if (samples.empty()) return t;
  std::size_t n = samples.size();
  std::size_t stride = std::max<std::size_t>(1, n / 200);
  for (std::size_t i = 0; i < n; i += stride)
    t.rows.push_back({samples[i], static_cast<double>(i + 1) / n, cdf(samples[i])});
  if ((n - 1) % stride != 0)
    t.rows.push_back({samples[n - 1], 1.0, cdf(samples[n - 1])});
  return t;
}

inline PlotTable pmf_plot(std::string name, const std::vector<std::size_t>& counts,
                          const std::function<double(long)>& pmf) {
  PlotTable t;
  t.name = std::move(name);
  std::size_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) return t;
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
    double q = pmf(static_cast<long>(k));
    head += q;
    t.rows.push_back({static_cast<double>(k), static_cast<double>(counts[k]) / n, q});
  }
  t.rows.push_back({static_cast<double>(counts.size() - 1),
                    static_cast<double>(counts.back()) / n, 1.0 - head});
  return t;
}

inline std::vector<long> as_longs(const std::vector<double>& v) {
  std::vector<long> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(std::lround(x));
  return out;
}

inline std::vector<std::pair<double, double>> zip(const std::vector<double>& a,
                                                  const std::vector<double>& b) {
  std::vector<std::pair<double, double>> p;
  p.reserve(std::min(a.size(), b.size()));
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    p.emplace_back(a[i], b[i]);
  return p;
}

// Intensity-weighted average of per-time cell masses over [lo, hi]:
// lengths of origin-block jumps landing in the window are a mixture over
// the jump time, weighted by the jump rate m/(1-mt).
inline std::vector<double> window_mixture_pmf(
    const SizeMeasure& nu, double lo, double hi, std::size_t cells,
    const std::function<double(double, long)>& cell_mass_at) {
  // The outer tolerance stays well above the noise floor of any quadrature
  // nested inside cell_mass_at; 1e-8 on a mixture weight is far below what
  // a chi-square on 1e4 counts can resolve.
  double den = integrate([&](double t) { return jump_time_intensity(nu, t); }, lo, hi, 1e-8);
  std::vector<double> q(cells, 0.0);
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < cells; ++k) {
    double num = integrate(
        [&](double t) {
          return jump_time_intensity(nu, t) * cell_mass_at(t, static_cast<long>(k));
        },
        lo, hi, 1e-8);
    q[k] = num / den;
    head += q[k];
  }
  q[cells - 1] = 1.0 - head;
  return q;
}

}  // namespace detail

// ---------------------------------------------------------------------
// The experiment catalog. Each entry harvests named channels from the
// replicas and evaluates fixed checks against the corresponding law.
// ---------------------------------------------------------------------

inline std::vector<ExperimentDef> build_registry() {
  std::vector<ExperimentDef> defs;
  auto add = [&](std::string name, std::string law, SimConfig cfg, std::size_t replicas,
                 std::function<ExperimentOutcome(const RunSettings&)> fn) {
    ExperimentDef d;
    d.name = std::move(name);
    d.law = std::move(law);
    d.defaults.cfg = std::move(cfg);
    d.defaults.replicas = replicas;
    d.execute = std::move(fn);
    defs.push_back(std::move(d));
  };
  SimConfig base;  // unit files, t_end 0.5, window 200, margin 40

  add("t1-uniform",
      "the first origin-coverage time is uniform on (0, 1/m); restricted to the horizon "
      "that means T1 | T1 <= t_end is uniform on (0, t_end) and coverage happens with "
      "probability m*t_end",
      base, 20000, [](const RunSettings& s) {
        ExperimentOutcome o;
        Harvest h;
        auto tally = replicate(
            s, "t1-uniform",
            [](std::size_t, const SimResult& r, Harvest& hh) {
              hh["reached"].push_back(r.jump_log.empty() ? 0.0 : 1.0);
              if (!r.jump_log.empty()) hh["t1"].push_back(r.jump_log.front().T);
            },
            h, &o.csv_rows);
        detail::stamp(o, tally);
        double te = s.cfg.t_end;
        double rate = mean_size(s.cfg.nu) * te;
        auto cdf = [te](double x) { return std::clamp(x / te, 0.0, 1.0); };
        o.checks.push_back(from_gof(ks_test("first-coverage-time-uniform", h["t1"], cdf)));
        o.checks.push_back(from_gof(mean_test("first-coverage-rate", h["reached"], rate)));
        o.notes.push_back(
            "times beyond the horizon are unobservable, so uniformity is tested "
            "conditionally and the occurrence rate separately; together they pin the "
            "unconditional law on the window");
        o.plots.push_back(detail::ecdf_plot("first-coverage-time", h["t1"], cdf));
        return o;
      });

  add("stick-breaking",
      "inter-jump waits rescale into independent uniforms: given the previous jump at s, "
      "the next one conditioned on the horizon is uniform on (s, t_end)",
      base, 30000, [](const RunSettings& s) {
        ExperimentOutcome o;
        Harvest h;
        const double te = s.cfg.t_end;
        auto tally = replicate(
            s, "stick-breaking",
            [te](std::size_t, const SimResult& r, Harvest& hh) {
              static const char* names[] = {"v1", "v2", "v3"};
              double prev = 0.0;
              for (std::size_t i = 0; i < r.jump_log.size() && i < 3; ++i) {
                double T = r.jump_log[i].T;
                hh[names[i]].push_back((T - prev) / (te - prev));
                prev = T;
              }
              if (r.jump_log.size() >= 2) {
                double t1 = r.jump_log[0].T, t2 = r.jump_log[1].T;
                hh["pair_a"].push_back(t1 / te);
                hh["pair_b"].push_back((t2 - t1) / (te - t1));
              }
            },
            h, &o.csv_rows);
        detail::stamp(o, tally);
        auto u01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
        o.checks.push_back(from_gof(ks_test("rescaled-gap-1-uniform", h["v1"], u01)));
        o.checks.push_back(from_gof(ks_test("rescaled-gap-2-uniform", h["v2"], u01)));
        o.checks.push_back(from_gof(ks_test("rescaled-gap-3-uniform", h["v3"], u01)));
        double rho = rank_correlation(detail::zip(h["pair_a"], h["pair_b"]));
        o.checks.push_back(upper_bound("gap-1-2-rank-correlation", std::fabs(rho), 0.05,
                                       h["pair_a"].size()));
        o.notes.push_back(
            "gap i is rescaled by the time left to the horizon, the conditional version "
            "of stick-breaking over (0, 1/m); each gap is tested on the replicas that "
            "have at least i jumps");
        o.plots.push_back(detail::ecdf_plot("rescaled-gap-1", h["v1"], u01));
        return o;
      });

  auto remaining_exec = [](const char* name, const RunSettings& s) {
    ExperimentOutcome o;
    Harvest h;
    auto tally = replicate(
        s, name,
        [](std::size_t, const SimResult& r, Harvest& hh) {
          for (const auto& rec : r.jump_log)
            if (rec.kind == JumpKind::left_spill) {
              hh["r"].push_back(rec.R);
              hh["t"].push_back(rec.T);
            }
        },
        h, &o.csv_rows);
    detail::stamp(o, tally);
    return std::pair<ExperimentOutcome, Harvest>(std::move(o), std::move(h));
  };

  add("remaining-uniform",
      "the mass spilling over the old left edge at a jump has the stationary-excess law "
      "of the file lengths, independent of the jump time; for unit files that is uniform "
      "on (0, 1)",
      base, 15000, [remaining_exec](const RunSettings& s) {
        detail::require_unit_files(s.cfg.nu, "remaining-uniform");
        auto [o, h] = remaining_exec("remaining-uniform", s);
        auto cdf = [](double z) { return std::clamp(z, 0.0, 1.0); };
        o.checks.push_back(from_gof(ks_test("spill-mass-uniform", h["r"], cdf)));
        double rho = rank_correlation(detail::zip(h["r"], h["t"]));
        o.checks.push_back(
            upper_bound("spill-time-rank-correlation", std::fabs(rho), 0.05, h["r"].size()));
        o.plots.push_back(detail::ecdf_plot("spill-mass", h["r"], cdf));
        return o;
      });

  {
    SimConfig cfg = base;
    cfg.nu = Exponential{1.0};
    add("remaining-exponential",
        "with exponential file lengths the spill-over mass keeps the same exponential "
        "law (the excess of an exponential), independent of the jump time",
        cfg, 15000, [remaining_exec](const RunSettings& s) {
          const auto* e = std::get_if<Exponential>(&s.cfg.nu);
          if (!e) throw ConfigError("remaining-exponential needs --nu exp:<rate>");
          double rate = e->rate;
          auto [o, h] = remaining_exec("remaining-exponential", s);
          auto cdf = [rate](double z) { return z <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * z); };
          o.checks.push_back(from_gof(ks_test("spill-mass-exponential", h["r"], cdf)));
          double rho = rank_correlation(detail::zip(h["r"], h["t"]));
          o.checks.push_back(upper_bound("spill-time-rank-correlation", std::fabs(rho), 0.05,
                                         h["r"].size()));
          o.plots.push_back(detail::ecdf_plot("spill-mass", h["r"], cdf));
          return o;
        });
  }

  add("borel-length",
      "for unit files the origin-block length at time t is size-biased Borel: "
      "P(l = n) = (1-t) (tn)^n e^{-tn} / n!, with an atom 1-t at zero",
      base, 10000, [](const RunSettings& s) {
        detail::require_unit_files(s.cfg.nu, "borel-length");
        ExperimentOutcome o;
        Harvest h;
        auto tally = replicate(
            s, "borel-length",
            [](std::size_t, const SimResult& r, Harvest& hh) {
              hh["length"].push_back(std::round(r.final_d - r.final_g));
            },
            h, &o.csv_rows);
        detail::stamp(o, tally);
        auto counts = histogram_counts(detail::as_longs(h["length"]), 10);
        const double t = s.cfg.t_end;
        auto pmf = [t](long n) { return borel_size_biased_pmf(t, n); };
        o.checks.push_back(from_gof(
            chi_square_pmf_test("block-length-size-biased-borel", counts, pmf, true)));
        o.plots.push_back(detail::pmf_plot("block-length", counts, pmf));
        return o;
      });

  add("free-fraction",
      "the covering leaves a fraction 1 - m*t of the line uncovered at time t",
      base, 100, [](const RunSettings& s) {
        ExperimentOutcome o;
        Harvest h;
        const double w = s.cfg.half_width, m = s.cfg.margin;
        auto tally = replicate(
            s, "free-fraction",
            [w, m](std::size_t, const SimResult& r, Harvest& hh) {
              double span = 2.0 * (w - m);
              hh["fraction"].push_back(r.covering.free_measure(-w + m, w - m) / span);
            },
            h, &o.csv_rows);
        detail::stamp(o, tally);
        double target = 1.0 - mean_size(s.cfg.nu) * s.cfg.t_end;
        MeanCi ci = mean_ci(h["fraction"]);
        o.checks.push_back(upper_bound("free-fraction-absolute-error",
                                       std::fabs(ci.mean - target), 0.01, ci.n));
        o.notes.push_back("measured inside the margin-trimmed window, where truncation "
                          "of out-of-window files cannot bias the covering; 99% CI "
                          "half-width " + detail::shortest(ci.half_width));
        return o;
      });

  add("jump-count",
      "the number of left-edge jumps up to time t is Poisson with mean -log(1 - m*t)",
      base, 10000, [](const RunSettings& s) {
        ExperimentOutcome o;
        Harvest h;
        auto tally = replicate(
            s, "jump-count",
            [](std::size_t, const SimResult& r, Harvest& hh) {
              hh["count"].push_back(static_cast<double>(r.jump_log.size()));
            },
            h, &o.csv_rows);
        detail::stamp(o, tally);
        double lam = expected_jump_count(s.cfg.nu, s.cfg.t_end);
        auto counts = histogram_counts(detail::as_longs(h["count"]), 8);
        auto pmf = [lam](long k) { return poisson_pmf(k, lam); };
        o.checks.push_back(from_gof(chi_square_pmf_test("jump-count-poisson", counts, pmf, true)));
        o.plots.push_back(detail::pmf_plot("jump-count", counts, pmf));
        return o;
      });

  add("oracle-equivalence",
      "the interval engine and the drift-minus-infimum walk on the jump path describe "
      "the same covering, and the engine's spill arithmetic equals path minus running "
      "infimum at the old left edge",
      base, 1000, [](const RunSettings& s) {
        if (s.replicas == 0) throw ConfigError("replicas must be positive");
        ExperimentOutcome o;
        const std::uint64_t master = experiment_master_seed(s.cfg.seed, "oracle-equivalence");
        const double w = 200.0, t_end = 0.1;
        std::size_t compared = 0, mismatches = 0, spill_checks = 0, attempts = 0;
        double max_endpoint = 0.0, max_spill = 0.0;
        std::string first_bad;

        for (std::size_t k = 0; compared < s.replicas; ++k, ++attempts) {
          if (k >= 4 * s.replicas)
            throw ConfigError("oracle-equivalence: too many truncated instances");
          RandomSource rng(replica_seed(master, k));
          SizeMeasure nu;
          switch (rng.index(4)) {
            case 0: nu = Dirac{0.5 + 1.5 * rng.unit()}; break;
            case 1: nu = Exponential{0.5 + 1.5 * rng.unit()}; break;
            case 2: nu = Gamma{0.5 + 1.5 * rng.unit(), 0.25 + 0.5 * rng.unit()}; break;
            default:
              nu = FiniteDiscrete{{{0.4 + rng.unit(), 0.5 + rng.unit()},
                                   {1.5 + rng.unit(), 0.5 + rng.unit()}}};
          }
          std::size_t files = 1 + rng.index(50);
          std::vector<Arrival> arr(files);
          for (auto& a : arr) {
            a.t = rng.uniform(0.0, t_end);
            a.x = rng.uniform(-25.0, 25.0);
            a.l = sample_size(nu, rng);
          }
          std::sort(arr.begin(), arr.end(), [](const Arrival& a, const Arrival& b) {
            return std::tie(a.t, a.x, a.l) < std::tie(b.t, b.x, b.l);
          });
          SimConfig cfg;
          cfg.nu = nu;
          cfg.t_end = t_end;
          cfg.half_width = w;
          cfg.margin = 0.0;
          SimResult res = run_with_arrivals(cfg, arr);
          if (!res.valid) continue;  // replay stopped early, nothing to compare
          ++compared;

          std::vector<std::pair<double, double>> jumps;
          jumps.reserve(arr.size());
          for (const auto& a : arr) jumps.emplace_back(a.x, a.l);
          CoveringState oracle = covering_from_path(build_path(w, 0.0, jumps));

          const auto& ea = res.covering.intervals();
          const auto& eb = oracle.intervals();
          bool bad = ea.size() != eb.size();
          if (!bad)
            for (std::size_t i = 0; i < ea.size(); ++i) {
              max_endpoint = std::max(max_endpoint, std::fabs(ea[i].a - eb[i].a));
              max_endpoint = std::max(max_endpoint, std::fabs(ea[i].b - eb[i].b));
              if (std::fabs(ea[i].a - eb[i].a) > 1e-9 || std::fabs(ea[i].b - eb[i].b) > 1e-9)
                bad = true;
            }
          if (bad) {
            ++mismatches;
            if (first_bad.empty()) {
              first_bad = "instance " + std::to_string(k) + ": engine";
              for (const auto& iv : ea)
                first_bad += " [" + detail::shortest(iv.a) + "," +
                             detail::shortest(iv.b) + ")";
              first_bad += " vs oracle";
              for (const auto& iv : eb)
                first_bad += " [" + detail::shortest(iv.a) + "," +
                             detail::shortest(iv.b) + ")";
              first_bad += "; arrivals";
              for (const auto& a : arr)
                first_bad += " (" + detail::shortest(a.t) + "," +
                             detail::shortest(a.x) + "," +
                             detail::shortest(a.l) + ")";
            }
          }

          double gpre = 0.0;
          std::vector<std::pair<double, double>> prefix;
          std::size_t used = 0;
          for (const auto& rec : res.jump_log) {
            while (used < arr.size() && arr[used].t <= rec.T) {
              prefix.emplace_back(arr[used].x, arr[used].l);
              ++used;
            }
            double want = remaining_mass(build_path(w, 0.0, prefix), gpre, true);
            max_spill = std::max(max_spill, std::fabs(want - rec.R));
            ++spill_checks;
            gpre -= rec.G;
          }
        }
        o.requested = attempts;
        o.valid = compared;
        o.discarded = attempts - compared;
        o.checks.push_back(upper_bound("covering-mismatch-count",
                                       static_cast<double>(mismatches), 0.0, compared));
        o.checks.push_back(upper_bound("max-endpoint-difference", max_endpoint, 1e-9, compared));
        o.checks.push_back(
            upper_bound("max-spill-mass-difference", max_spill, 1e-9, spill_checks));
        if (!first_bad.empty()) o.notes.push_back(first_bad);
        return o;
      });

  add("kappa-identities",
      "the ladder exponent kappa inverts -psi; kappa(R) - R tends to t nu(0,inf], "
      "kappa'(0) equals 1/(1-mt); and first passage of the unit-jump mass path obeys "
      "the occupation-time identity",
      base, 1, [](const RunSettings& s) {
        if (s.replicas == 0) throw ConfigError("replicas must be positive");
        ExperimentOutcome o;
        o.requested = o.valid = 1;
        struct Case {
          const char* label;
          ModelParams p;
        };
        const std::vector<Case> cases = {
            {"unit", {Dirac{1.0}, 0.5}},
            {"exponential", {Exponential{1.0}, 0.5}},
            {"gamma", {Gamma{2.0, 0.5}, 0.5}},
            {"two-atom", {FiniteDiscrete{{{1.0, 0.5}, {2.5, 0.5}}}, 0.4}},
        };
        for (const auto& c : cases) {
          double worst = 0.0;
          for (int i = 0; i <= 24; ++i) {
            double x = std::pow(10.0, -3.0 + 0.25 * i);
            worst = std::max(worst, std::fabs(kappa(c.p, -psi(c.p, x)) - x));
          }
          o.checks.push_back(upper_bound(std::string("kappa-inverts-psi-") + c.label,
                                         worst, 1e-10, 25));
          RelationResiduals rr = relations_check(c.p);
          o.checks.push_back(upper_bound(std::string("ladder-mass-residual-") + c.label,
                                         rr.total_mass, 1e-5, 1));
          o.checks.push_back(upper_bound(std::string("ladder-mean-residual-") + c.label,
                                         rr.first_moment, 1e-5, 1));
          o.checks.push_back(upper_bound(std::string("ladder-derivative-residual-") + c.label,
                                         rr.derivative, 1e-5, 1));
        }
        double worst_fp = 0.0;
        const std::pair<double, double> probes[] = {{0.5, 1.0}, {1.3, 0.7}, {2.0, 0.5}, {10.0, 1.0}};
        for (auto [x, t] : probes)
          worst_fp = std::max(worst_fp, std::fabs(first_passage_identity_residual(t, x)));
        o.checks.push_back(upper_bound("first-passage-identity-residual", worst_fp, 1e-6, 4));
        return o;
      });

  {
    SimConfig cfg = base;
    cfg.t_end = 0.52;
    add("mean-g",
        "given a jump at time t, the left edge moves on average by "
        "(t/(1-mt)^2 + 1/(2m(1-mt))) E[l^2]",
        cfg, 80000, [](const RunSettings& s) {
          ExperimentOutcome o;
          Harvest h;
          const double hi = s.cfg.t_end, lo = hi - 0.04;
          auto tally = replicate(
              s, "mean-g",
              [lo](std::size_t, const SimResult& r, Harvest& hh) {
                for (const auto& rec : r.jump_log)
                  if (rec.T >= lo) hh["g"].push_back(rec.G);
              },
              h, &o.csv_rows);
          detail::stamp(o, tally);
          // Jumps are harvested over a small time window, so the comparison
          // point is the window average of the conditional mean, weighted by
          // the jump rate, not the midpoint value.
          auto weighted = [&](bool with_mean) {
            return integrate(
                [&](double t) {
                  double w = jump_time_intensity(s.cfg.nu, t);
                  return with_mean ? w * mean_g_jump_given_time({s.cfg.nu, t}) : w;
                },
                lo, hi, 1e-10);
          };
          double target = weighted(true) / weighted(false);
          MeanCi ci = mean_ci(h["g"]);
          o.checks.push_back(upper_bound("mean-left-jump-relative-error",
                                         std::fabs(ci.mean - target) / target, 0.05, ci.n));
          o.checks.push_back(
              lower_bound("conditioned-sample-count", static_cast<double>(ci.n), 2000, ci.n));
          o.notes.push_back("jumps conditioned on T in [" + detail::shortest(lo) +
                            ", " + detail::shortest(hi) + "], target averaged over "
                            "the window at the jump rate");
          return o;
        });

    add("g-density",
        "for unit files, the left-edge displacement of a jump at time t has density "
        "(1-t) e^{-tx} (tx)^[x] / [x]!",
        cfg, 40000, [](const RunSettings& s) {
          detail::require_unit_files(s.cfg.nu, "g-density");
          ExperimentOutcome o;
          Harvest h;
          const double hi = s.cfg.t_end, lo = hi - 0.04;
          auto tally = replicate(
              s, "g-density",
              [lo](std::size_t, const SimResult& r, Harvest& hh) {
                for (const auto& rec : r.jump_log)
                  if (rec.T >= lo) hh["g"].push_back(std::min(std::floor(rec.G), 14.0));
              },
              h, &o.csv_rows);
          detail::stamp(o, tally);
          auto counts = histogram_counts(detail::as_longs(h["g"]), 14);
          // cell mass in closed form: integral over [k, k+1) of the density is
          // (1-t)/t (P(k+1, t(k+1)) - P(k+1, tk)) with P the regularized gamma
          auto q = detail::window_mixture_pmf(
              s.cfg.nu, lo, hi, counts.size(), [](double t, long k) {
                return (1.0 - t) / t *
                       (gamma_p(k + 1.0, t * (k + 1)) - gamma_p(k + 1.0, t * k));
              });
          auto pmf = [q](long k) { return q[static_cast<std::size_t>(k)]; };
          o.checks.push_back(
              from_gof(chi_square_pmf_test("left-jump-size-density", counts, pmf, true)));
          o.plots.push_back(detail::pmf_plot("left-jump-size", counts, pmf));
          return o;
        });

    add("d-jump-law",
        "for unit files, the right-edge displacement of a left-spill jump crosses n whole "
        "blocks with the forward-passage probability of the spill mass, the spill being "
        "uniform on (0, 1)",
        cfg, 40000, [](const RunSettings& s) {
          detail::require_unit_files(s.cfg.nu, "d-jump-law");
          ExperimentOutcome o;
          Harvest h;
          const double hi = s.cfg.t_end, lo = hi - 0.04;
          auto tally = replicate(
              s, "d-jump-law",
              [lo](std::size_t, const SimResult& r, Harvest& hh) {
                for (const auto& rec : r.jump_log)
                  if (rec.T >= lo && rec.kind == JumpKind::left_spill)
                    hh["d"].push_back(std::min(std::floor(rec.D), 8.0));
              },
              h, &o.csv_rows);
          detail::stamp(o, tally);
          auto counts = histogram_counts(detail::as_longs(h["d"]), 8);
          auto q = detail::window_mixture_pmf(
              s.cfg.nu, lo, hi, counts.size(), [](double t, long n) {
                return integrate([t, n](double z) { return tau_dirac_pmf(t, z, n); },
                                 0.0, 1.0, 1e-13);
              });
          auto pmf = [q](long k) { return q[static_cast<std::size_t>(k)]; };
          o.checks.push_back(
              from_gof(chi_square_pmf_test("right-displacement-law", counts, pmf, true)));
          o.plots.push_back(detail::pmf_plot("right-displacement", counts, pmf));
          return o;
        });
  }

  add("uniform-split",
      "the origin splits its block uniformly: -g/l is uniform on (0, 1) and independent "
      "of the block length",
      base, 10000, [](const RunSettings& s) {
        ExperimentOutcome o;
        Harvest h;
        auto tally = replicate(
            s, "uniform-split",
            [](std::size_t, const SimResult& r, Harvest& hh) {
              double l = r.final_d - r.final_g;
              if (l > 0.0) {
                hh["g"].push_back(r.final_g);
                hh["l"].push_back(l);
              }
            },
            h, &o.csv_rows);
        detail::stamp(o, tally);
        auto u = uniform_split_values(detail::zip(h["g"], h["l"]));
        auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
        o.checks.push_back(from_gof(ks_test("split-fraction-uniform", u, cdf)));
        double rho = rank_correlation(detail::zip(u, h["l"]));
        o.checks.push_back(
            upper_bound("split-length-rank-correlation", std::fabs(rho), 0.05, u.size()));
        o.plots.push_back(detail::ecdf_plot("split-fraction", u, cdf));
        return o;
      });

  {
    SimConfig cfg = base;
    add("length-given-d",
        "for unit files, given the right edge sits at delta in (0, 1) the block length "
        "is the normalized ladder mass, the same law for every such delta",
        cfg, 20000, [](const RunSettings& s) {
          detail::require_unit_files(s.cfg.nu, "length-given-d");
          ExperimentOutcome o;
          Harvest h;
          auto tally = replicate(
              s, "length-given-d",
              [](std::size_t, const SimResult& r, Harvest& hh) {
                double l = r.final_d - r.final_g;
                if (l > 0.0 && r.final_d >= 0.4 && r.final_d <= 0.6)
                  hh["shifted"].push_back(std::round(l) - 1.0);
              },
              h, &o.csv_rows);
          detail::stamp(o, tally);
          auto law = length_given_right_extremity({s.cfg.nu, s.cfg.t_end}, 0.5, 12);
          auto counts = histogram_counts(detail::as_longs(h["shifted"]), 10);
          auto pmf = [law](long k) { return law[static_cast<std::size_t>(k) + 1]; };
          o.checks.push_back(
              from_gof(chi_square_pmf_test("length-given-right-edge", counts, pmf, true)));
          o.notes.push_back("right edge conditioned to [0.4, 0.6]; the conditional law "
                            "does not depend on the edge position inside (0, 1)");
          o.plots.push_back(detail::pmf_plot("length-given-right-edge", counts, pmf));
          return o;
        });
  }

  add("g-laplace",
      "the left edge's transform E[e^{lambda g}] equals the exponential of an explicit "
      "integral of (e^{-lambda x} - 1)/x against the probability the mass path exceeds x",
      base, 10000, [](const RunSettings& s) {
        if (!std::holds_alternative<Dirac>(s.cfg.nu) &&
            !std::holds_alternative<Exponential>(s.cfg.nu) &&
            !std::holds_alternative<Gamma>(s.cfg.nu))
          throw ConfigError("g-laplace needs a dirac, exp, or gamma file-length law");
        ExperimentOutcome o;
        Harvest h;
        auto tally = replicate(
            s, "g-laplace",
            [](std::size_t, const SimResult& r, Harvest& hh) {
              hh["half"].push_back(std::exp(0.5 * r.final_g));
              hh["one"].push_back(std::exp(1.0 * r.final_g));
            },
            h, &o.csv_rows);
        detail::stamp(o, tally);
        ModelParams p{s.cfg.nu, s.cfg.t_end};
        const std::pair<const char*, double> lams[] = {{"0.5", 0.5}, {"1", 1.0}};
        for (auto [tag, lam] : lams) {
          MeanCi ci = mean_ci(h[lam == 0.5 ? "half" : "one"]);
          double se = ci.half_width / kZ99;
          double target = g_laplace(p, lam);
          o.checks.push_back(upper_bound(std::string("transform-sigmas-lambda-") + tag,
                                         std::fabs(ci.mean - target) / se, 3.0, ci.n));
        }
        return o;
      });

  add("rho-mass",
      "both marginals of the jump-triple intensity carry the full jump rate: total mass "
      "1/(1-t) for unit files",
      base, 1, [](const RunSettings& s) {
        if (s.replicas == 0) throw ConfigError("replicas must be positive");
        detail::require_unit_files(s.cfg.nu, "rho-mass");
        ExperimentOutcome o;
        o.requested = o.valid = 1;
        for (double t : {0.0, 0.1, 0.25, 0.5, 0.7}) {
          RhoMassResiduals rr = rho_marginal_consistency_dirac(t);
          std::string tag = detail::shortest(t);
          o.checks.push_back(
              upper_bound("jump-size-marginal-residual-t" + tag, rr.g_marginal, 1e-6, 1));
          o.checks.push_back(
              upper_bound("spill-marginal-residual-t" + tag, rr.r_marginal, 1e-6, 1));
        }
        return o;
      });

  return defs;
}

inline const std::vector<ExperimentDef>& registry() {
  static const std::vector<ExperimentDef> defs = build_registry();
  return defs;
}

inline const ExperimentDef* find_experiment(std::string_view name) {
  for (const auto& d : registry())
    if (d.name == name) return &d;
  return nullptr;
}

struct ExperimentRun {
  ExperimentOutcome outcome;
  nlohmann::ordered_json report;
  double seconds = 0.0;
};

inline ExperimentRun run_experiment(const ExperimentDef& def, const RunSettings& s) {
  if (s.replicas == 0) throw ConfigError("replicas must be positive");
  auto t0 = std::chrono::steady_clock::now();
  ExperimentRun run;
  run.outcome = def.execute(s);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const ExperimentOutcome& o = run.outcome;
  if (o.discarded * 100 > o.requested)
    throw WindowDiscardRateExceeded(
        def.name + ": " + std::to_string(o.discarded) + " of " +
        std::to_string(o.requested) + " replicas touched the window margin");

  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["experiment"] = def.name;
  j["law"] = def.law;
  nlohmann::ordered_json cfg;
  cfg["nu"] = format_measure(s.cfg.nu);
  cfg["t_end"] = s.cfg.t_end;
  cfg["half_width"] = s.cfg.half_width;
  cfg["margin"] = s.cfg.margin;
  cfg["seed"] = s.cfg.seed;
  cfg["replicas"] = s.replicas;
  if (!s.cfg.trace_times.empty()) cfg["trace_times"] = s.cfg.trace_times;
  j["config"] = std::move(cfg);
  nlohmann::ordered_json reps;
  reps["requested"] = o.requested;
  reps["valid"] = o.valid;
  reps["discarded"] = o.discarded;
  reps["discard_rate"] = o.discard_rate();
  j["replicas"] = std::move(reps);
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : o.checks) j["checks"].push_back(to_json(c));
  j["pass"] = o.pass();
  j["notes"] = o.notes;
  j["wall_clock_seconds"] = run.seconds;
  run.report = std::move(j);
  return run;
}

// Key-value config file: one `key = value` per line, # starts a comment.
// Recognized keys match the CLI flags; flags override the file.
inline void apply_config_file(const std::string& path, RunSettings& s) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string v) {
    std::size_t a = v.find_first_not_of(" \t\r");
    std::size_t b = v.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "nu") {
        s.cfg.nu = parse_measure(val);
      } else if (key == "t_end") {
        s.cfg.t_end = std::stod(val);
      } else if (key == "half_width") {
        s.cfg.half_width = std::stod(val);
      } else if (key == "margin") {
        s.cfg.margin = std::stod(val);
      } else if (key == "seed") {
        s.cfg.seed = std::stoull(val);
      } else if (key == "replicas") {
        s.replicas = std::stoull(val);
      } else if (key == "trace_times") {
        s.cfg.trace_times.clear();
        std::size_t pos = 0;
        while (pos < val.size()) {
          auto comma = val.find(',', pos);
          if (comma == std::string::npos) comma = val.size();
          s.cfg.trace_times.push_back(std::stod(trim(val.substr(pos, comma - pos))));
          pos = comma + 1;
        }
      } else {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key " + key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace parkline
