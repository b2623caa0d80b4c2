// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Criteria 1-14 run each verification suite at its shipped defaults;
// criterion 15 re-runs every statistical suite under 100 fresh seeds and
// requires at least 95 passes per suite.
#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "parkline/experiments.hpp"

using namespace parkline;

namespace {

int g_failures = 0;

void report(int id, const std::string& text, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << text;
  if (!ok && !detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

ExperimentOutcome run_suite(const std::string& name, std::uint64_t seed) {
  const auto* def = find_experiment(name);
  if (!def) throw std::runtime_error("unknown suite: " + name);
  RunSettings s = def->defaults;
  s.cfg.seed = seed;
  return run_experiment(*def, s).outcome;
}

std::string failing_checks(const ExperimentOutcome& o) {
  std::string out;
  for (const auto& c : o.checks)
    if (!c.pass) {
      if (!out.empty()) out += ", ";
      out += c.name;
    }
  return out;
}

// Runs the named suites at their default settings and seeds; all checks in
// all of them must pass.
void criterion(int id, const std::string& text, const std::vector<std::string>& names) {
  bool ok = true;
  std::string detail;
  for (const auto& name : names) {
    try {
      auto o = run_suite(name, registry().front().defaults.cfg.seed);
      if (!o.pass()) {
        ok = false;
        if (!detail.empty()) detail += "; ";
        detail += name + ": " + failing_checks(o);
      }
    } catch (const std::exception& e) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += name + ": " + e.what();
    }
  }
  report(id, text, ok, detail);
}

}  // namespace

int main() {
  criterion(1, "engine covering matches the path oracle on randomized instances",
            {"oracle-equivalence"});
  criterion(2, "first coverage time is uniform at the driving rate", {"t1-uniform"});
  criterion(3, "rescaled jump gaps are independent uniforms", {"stick-breaking"});
  criterion(4, "remaining mass at left-edge jumps has the scaled tail law",
            {"remaining-uniform", "remaining-exponential"});
  criterion(5, "origin block length follows the size-biased cluster law",
            {"borel-length"});
  criterion(6, "free space fraction matches one minus the stored load",
            {"free-fraction"});
  criterion(7, "left-edge jump count is Poisson with the integrated intensity",
            {"jump-count"});
  criterion(8, "mean left-edge jump size matches the second-moment formula",
            {"mean-g"});
  criterion(9, "left-edge jump size density matches the closed form", {"g-density"});
  criterion(10, "right-edge displacement at jumps follows the forward-passage mixture",
            {"d-jump-law"});
  criterion(11, "the straddling block splits uniformly around the origin",
            {"uniform-split"});
  criterion(12, "laplace transform of the left edge matches quadrature", {"g-laplace"});
  criterion(13, "length conditioned on the right edge follows the restricted law",
            {"length-given-d"});
  criterion(14, "analytic identities: exponent inversion, ladder relations, marginals",
            {"kappa-identities", "rho-mass"});

  // Criterion 15: stability under seed choice. Every Monte Carlo suite is
  // re-run with 100 fresh seeds; each must pass at least 95 times. The two
  // purely analytic suites are seed-independent and are covered above.
  const std::vector<std::string> statistical = {
      "t1-uniform",     "stick-breaking", "remaining-uniform",
      "remaining-exponential", "borel-length",   "free-fraction",
      "jump-count",     "oracle-equivalence", "mean-g",
      "g-density",      "d-jump-law",     "uniform-split",
      "length-given-d", "g-laplace"};
  const int rounds = 100, need = 95;
  bool meta_ok = true;
  std::string meta_detail;
  for (const auto& name : statistical) {
    auto t0 = std::chrono::steady_clock::now();
    int passes = 0;
    for (int r = 0; r < rounds; ++r) {
      std::uint64_t seed = 1000003ull * static_cast<std::uint64_t>(r + 1) + 17;
      try {
        if (run_suite(name, seed).pass()) ++passes;
      } catch (const std::exception&) {
        // a guard trip or sampling failure counts as a failed round
      }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "  [meta] " << name << ": " << passes << "/" << rounds << " ("
              << secs << "s)" << std::endl;
    if (passes < need) {
      meta_ok = false;
      if (!meta_detail.empty()) meta_detail += "; ";
      meta_detail += name + " " + std::to_string(passes) + "/" + std::to_string(rounds);
    }
  }
  report(15, "statistical suites pass at least 95 of 100 fresh seeds", meta_ok,
         meta_detail);

  if (g_failures) {
    std::cout << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all 15 criteria passed" << std::endl;
  return 0;
}
