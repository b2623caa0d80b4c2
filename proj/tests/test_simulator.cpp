#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "parkline/levy_oracle.hpp"
#include "parkline/rng.hpp"
#include "parkline/simulator.hpp"

using namespace parkline;
using doctest::Approx;

namespace {
SimConfig base_config() {
  SimConfig c;
  c.nu = Dirac{1.0};
  c.t_end = 0.5;
  c.half_width = 200.0;
  c.margin = 40.0;
  return c;
}
}  // namespace

TEST_CASE("single file covering the origin") {
  SimConfig c = base_config();
  auto res = run_with_arrivals(c, {{0.3, 0.0, 1.0}});
  CHECK(res.valid);
  REQUIRE(res.jump_log.size() == 1);
  const auto& rec = res.jump_log[0];
  CHECK(rec.i == 1);
  CHECK(rec.T == Approx(0.3));
  CHECK(rec.G == Approx(0.0));
  CHECK(rec.D == Approx(1.0));
  CHECK(rec.R == Approx(1.0));
  CHECK(rec.L == Approx(1.0));
  CHECK(rec.kind == JumpKind::left_spill);

  auto before = block_trajectory(res, 0.2);
  CHECK(std::get<0>(before) == 0.0);
  CHECK(std::get<1>(before) == 0.0);
  CHECK(std::get<2>(before) == 0.0);
  auto after = block_trajectory(res, 0.4);
  CHECK(std::get<0>(after) == Approx(0.0));
  CHECK(std::get<1>(after) == Approx(1.0));
  CHECK(std::get<2>(after) == Approx(1.0));
}

TEST_CASE("merge through an established left block") {
  SimConfig c = base_config();
  auto res = run_with_arrivals(
      c, {{0.1, -2.0, 1.0}, {0.2, 0.0, 1.0}, {0.3, -1.5, 1.0}});
  CHECK(res.valid);
  REQUIRE(res.jump_log.size() == 2);

  CHECK(res.jump_log[0].T == Approx(0.2));
  CHECK(res.jump_log[0].G == Approx(0.0));
  CHECK(res.jump_log[0].D == Approx(1.0));
  CHECK(res.jump_log[0].R == Approx(1.0));
  CHECK(res.jump_log[0].kind == JumpKind::left_spill);

  const auto& m = res.jump_log[1];
  CHECK(m.T == Approx(0.3));
  CHECK(m.G == Approx(2.0));
  CHECK(m.D == Approx(0.0));
  CHECK(m.R == 0.0);
  CHECK(m.L == Approx(2.0));
  CHECK(m.kind == JumpKind::zero_remainder_merge);

  auto ivs = res.covering.intervals();
  REQUIRE(ivs.size() == 1);
  CHECK(ivs[0].a == Approx(-2.0));
  CHECK(ivs[0].b == Approx(1.0));
  CHECK(res.final_g == Approx(-2.0));
  CHECK(res.final_d == Approx(1.0));
}

TEST_CASE("files on the origin block only push its right edge") {
  SimConfig c = base_config();
  auto res = run_with_arrivals(c, {{0.1, 0.0, 1.0}, {0.2, 0.5, 1.0}});
  CHECK(res.jump_log.size() == 1);
  REQUIRE(res.on_block_growth.size() == 1);
  CHECK(res.on_block_growth[0].first == Approx(0.2));
  CHECK(res.on_block_growth[0].second == Approx(1.0));
  auto s = block_trajectory(res, 0.3);
  CHECK(std::get<1>(s) == Approx(2.0));
}

TEST_CASE("arrival generation matches the driving intensity") {
  SimConfig c = base_config();
  c.half_width = 50.0;
  RandomSource rng(91);

  double total = 0.0;
  const int runs = 10000;
  for (int r = 0; r < runs; ++r) {
    auto a = generate_arrivals(c, rng);
    total += a.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].t >= 0.0);
      CHECK(a[i].t <= c.t_end);
      CHECK(a[i].x >= -c.half_width);
      CHECK(a[i].x <= c.half_width);
      CHECK(a[i].l == 1.0);
      if (i) CHECK(a[i - 1].t <= a[i].t);
    }
  }
  CHECK(total / runs == Approx(50.0).epsilon(0.01));

  SimConfig zero = c;
  zero.t_end = 0.0;  // degenerate horizon: no files can arrive
  CHECK(generate_arrivals(zero, rng).empty());
}

TEST_CASE("configuration validation") {
  SimConfig c = base_config();
  CHECK_NOTHROW(validate_config(c));

  SimConfig bad = c;
  bad.t_end = 0.0;
  CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
  bad = c;
  bad.t_end = 1.0;  // saturation for unit mean lengths
  CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
  bad = c;
  bad.margin = c.half_width;
  CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
  bad = c;
  bad.trace_times = {0.7};
  CHECK_THROWS_AS(validate_config(bad), QueryPastEnd);
}

TEST_CASE("trajectory queries outside the horizon are refused") {
  SimConfig c = base_config();
  auto res = run_with_arrivals(c, {{0.3, 0.0, 1.0}});
  CHECK_THROWS_AS(block_trajectory(res, 0.6), QueryPastEnd);
  CHECK_THROWS_AS(block_trajectory(res, -0.1), QueryPastEnd);
}

TEST_CASE("covered mass equals consumed mass") {
  SimConfig c = base_config();
  c.seed = 7;
  RandomSource rng(c.seed);
  for (int rep = 0; rep < 20; ++rep) {
    auto arrivals = generate_arrivals(c, rng);
    auto res = run_with_arrivals(c, arrivals);
    // no spill is possible this deep inside the window, so covered mass
    // must equal total arrived mass minus what stayed in free gaps
    CoveringState replay(c.half_width);
    double consumed = 0.0;
    for (const auto& a : arrivals) consumed += replay.allocate(a.x, a.l).consumed;
    CHECK(res.covering.covered_length() == Approx(consumed).epsilon(1e-12));
  }
}

TEST_CASE("origin block evolution is monotone") {
  SimConfig c = base_config();
  c.seed = 11;
  auto res = run(c);
  REQUIRE(res.valid);
  double g = 0.0, d = 0.0;
  for (const auto& s : res.block_trace) {
    CHECK(s.g <= g + 1e-12);
    CHECK(s.d >= d - 1e-12);
    CHECK(s.l == Approx(s.d - s.g).epsilon(1e-12));
    g = s.g;
    d = s.d;
  }
  CHECK(res.final_g == Approx(g));
  CHECK(res.final_d == Approx(d));

  // left-edge moves line up with the jump log
  std::size_t ji = 0;
  double prev_g = 0.0;
  for (const auto& s : res.block_trace) {
    if (s.g < prev_g - 1e-12 || (ji == 0 && s.l > 0)) {
      REQUIRE(ji < res.jump_log.size());
      CHECK(res.jump_log[ji].T == Approx(s.time));
      CHECK(res.jump_log[ji].G == Approx(prev_g - s.g).epsilon(1e-9));
      ++ji;
    }
    prev_g = s.g;
  }
  CHECK(ji == res.jump_log.size());
}

TEST_CASE("covering snapshots agree with the path oracle") {
  SimConfig c = base_config();
  c.half_width = 60.0;
  c.margin = 0.0;
  c.trace_times = {0.1, 0.3, 0.5};
  RandomSource rng(5150);

  for (int rep = 0; rep < 30; ++rep) {
    auto arrivals = generate_arrivals(c, rng);
    auto res = run_with_arrivals(c, arrivals);
    REQUIRE(res.covering_trace.size() == 3);
    for (const auto& [time, snap] : res.covering_trace) {
      std::vector<std::pair<double, double>> jumps;
      for (const auto& a : arrivals)
        if (a.t <= time) jumps.push_back({a.x, a.l});
      auto want = covering_from_path(build_path(c.half_width, 0.0, jumps));
      auto wi = want.intervals();
      auto gi = snap.intervals();
      REQUIRE(gi.size() == wi.size());
      for (std::size_t k = 0; k < wi.size(); ++k) {
        CHECK(gi[k].a == Approx(wi[k].a).epsilon(1e-9));
        CHECK(gi[k].b == Approx(wi[k].b).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("remaining mass in the log matches the path oracle") {
  SimConfig c = base_config();
  c.half_width = 60.0;
  c.margin = 0.0;
  RandomSource rng(31337);

  int checked = 0;
  for (int rep = 0; rep < 120; ++rep) {
    auto arrivals = generate_arrivals(c, rng);
    auto res = run_with_arrivals(c, arrivals);
    double edge = 0.0;
    for (const auto& rec : res.jump_log) {
      std::vector<std::pair<double, double>> jumps;
      for (const auto& a : arrivals)
        if (a.t <= rec.T) jumps.push_back({a.x, a.l});
      auto path = build_path(c.half_width, 0.0, jumps);
      double want = remaining_mass(path, edge, true);
      CHECK(rec.R == Approx(want).epsilon(1e-9));
      edge -= rec.G;
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("jump count concentrates on its expected value") {
  SimConfig c = base_config();
  c.half_width = 50.0;
  c.margin = 10.0;

  const int runs = 10000;
  std::vector<double> counts;
  counts.reserve(runs);
  for (int r = 0; r < runs; ++r) {
    SimConfig cr = c;
    cr.seed = replica_seed(1234, r);
    auto res = run(cr);
    if (res.valid) counts.push_back(static_cast<double>(res.jump_log.size()));
  }
  REQUIRE(counts.size() > 9900);
  double mean = 0.0;
  for (double v : counts) mean += v;
  mean /= counts.size();
  double var = 0.0;
  for (double v : counts) var += (v - mean) * (v - mean);
  var /= counts.size() - 1;
  double sigma = std::sqrt(var / counts.size());
  CHECK(std::abs(mean - std::log(2.0)) < 3.0 * sigma + 1e-3);
}

TEST_CASE("events that leave the safe window invalidate the replica") {
  SimConfig c = base_config();
  c.half_width = 5.0;
  c.margin = 2.0;

  auto right = run_with_arrivals(c, {{0.1, -0.2, 4.0}});
  CHECK_FALSE(right.valid);
  CHECK(right.invalidation_reason.find("right edge") != std::string::npos);

  auto left = run_with_arrivals(c, {{0.1, -0.5, 1.0}, {0.2, -3.2, 3.0}});
  CHECK_FALSE(left.valid);
  CHECK(left.invalidation_reason.find("left edge") != std::string::npos);

  SimConfig tight = base_config();
  tight.half_width = 3.0;
  tight.margin = 0.0;
  auto spill = run_with_arrivals(tight, {{0.1, 0.0, 2.0}, {0.2, -0.5, 3.0}});
  CHECK_FALSE(spill.valid);
  CHECK(spill.invalidation_reason.find("past the window") != std::string::npos);

  // far-away spill does not touch the origin block and stays valid
  auto far = run_with_arrivals(tight, {{0.1, 2.5, 4.0}});
  CHECK(far.valid);
}

TEST_CASE("identical seeds reproduce identical runs") {
  SimConfig c = base_config();
  c.seed = 20240101;
  auto a = run(c);
  auto b = run(c);
  REQUIRE(a.jump_log.size() == b.jump_log.size());
  for (std::size_t i = 0; i < a.jump_log.size(); ++i) {
    CHECK(a.jump_log[i].T == b.jump_log[i].T);
    CHECK(a.jump_log[i].G == b.jump_log[i].G);
  }
  CHECK(a.final_g == b.final_g);
  CHECK(a.final_d == b.final_d);
}
