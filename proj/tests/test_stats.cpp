#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "parkline/stats.hpp"

using namespace parkline;
using doctest::Approx;

namespace {
double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }
}

TEST_CASE("ks statistic on a tiny fixed sample") {
  // the distance itself is defined for any sample size; the test wrapper
  // refuses such a small n (see "small samples are refused")
  std::vector<double> xs = {0.1, 0.5, 0.9};
  CHECK(ks_statistic(xs, uniform_cdf) == Approx(7.0 / 30.0).epsilon(1e-12));
}

TEST_CASE("ks statistic at mid-quantile samples is minimal") {
  const std::size_t n = 10;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = (i + 0.5) / n;
  auto rep = ks_test("quantiles", xs, uniform_cdf);
  CHECK(rep.statistic == Approx(0.5 / n).epsilon(1e-12));
  CHECK(rep.p_value > 0.999);
}

TEST_CASE("ks p-value decreases as the statistic grows") {
  // shift a perfect sample progressively off the diagonal
  const std::size_t n = 100;
  double last_p = 1.1;
  for (double shift : {0.0, 0.05, 0.1, 0.2}) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i)
      xs[i] = std::clamp((i + 0.5) / n + shift, 0.0, 1.0);
    auto rep = ks_test("shifted", xs, uniform_cdf);
    CHECK(rep.p_value < last_p);
    last_p = rep.p_value;
  }
}

TEST_CASE("ks is order-insensitive") {
  std::mt19937_64 gen(5);
  std::vector<double> xs(500);
  for (auto& x : xs) x = std::uniform_real_distribution<double>(0, 1)(gen);
  auto a = ks_test("a", xs, uniform_cdf);
  std::shuffle(xs.begin(), xs.end(), gen);
  auto b = ks_test("b", xs, uniform_cdf);
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);
}

TEST_CASE("chi-square with exactly expected counts") {
  std::vector<std::size_t> counts = {25, 25, 25, 25};
  auto rep = chi_square_pmf_test("flat", counts,
                                 [](std::size_t) { return 0.25; }, false);
  CHECK(rep.statistic == Approx(0.0));
  CHECK(rep.p_value == Approx(1.0));
  CHECK(rep.pass);
}

TEST_CASE("chi-square pools thin cells and can run out of them") {
  // both expectations sit below 5, so pooling collapses everything into a
  // single cell and no test is possible
  std::vector<std::size_t> counts = {4, 4};
  CHECK_THROWS_AS(chi_square_pmf_test("thin", counts,
                                      [](std::size_t) { return 0.5; }, false),
                  DegenerateBinning);
  CHECK_THROWS_AS(chi_square_pmf_test("single", {9},
                                      [](std::size_t) { return 1.0; }, false),
                  DegenerateBinning);
}

TEST_CASE("chi-square statistic is stable under cell reordering") {
  std::vector<std::size_t> counts = {30, 50, 20};
  std::vector<double> pmf = {0.3, 0.5, 0.2};
  auto a = chi_square_pmf_test("fwd", counts, [&](std::size_t k) { return pmf[k]; },
                               false);
  std::vector<std::size_t> rc = {20, 30, 50};
  std::vector<double> rp = {0.2, 0.3, 0.5};
  auto b = chi_square_pmf_test("rev", rc, [&](std::size_t k) { return rp[k]; },
                               false);
  CHECK(a.statistic == Approx(b.statistic).epsilon(1e-12));
  CHECK(a.p_value == Approx(b.p_value).epsilon(1e-12));
}

TEST_CASE("chi-square detects a wrong tail") {
  // all mass observed in the head while the pmf promises a heavy tail
  std::vector<std::size_t> counts = {900, 100, 0};
  auto rep = chi_square_pmf_test("wrong", counts,
                                 [](std::size_t k) { return k == 0 ? 0.5 : 0.25; },
                                 true);
  CHECK_FALSE(rep.pass);
  CHECK(rep.p_value < 1e-6);
}

TEST_CASE("mean test and confidence interval") {
  std::vector<double> flat(100, 2.5);
  auto ci = mean_ci(flat);
  CHECK(ci.mean == Approx(2.5));
  CHECK(ci.half_width == Approx(0.0));

  auto rep = mean_test("const", flat, 2.5);
  CHECK(rep.pass);
  auto bad = mean_test("const-off", flat, 2.6);
  CHECK_FALSE(bad.pass);

  std::mt19937_64 gen(17);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = std::uniform_real_distribution<double>(0, 1)(gen);
  auto ok = mean_test("uniform-mean", xs, 0.5);
  CHECK(ok.p_value > 0.001);
  auto off = mean_test("uniform-mean-off", xs, 0.52);
  CHECK_FALSE(off.pass);
}

TEST_CASE("rank correlation basics") {
  std::vector<std::pair<double, double>> inc, dec, exp_pairs;
  for (int i = 0; i < 50; ++i) {
    double x = i * 0.37;
    inc.push_back({x, x});
    dec.push_back({x, -x});
    exp_pairs.push_back({x, std::exp(x)});
  }
  CHECK(rank_correlation(inc) == Approx(1.0).epsilon(1e-12));
  CHECK(rank_correlation(dec) == Approx(-1.0).epsilon(1e-12));
  // invariant under monotone transforms of either coordinate
  CHECK(rank_correlation(exp_pairs) == Approx(1.0).epsilon(1e-12));

  std::vector<std::pair<double, double>> flat(50, {1.0, 2.0});
  CHECK(rank_correlation(flat) == 0.0);
}

TEST_CASE("rank correlation of independent draws is near zero") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::pair<double, double>> pairs(10000);
  for (auto& p : pairs) p = {u(gen), u(gen)};
  CHECK(std::abs(rank_correlation(pairs)) < 0.05);
  auto rep = rank_correlation_test("indep", pairs);
  CHECK(rep.p_value > 0.001);
}

TEST_CASE("ties get midranks") {
  // y has a tie block; spearman with midranks stays within [-1, 1]
  std::vector<std::pair<double, double>> pairs = {
      {1, 1}, {2, 2}, {3, 2}, {4, 2}, {5, 3}, {6, 4}, {7, 5}, {8, 6}};
  double rho = rank_correlation(pairs);
  CHECK(rho > 0.9);
  CHECK(rho <= 1.0);
}

TEST_CASE("small samples are refused") {
  std::vector<double> few = {1, 2, 3};
  CHECK_THROWS_AS(ks_test("few", few, uniform_cdf), TooFewSamples);
  CHECK_THROWS_AS(mean_ci(few), TooFewSamples);
  std::vector<std::pair<double, double>> fp = {{1, 1}, {2, 2}};
  CHECK_THROWS_AS(rank_correlation(fp), TooFewSamples);
}

TEST_CASE("histogram binning with overflow cell") {
  std::vector<long> vals = {0, 1, 1, 5, 12};
  auto counts = histogram_counts(vals, 3);
  REQUIRE(counts.size() == 4);
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 0);
  CHECK(counts[3] == 2);
  CHECK_THROWS_AS(histogram_counts({-1}, 3), std::invalid_argument);
}

TEST_CASE("pass verdicts compare strictly against significance") {
  std::vector<double> xs(100);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = (i + 0.5) / xs.size();
  auto rep = ks_test("strict", xs, uniform_cdf, 0.01);
  CHECK(rep.pass == (rep.p_value > rep.significance));
}
