#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "parkline/numeric.hpp"
#include "parkline/rng.hpp"
#include "parkline/size_measure.hpp"
#include "parkline/stats.hpp"

using namespace parkline;
using doctest::Approx;

TEST_CASE("unit dirac moments and tail") {
  SizeMeasure nu = Dirac{1.0};
  CHECK(total_mass(nu) == 1.0);
  CHECK(mean_size(nu) == 1.0);
  CHECK(second_moment(nu) == 1.0);
  CHECK(tail(nu, 0.0) == 1.0);
  CHECK(tail(nu, 0.5) == 1.0);
  CHECK(tail(nu, 1.0) == 0.0);  // strictly-above convention
  CHECK(tail(nu, 2.0) == 0.0);
}

TEST_CASE("exponential moments and tail") {
  SizeMeasure nu = Exponential{2.0};
  CHECK(total_mass(nu) == Approx(1.0).epsilon(1e-12));
  CHECK(mean_size(nu) == Approx(0.5).epsilon(1e-12));
  CHECK(second_moment(nu) == Approx(0.5).epsilon(1e-12));
  CHECK(tail(nu, 1.0) == Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(tail(nu, 0.0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gamma moments and tail") {
  SizeMeasure nu = Gamma{2.0, 0.5};
  CHECK(total_mass(nu) == Approx(1.0).epsilon(1e-12));
  CHECK(mean_size(nu) == Approx(1.0).epsilon(1e-12));
  CHECK(second_moment(nu) == Approx(1.5).epsilon(1e-12));
  // P(X > 1) for shape 2, scale 0.5: Q(2, 2) = 3 e^{-2}
  CHECK(tail(nu, 1.0) == Approx(3.0 * std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("two-atom discrete measure") {
  SizeMeasure nu = FiniteDiscrete{{{1.0, 0.5}, {2.5, 0.5}}};
  CHECK(total_mass(nu) == 1.0);
  CHECK(mean_size(nu) == Approx(1.75).epsilon(1e-12));
  CHECK(second_moment(nu) == Approx(0.5 + 0.5 * 2.5 * 2.5).epsilon(1e-12));
  CHECK(tail(nu, 0.9) == 1.0);
  CHECK(tail(nu, 1.0) == 0.5);
  CHECK(tail(nu, 2.5) == 0.0);
}

TEST_CASE("mean equals the integral of the tail") {
  auto integral_matches = [](const SizeMeasure& nu, double hi) {
    double got = integrate([&](double x) { return tail(nu, x); }, 0.0, hi, 1e-9);
    CHECK(got == Approx(mean_size(nu)).epsilon(1e-6));
  };
  integral_matches(Dirac{1.0}, 1.0);
  integral_matches(Exponential{1.0}, 40.0);
  integral_matches(Gamma{2.0, 0.5}, 30.0);
  integral_matches(FiniteDiscrete{{{1.0, 0.5}, {2.5, 0.5}}}, 2.5);
}

TEST_CASE("measure grammar round-trips") {
  for (const char* text : {"dirac:1", "dirac:0.75", "exp:2", "gamma:2,0.5",
                           "discrete:1=0.5,2.5=0.5"}) {
    SizeMeasure nu = parse_measure(text);
    CHECK(format_measure(nu) == text);
  }
}

TEST_CASE("grammar rejects malformed input") {
  CHECK_THROWS_AS(parse_measure(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_measure("weibull:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_measure("dirac:"), std::invalid_argument);
  CHECK_THROWS_AS(parse_measure("dirac:abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_measure("gamma:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_measure("discrete:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_measure("exp:-1"), std::invalid_argument);
}

TEST_CASE("validation rejects degenerate parameters") {
  CHECK_THROWS_AS(validate(Dirac{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Dirac{-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Exponential{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Gamma{0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Gamma{1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(FiniteDiscrete{{}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(FiniteDiscrete{{{1.0, -0.5}}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(FiniteDiscrete{{{-1.0, 0.5}}}), std::invalid_argument);
  CHECK_NOTHROW(validate(Dirac{1.0}));
}

TEST_CASE("sampling follows the normalized law") {
  RandomSource rng(20240617);

  SUBCASE("dirac draws are constant") {
    SizeMeasure nu = Dirac{0.75};
    for (int i = 0; i < 100; ++i) CHECK(sample_size(nu, rng) == 0.75);
  }

  SUBCASE("exponential draws pass KS") {
    SizeMeasure nu = Exponential{2.0};
    std::vector<double> xs(10000);
    for (auto& x : xs) x = sample_size(nu, rng);
    auto rep = ks_test("exp-sample", xs,
                       [](double z) { return z <= 0.0 ? 0.0 : 1.0 - std::exp(-2.0 * z); });
    CHECK(rep.p_value > 0.001);
  }

  SUBCASE("gamma draws pass KS") {
    SizeMeasure nu = Gamma{2.0, 0.5};
    std::vector<double> xs(10000);
    for (auto& x : xs) x = sample_size(nu, rng);
    auto rep = ks_test("gamma-sample", xs,
                       [](double z) { return z <= 0.0 ? 0.0 : gamma_p(2.0, z / 0.5); });
    CHECK(rep.p_value > 0.001);
  }

  SUBCASE("discrete draws match the weights") {
    SizeMeasure nu = FiniteDiscrete{{{1.0, 1.0}, {2.5, 3.0}}};
    std::size_t small = 0, n = 20000;
    for (std::size_t i = 0; i < n; ++i)
      if (sample_size(nu, rng) == 1.0) ++small;
    double frac = static_cast<double>(small) / n;
    CHECK(frac == Approx(0.25).epsilon(0.05));
  }
}
