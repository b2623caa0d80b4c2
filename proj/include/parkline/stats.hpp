#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "parkline/numeric.hpp"

namespace parkline {

struct TooFewSamples : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateBinning : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GofReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 0.0;
  std::size_t n = 0;
  double significance = 0.01;
  bool pass = false;
};

constexpr std::size_t kMinSamples = 8;

// Samples are sorted (or rank-sorted) before any arithmetic, so every
// test gives bit-identical results however the replica outputs were
// interleaved before the call.

// Two-sided KS distance between the empirical cdf and a reference cdf.
// Well defined for any nonempty sample; the hypothesis test below insists
// on kMinSamples in addition, since its p-value is asymptotic.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  if (samples.empty()) throw TooFewSamples("ks statistic of an empty sample");
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max(d, (i + 1) / n - f);
    d = std::max(d, f - i / n);
  }
  return d;
}

inline GofReport ks_test(std::string name, std::vector<double> samples,
                         const std::function<double(double)>& cdf,
                         double significance = 0.01) {
  if (samples.size() < kMinSamples)
    throw TooFewSamples(name + ": need at least 8 samples");
  std::size_t count = samples.size();
  double d = ks_statistic(std::move(samples), cdf);
  GofReport r;
  r.name = std::move(name);
  r.statistic = d;
  r.p_value = kolmogorov_sf(std::sqrt(static_cast<double>(count)) * d);
  r.n = count;
  r.significance = significance;
  r.pass = r.p_value > significance;
  return r;
}

// Pearson's chi-square against a discrete law. counts[k] observes value k;
// when last_is_tail the final cell holds everything >= its index and its
// expectation is the complementary mass. Cells are pooled left to right
// until each pooled cell expects at least 5.
inline GofReport chi_square_pmf_test(std::string name,
                                     const std::vector<std::size_t>& counts,
                                     const std::function<double(long)>& pmf,
                                     bool last_is_tail,
                                     double significance = 0.01) {
  if (counts.size() < 2) throw DegenerateBinning(name + ": need at least 2 cells");
  std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total < kMinSamples) throw TooFewSamples(name + ": need at least 8 samples");
  double n = static_cast<double>(total);

  std::vector<double> expected(counts.size());
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
    double q = pmf(static_cast<long>(k));
    expected[k] = n * q;
    head += q;
  }
  expected.back() = last_is_tail ? n * std::max(0.0, 1.0 - head)
                                 : n * pmf(static_cast<long>(counts.size()) - 1);

  std::vector<std::pair<double, double>> pooled;  // (observed, expected)
  double obs_acc = 0.0, exp_acc = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    obs_acc += static_cast<double>(counts[k]);
    exp_acc += expected[k];
    if (exp_acc >= 5.0) {
      pooled.emplace_back(obs_acc, exp_acc);
      obs_acc = exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (pooled.empty()) throw DegenerateBinning(name + ": expectations too thin");
    pooled.back().first += obs_acc;
    pooled.back().second += exp_acc;
  }
  if (pooled.size() < 2) throw DegenerateBinning(name + ": pooling left one cell");

  double stat = 0.0;
  for (const auto& [obs, exp] : pooled) stat += (obs - exp) * (obs - exp) / exp;
  GofReport r;
  r.name = std::move(name);
  r.statistic = stat;
  r.p_value = chi_square_sf(stat, static_cast<double>(pooled.size() - 1));
  r.n = total;
  r.significance = significance;
  r.pass = r.p_value > significance;
  return r;
}

// Z-test of the sample mean against a known target.
inline GofReport mean_test(std::string name, std::vector<double> samples,
                           double target, double significance = 0.01) {
  if (samples.size() < kMinSamples)
    throw TooFewSamples(name + ": need at least 8 samples");
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  GofReport r;
  r.name = std::move(name);
  r.n = samples.size();
  r.significance = significance;
  if (sd == 0.0) {
    r.statistic = mean == target ? 0.0 : std::numeric_limits<double>::infinity();
    r.p_value = mean == target ? 1.0 : 0.0;
  } else {
    r.statistic = (mean - target) / (sd / std::sqrt(n));
    r.p_value = normal_two_sided_p(r.statistic);
  }
  r.pass = r.p_value > significance;
  return r;
}

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 99% two-sided
  std::size_t n = 0;
};

inline MeanCi mean_ci(std::vector<double> samples) {
  if (samples.size() < kMinSamples) throw TooFewSamples("need at least 8 samples");
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  MeanCi c;
  c.n = samples.size();
  c.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - c.mean) * (x - c.mean);
  c.half_width = kZ99 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return c;
}

namespace detail {

inline std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double r = 0.5 * (i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace detail

// Spearman correlation with midranks for ties. Pairs are sorted first so
// the value does not depend on sample order.
inline double rank_correlation(std::vector<std::pair<double, double>> pairs) {
  if (pairs.size() < kMinSamples) throw TooFewSamples("need at least 8 samples");
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> xs, ys;
  xs.reserve(pairs.size());
  ys.reserve(pairs.size());
  for (const auto& [x, y] : pairs) xs.push_back(x), ys.push_back(y);
  auto rx = detail::midranks(xs);
  auto ry = detail::midranks(ys);
  double n = static_cast<double>(pairs.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Independence test on the rank correlation, normal approximation
// z = rho sqrt(n - 1).
inline GofReport rank_correlation_test(std::string name,
                                       std::vector<std::pair<double, double>> pairs,
                                       double significance = 0.01) {
  GofReport r;
  r.name = std::move(name);
  r.n = pairs.size();
  r.significance = significance;
  double rho = rank_correlation(std::move(pairs));
  r.statistic = rho;
  r.p_value = rho == 0.0 ? 1.0
                         : normal_two_sided_p(rho * std::sqrt(static_cast<double>(r.n) - 1.0));
  r.pass = r.p_value > significance;
  return r;
}

// Integer samples -> cell counts on [0, kmax], overflow pooled into the
// last cell (pair with last_is_tail = true).
inline std::vector<std::size_t> histogram_counts(const std::vector<long>& vals,
                                                 long kmax) {
  if (kmax < 1) throw std::invalid_argument("histogram needs kmax >= 1");
  std::vector<std::size_t> counts(static_cast<std::size_t>(kmax) + 1, 0);
  for (long v : vals) {
    if (v < 0) throw std::invalid_argument("histogram values must be nonnegative");
    counts[static_cast<std::size_t>(std::min(v, kmax))] += 1;
  }
  return counts;
}

}  // namespace parkline
