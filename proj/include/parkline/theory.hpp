#pragma once
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "parkline/numeric.hpp"
#include "parkline/size_measure.hpp"

namespace parkline {

struct UnsupportedMeasure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model at a fixed time t: file lengths nu, subcritical load m*t < 1.
struct ModelParams {
  SizeMeasure nu;
  double t = 0.0;
};

inline void validate_params(const ModelParams& p) {
  validate(p.nu);
  if (p.t < 0.0) throw std::invalid_argument("time must be nonnegative");
  if (!(mean_size(p.nu) * p.t < 1.0))
    throw std::invalid_argument("saturated regime: mean * t must stay below 1");
}

// Spatial-path exponent: psi(rho) = -rho + t * integral (1 - e^{-rho x}) nu(dx).
// Every measure variant has a closed-form transform.
inline double psi(const ModelParams& p, double rho) {
  if (rho < 0.0) throw std::invalid_argument("psi: rho must be nonnegative");
  double integ = std::visit(
      [rho](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Dirac>) return 1.0 - std::exp(-rho * m.at);
        if constexpr (std::is_same_v<T, Exponential>) return rho / (rho + m.rate);
        if constexpr (std::is_same_v<T, Gamma>)
          return 1.0 - std::pow(1.0 + rho * m.scale, -m.shape);
        if constexpr (std::is_same_v<T, FiniteDiscrete>) {
          double s = 0.0;
          for (const auto& [sz, w] : m.atoms) s += w * (1.0 - std::exp(-rho * sz));
          return s;
        }
      },
      p.nu);
  return -rho + p.t * integ;
}

// kappa = inverse of rho -> -psi(rho) on [0, inf); kappa(-psi(s)) = s.
// -psi is increasing with slope >= 1 - m t > 0, so the root is bracketed
// by [0, rho / (1 - m t)] and bisection cannot miss it.
inline double kappa(const ModelParams& p, double rho) {
  if (rho < 0.0) throw std::invalid_argument("kappa: rho must be nonnegative");
  if (rho == 0.0) return 0.0;
  double slope = 1.0 - mean_size(p.nu) * p.t;
  double hi = rho / slope * (1.0 + 1e-12) + 1e-12;
  return solve_increasing([&](double s) { return -psi(p, s); }, rho, 0.0, hi, 1e-13);
}

// d/drho kappa at 0+, one-sided difference with one Richardson step.
inline double kappa_derivative_at_zero(const ModelParams& p, double h = 1e-6) {
  double d1 = kappa(p, h) / h;
  double d2 = kappa(p, 2.0 * h) / (2.0 * h);
  return 2.0 * d1 - d2;
}

struct RelationResiduals {
  double total_mass = 0.0;   // |(kappa(R) - R) - t nu((0,inf])| at large R
  double first_moment = 0.0; // |(kappa'(0) - 1) - m t / (1 - m t)|
  double derivative = 0.0;   // |kappa'(0) - 1 / (1 - m t)|
};

inline RelationResiduals relations_check(const ModelParams& p) {
  validate_params(p);
  double m = mean_size(p.nu);
  double mt = m * p.t;
  RelationResiduals r;
  double big = 1e7;
  r.total_mass = std::fabs((kappa(p, big) - big) - p.t * total_mass(p.nu));
  double kp0 = kappa_derivative_at_zero(p);
  r.first_moment = std::fabs((kp0 - 1.0) - mt / (1.0 - mt));
  r.derivative = std::fabs(kp0 - 1.0 / (1.0 - mt));
  return r;
}

// --- Closed forms for unit file lengths -------------------------------

// P(l(t) = n): size-biased cluster-size law; n = 0 carries mass 1 - t.
inline double borel_size_biased_pmf(double t, long n) {
  if (n < 0) return 0.0;
  if (n == 0) return 1.0 - t;
  if (t == 0.0) return 0.0;
  double tn = t * n;
  return (1.0 - t) * std::exp(n * std::log(tn) - tn - log_gamma(n + 1.0));
}

// Ladder-height mass at n >= 1: (t n)^n e^{-t n} / (n * n!).
inline double pi_dirac_mass(double t, long n) {
  if (n < 1) return 0.0;
  if (t == 0.0) return 0.0;
  double tn = t * n;
  return std::exp(n * std::log(tn) - tn - log_gamma(n + 1.0)) / n;
}

// P(tau_x = x + n) for the forward passage of level x > 0:
// (x / (x + n)) e^{-t (x + n)} (t (x + n))^n / n!.
inline double tau_dirac_pmf(double t, double x, long n) {
  if (n < 0 || !(x > 0.0)) return 0.0;
  double y = x + n;
  if (n == 0) return std::exp(-t * y);
  if (t == 0.0) return 0.0;
  return (x / y) * std::exp(n * std::log(t * y) - t * y - log_gamma(n + 1.0));
}

// Density of the mass passing over the block's left edge: tail(z) / m.
inline double remaining_density(const SizeMeasure& nu, double z) {
  return tail(nu, z) / mean_size(nu);
}

inline double jump_time_intensity(const SizeMeasure& nu, double t) {
  double mt = mean_size(nu) * t;
  if (!(mt < 1.0)) throw std::invalid_argument("saturated regime");
  return mean_size(nu) / (1.0 - mt);
}

// Mean number of left-edge jumps on [0, t]: -log(1 - m t).
inline double expected_jump_count(const SizeMeasure& nu, double t) {
  double mt = mean_size(nu) * t;
  if (!(mt < 1.0)) throw std::invalid_argument("saturated regime");
  return -std::log(1.0 - mt);
}

// Jump times -> residual fractions U_i = (T_i - T_{i-1}) / (1/m - T_{i-1}),
// with T_0 = 0. Under the model these are iid uniform on (0,1).
inline std::vector<double> stick_breaking_transform(const std::vector<double>& times,
                                                    double m) {
  double horizon = 1.0 / m;
  std::vector<double> u;
  u.reserve(times.size());
  double prev = 0.0;
  for (double t : times) {
    if (t <= prev || t >= horizon)
      throw std::invalid_argument("jump times must increase inside [0, 1/m)");
    u.push_back((t - prev) / (horizon - prev));
    prev = t;
  }
  return u;
}

// E(G | left-edge jump at t) = (t/(1-mt)^2 + 1/(2m(1-mt))) * integral l^2 nu(dl).
// Derived from E(G) = ((1-mt)/m) int dl nubar(l) E[(tau_l)^2]/l with
// E[tau_l] = l/(1-mt) and Var[tau_l] = l t int z^2 nu / (1-mt)^3. Consistent
// with the unit-length jump density below (mean 3 at t = 1/2, checked by
// quadrature) and with the t -> 0 limit E[l^2]/(2m) from size-biased
// uniform placement over the covering file.
inline double mean_g_jump_given_time(const ModelParams& p) {
  double m = mean_size(p.nu);
  double mt = m * p.t;
  if (!(mt < 1.0)) throw std::invalid_argument("saturated regime");
  return (p.t / ((1.0 - mt) * (1.0 - mt)) + 1.0 / (2.0 * m * (1.0 - mt))) *
         second_moment(p.nu);
}

// Conditional density of the left-edge jump size at time t, unit lengths:
// f(x) = (1 - t) e^{-t x} (t x)^{[x]} / [x]!  with [x] the integer part.
inline double g_left_jump_density_dirac(double t, double x) {
  if (x < 0.0) return 0.0;
  long k = static_cast<long>(std::floor(x));
  if (t == 0.0) return k == 0 ? 1.0 : 0.0;
  if (x == 0.0) return 1.0 - t;
  return (1.0 - t) * std::exp(k * std::log(t * x) - t * x - log_gamma(k + 1.0));
}

namespace detail {

// P(Y_x > 0) for the spatial path at load t: the compound-Poisson mass
// arriving on a stretch of length x exceeds x.
inline double prob_path_positive(const ModelParams& p, double x) {
  if (x <= 0.0) return 0.0;
  double tx = p.t * x;
  if (tx == 0.0) return 0.0;
  if (const auto* d = std::get_if<Dirac>(&p.nu)) {
    long k = static_cast<long>(std::floor(x / d->at));
    return 1.0 - poisson_cdf(k, tx);
  }
  if (const auto* e = std::get_if<Exponential>(&p.nu)) {
    // sum over arrival counts; Gamma(k, 1/rate) tails
    double acc = 0.0;
    long kmax = static_cast<long>(tx + 12.0 * std::sqrt(tx) + 30.0);
    for (long k = 1; k <= kmax; ++k)
      acc += poisson_pmf(k, tx) * gamma_q(static_cast<double>(k), e->rate * x);
    return acc;
  }
  if (const auto* g = std::get_if<Gamma>(&p.nu)) {
    double acc = 0.0;
    long kmax = static_cast<long>(tx + 12.0 * std::sqrt(tx) + 30.0);
    for (long k = 1; k <= kmax; ++k)
      acc += poisson_pmf(k, tx) * gamma_q(k * g->shape, x / g->scale);
    return acc;
  }
  throw UnsupportedMeasure("exceedance probability needs dirac, exp or gamma lengths");
}

}  // namespace detail

// E(e^{lambda g(t)}) = exp( integral_0^inf (e^{-lambda x} - 1) x^{-1} P(Y_x > 0) dx ).
// The integrand has kinks at lattice points for atomic measures, so the
// integral is assembled unit segment by unit segment.
inline double g_laplace(const ModelParams& p, double lambda) {
  validate_params(p);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (lambda == 0.0) return 1.0;
  auto f = [&](double x) {
    if (x <= 0.0) return 0.0;
    return (std::exp(-lambda * x) - 1.0) / x * detail::prob_path_positive(p, x);
  };
  double acc = 0.0;
  const int max_segments = 2000;
  int n = 0;
  for (; n < max_segments; ++n) {
    double seg = integrate(f, n, n + 1.0, 1e-12);
    acc += seg;
    if (n > 2 && std::fabs(seg) < 1e-13 * (std::fabs(acc) + 1e-30)) break;
  }
  if (n == max_segments) throw QuadratureFailure("exponent integral did not settle");
  return std::exp(acc);
}

// P(l = n | right edge at d), unit lengths: the ladder mass restricted to
// n >= ceil(d) and renormalized. Returned for n = 0, ..., nmax (zeros below
// the support floor).
inline std::vector<double> length_given_right_extremity(const ModelParams& p,
                                                        double d, long nmax) {
  validate_params(p);
  const auto* unit = std::get_if<Dirac>(&p.nu);
  if (!unit || unit->at != 1.0)
    throw UnsupportedMeasure("conditional length law is implemented for unit file lengths");
  if (!(d >= 0.0)) throw std::invalid_argument("right edge must be nonnegative");
  long nmin = std::max(1L, static_cast<long>(std::ceil(d)));
  double denom = 0.0;
  for (long n = nmin;; ++n) {
    double term = pi_dirac_mass(p.t, n);
    denom += term;
    if (n > nmin + 10 && term < 1e-16 * denom) break;
    if (n > 100000) throw NoConvergence("ladder tail sum did not converge");
  }
  std::vector<double> pmf(nmax + 1, 0.0);
  for (long n = nmin; n <= nmax; ++n) pmf[n] = pi_dirac_mass(p.t, n) / denom;
  return pmf;
}

// Jump rate of the block length from l to l + n, unit file lengths:
// ((n + l) / n) e^{-t n} (t n)^{n-1} / (n-1)!.
inline double length_jump_rate_dirac(double t, double l, long n) {
  if (n < 1) return 0.0;
  if (t == 0.0) return n == 1 ? (1.0 + l) : 0.0;
  double tn = t * n;
  return ((n + l) / n) * std::exp((n - 1) * std::log(tn) - tn - log_gamma(n));
}

// First-passage identity for the unit-rate, unit-jump subordinator:
// P(S_t > x) = integral_0^t ds sum_b P(S_s = b) 1{x - b < 1}. Left side
// in closed form, right side by quadrature; returns the difference.
inline double first_passage_identity_residual(double t, double x) {
  if (!(t >= 0.0) || !(x >= 0.0)) throw std::invalid_argument("need t >= 0, x >= 0");
  long fx = static_cast<long>(std::floor(x));
  double lhs = 1.0 - poisson_cdf(fx, t);
  auto inner = [&](double s) {
    double sum = 0.0;
    for (long b = 0; b <= fx; ++b)
      if (x - b < 1.0) sum += poisson_pmf(b, s);
    return sum;
  };
  double rhs = integrate(inner, 0.0, t, 1e-12);
  return std::fabs(lhs - rhs);
}

struct RhoMassResiduals {
  double g_marginal = 0.0;
  double r_marginal = 0.0;
};

// The jump-triple intensity must put total mass m/(1-mt) on each of its
// marginals; for unit lengths both marginals integrate in closed form to
// 1, so the scaled quadrature checks the full normalization 1/(1-t).
inline RhoMassResiduals rho_marginal_consistency_dirac(double t) {
  if (!(t >= 0.0 && t < 1.0)) throw std::invalid_argument("need 0 <= t < 1");
  double rate = 1.0 / (1.0 - t);  // jump_time_intensity for unit lengths
  auto g_density = [t](double x) { return g_left_jump_density_dirac(t, x); };
  double gmass = 0.0;
  for (int n = 0; n < 2000; ++n) {
    double seg = integrate(g_density, n, n + 1.0, 1e-12);
    gmass += seg;
    if (n > 2 && seg < 1e-14 * gmass) break;
  }
  SizeMeasure unit = Dirac{1.0};
  double rmass = integrate([&](double z) { return remaining_density(unit, z); },
                           0.0, 1.0, 1e-12);
  RhoMassResiduals r;
  r.g_marginal = std::fabs(rate * gmass - 1.0 / (1.0 - t));
  r.r_marginal = std::fabs(rate * rmass - 1.0 / (1.0 - t));
  return r;
}

// Block endpoints relative to length: g = -U l with U uniform on (0,1),
// independent of l. Extracts the U values from (g, l) samples.
inline std::vector<double> uniform_split_values(
    const std::vector<std::pair<double, double>>& g_and_l) {
  std::vector<double> u;
  u.reserve(g_and_l.size());
  for (const auto& [g, l] : g_and_l) {
    if (l > 0.0) u.push_back(-g / l);
  }
  return u;
}

}  // namespace parkline
