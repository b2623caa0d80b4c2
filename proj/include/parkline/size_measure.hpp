#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "parkline/numeric.hpp"
#include "parkline/rng.hpp"

namespace parkline {

struct InfiniteMoment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File-length measure nu on (0, inf]. Weights are measure masses, not
// probabilities; the arrival intensity per unit length of line and unit
// of time is total_mass(nu).
struct Dirac {
  double at = 1.0;
};
struct Exponential {
  double rate = 1.0;
};
struct Gamma {
  double shape = 1.0;
  double scale = 1.0;
};
struct FiniteDiscrete {
  std::vector<std::pair<double, double>> atoms;  // (size, weight), weight > 0
};

using SizeMeasure = std::variant<Dirac, Exponential, Gamma, FiniteDiscrete>;

inline void validate(const SizeMeasure& nu) {
  auto bad = [](const char* msg) { throw std::invalid_argument(msg); };
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Dirac>) {
          if (!(m.at > 0.0) || !std::isfinite(m.at)) bad("dirac: size must be positive");
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (!(m.rate > 0.0) || !std::isfinite(m.rate)) bad("exp: rate must be positive");
        } else if constexpr (std::is_same_v<T, Gamma>) {
          if (!(m.shape > 0.0) || !std::isfinite(m.shape)) bad("gamma: shape must be positive");
          if (!(m.scale > 0.0) || !std::isfinite(m.scale)) bad("gamma: scale must be positive");
        } else {
          if (m.atoms.empty()) bad("discrete: needs at least one atom");
          for (const auto& [s, w] : m.atoms) {
            if (!(s > 0.0) || !std::isfinite(s)) bad("discrete: sizes must be positive");
            if (!(w > 0.0) || !std::isfinite(w)) bad("discrete: weights must be positive");
          }
        }
      },
      nu);
}

// nu((0, inf]); finite by construction for every representable measure.
inline double total_mass(const SizeMeasure& nu) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Dirac>) return 1.0;
        if constexpr (std::is_same_v<T, Exponential>) return 1.0;
        if constexpr (std::is_same_v<T, Gamma>) return 1.0;
        if constexpr (std::is_same_v<T, FiniteDiscrete>) {
          double w = 0.0;
          for (const auto& a : m.atoms) w += a.second;
          return w;
        }
      },
      nu);
}

// nu((x, inf]): strictly-greater tail, so tail(a) = 0 for Dirac at a.
inline double tail(const SizeMeasure& nu, double x) {
  if (x < 0.0) x = 0.0;
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Dirac>) return x < m.at ? 1.0 : 0.0;
        if constexpr (std::is_same_v<T, Exponential>) return std::exp(-m.rate * x);
        if constexpr (std::is_same_v<T, Gamma>)
          return x == 0.0 ? 1.0 : gamma_q(m.shape, x / m.scale);
        if constexpr (std::is_same_v<T, FiniteDiscrete>) {
          double w = 0.0;
          for (const auto& [s, wt] : m.atoms)
            if (s > x) w += wt;
          return w;
        }
      },
      nu);
}

// integral of l nu(dl)
inline double mean_size(const SizeMeasure& nu) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Dirac>) return m.at;
        if constexpr (std::is_same_v<T, Exponential>) return 1.0 / m.rate;
        if constexpr (std::is_same_v<T, Gamma>) return m.shape * m.scale;
        if constexpr (std::is_same_v<T, FiniteDiscrete>) {
          double s = 0.0;
          for (const auto& [sz, w] : m.atoms) s += sz * w;
          return s;
        }
      },
      nu);
}

// integral of l^2 nu(dl). Every representable measure has one; the error
// type is part of the contract should a heavier-tailed variant be added.
inline double second_moment(const SizeMeasure& nu) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Dirac>) return m.at * m.at;
        if constexpr (std::is_same_v<T, Exponential>) return 2.0 / (m.rate * m.rate);
        if constexpr (std::is_same_v<T, Gamma>)
          return m.shape * (m.shape + 1.0) * m.scale * m.scale;
        if constexpr (std::is_same_v<T, FiniteDiscrete>) {
          double s = 0.0;
          for (const auto& [sz, w] : m.atoms) s += sz * sz * w;
          return s;
        }
      },
      nu);
}

// Draw from the normalized law nu / total_mass(nu).
inline double sample_size(const SizeMeasure& nu, RandomSource& rng) {
  return std::visit(
      [&rng](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Dirac>) return m.at;
        if constexpr (std::is_same_v<T, Exponential>) return rng.exponential(m.rate);
        if constexpr (std::is_same_v<T, Gamma>) return rng.gamma(m.shape, m.scale);
        if constexpr (std::is_same_v<T, FiniteDiscrete>) {
          double w = 0.0;
          for (const auto& a : m.atoms) w += a.second;
          double u = rng.unit() * w;
          for (const auto& [sz, wt] : m.atoms) {
            u -= wt;
            if (u <= 0.0) return sz;
          }
          return m.atoms.back().first;
        }
      },
      nu);
}

namespace detail {
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // prefer the short form when it round-trips
  char buf2[32];
  std::snprintf(buf2, sizeof buf2, "%g", v);
  if (std::strtod(buf2, nullptr) == v) s = buf2;
  return s;
}

inline double parse_double(std::string_view s) {
  std::string tmp(s);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || tmp.empty())
    throw std::invalid_argument("size measure: bad number '" + tmp + "'");
  return v;
}
}  // namespace detail

// Text forms: "dirac:a", "exp:rate", "gamma:shape,scale",
// "discrete:s1=w1,s2=w2,...".
inline SizeMeasure parse_measure(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("size measure: expected 'kind:params'");
  std::string_view kind = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);

  SizeMeasure nu;
  if (kind == "dirac") {
    nu = Dirac{detail::parse_double(rest)};
  } else if (kind == "exp") {
    nu = Exponential{detail::parse_double(rest)};
  } else if (kind == "gamma") {
    auto comma = rest.find(',');
    if (comma == std::string_view::npos)
      throw std::invalid_argument("size measure: gamma needs shape,scale");
    nu = Gamma{detail::parse_double(rest.substr(0, comma)),
               detail::parse_double(rest.substr(comma + 1))};
  } else if (kind == "discrete") {
    FiniteDiscrete d;
    while (!rest.empty()) {
      auto comma = rest.find(',');
      std::string_view item = rest.substr(0, comma);
      auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw std::invalid_argument("size measure: discrete atoms are size=weight");
      d.atoms.emplace_back(detail::parse_double(item.substr(0, eq)),
                           detail::parse_double(item.substr(eq + 1)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    nu = std::move(d);
  } else {
    throw std::invalid_argument("size measure: unknown kind '" + std::string(kind) + "'");
  }
  validate(nu);
  return nu;
}

inline std::string format_measure(const SizeMeasure& nu) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        using detail::fmt_double;
        if constexpr (std::is_same_v<T, Dirac>) return "dirac:" + fmt_double(m.at);
        if constexpr (std::is_same_v<T, Exponential>) return "exp:" + fmt_double(m.rate);
        if constexpr (std::is_same_v<T, Gamma>)
          return "gamma:" + fmt_double(m.shape) + "," + fmt_double(m.scale);
        if constexpr (std::is_same_v<T, FiniteDiscrete>) {
          std::string s = "discrete:";
          for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            if (i) s += ',';
            s += fmt_double(m.atoms[i].first) + "=" + fmt_double(m.atoms[i].second);
          }
          return s;
        }
      },
      nu);
}

}  // namespace parkline
