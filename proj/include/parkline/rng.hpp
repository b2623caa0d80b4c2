#pragma once
#include <cstdint>
#include <random>

namespace parkline {

// splitmix64: used only to stretch (seed, index) pairs into full 64-bit
// engine seeds, so replica k of a run is reproducible in isolation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t k) {
  return splitmix64(splitmix64(master) ^ splitmix64(k + 0x51ed2701ab4d5e4full));
}

struct RandomSource {
  std::mt19937_64 gen;

  explicit RandomSource(std::uint64_t seed) : gen(seed) {}

  double unit() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen);
  }
  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(gen);
  }
  double exponential(double rate) {
    return std::exponential_distribution<double>(rate)(gen);
  }
  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(gen);
  }
  std::uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(gen);
  }
  std::size_t index(std::size_t n) {  // uniform on {0, ..., n-1}
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
  }
};

}  // namespace parkline
