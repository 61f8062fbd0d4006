#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "mckv/density.hpp"
#include "mckv/torus.hpp"

namespace mckv::test {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::filesystem::path fixture_dir() { return MCKV_FIXTURE_DIR; }

inline Field random_field(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Field f(n);
  for (double& x : f) x = u(rng);
  return f;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mckv_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace mckv::test
