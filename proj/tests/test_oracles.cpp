#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mckv/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mckv;
using mckv::test::kTwoPi;

namespace {

ErrorCode code_of(auto f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST_SUITE("oracles") {

TEST_CASE("budgets are enforced") {
  const TorusSpec big1 = build_grid(1, 8.0, 512);
  const TorusSpec big2 = build_grid(2, 8.0, 64);
  const Field f(big2.size(), 0.0);
  CHECK(code_of([&] { oracle::dft(big2, f); }) == ErrorCode::BudgetExceeded);
  CHECK(code_of([&] { oracle::two_point_K(fixtures::pure_well(), big1); }) == ErrorCode::BudgetExceeded);
  CHECK(code_of([&] { oracle::two_point_K(fixtures::pure_well(), big2); }) == ErrorCode::BudgetExceeded);
  CHECK(code_of([&] { oracle::simplex_K(fixtures::pure_well(), build_grid(1, 8.0, 32)); }) == ErrorCode::BudgetExceeded);
  const DensityField u = uniform(big2);
  CHECK(code_of([&] { oracle::energy(u, u, fixtures::pure_well(), oracle::Kernel::PointSampled); }) ==
        ErrorCode::BudgetExceeded);
}

TEST_CASE("spectrum closed forms") {
  CHECK(oracle::spectrum(fixtures::pure_well(), 1.0, 1) == doctest::Approx(-2.0 * std::sin(1.0)).epsilon(1e-12));
  CHECK(oracle::spectrum(fixtures::pure_well(), 0.0, 1) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(oracle::spectrum(fixtures::tent(), 2.0, 1) == doctest::Approx(2.0 * (1.0 - std::cos(2.0)) / 4.0).epsilon(1e-12));
  for (double k : {0.5, 1.0, 4.0}) {
    CHECK(oracle::spectrum(fixtures::pure_well(), k, 2) ==
          doctest::Approx(-kTwoPi * std::cyl_bessel_j(1.0, k) / k).epsilon(1e-10));
  }
}

TEST_CASE("uniform self-energy of the pure well") {
  const TorusSpec s = build_grid(1, kTwoPi, 32);
  const DensityField u = uniform(s);
  CHECK(oracle::energy(u, u, fixtures::pure_well(), oracle::Kernel::BandLimited) ==
        doctest::Approx(-2.0 / kTwoPi).epsilon(1e-10));
}

TEST_CASE("disjoint balls beyond the range do not interact") {
  const TorusSpec s = build_grid(1, 8.0, 64);
  const DensityField a = ball_density(s, 0.5, {2.0, 0.0});
  const DensityField b = ball_density(s, 0.5, {5.0, 0.0});
  CHECK(oracle::energy(a, b, fixtures::pure_well(), oracle::Kernel::PointSampled) == 0.0);
}

TEST_CASE("point-sampled energy is the direct double sum") {
  const TorusSpec s = build_grid(1, 4.0, 8);
  const DensityField a = fixtures::random_density(s, 1);
  const DensityField b = fixtures::random_density(s, 2);
  const Field v = sample_potential(s, fixtures::core_shell_1d());
  double ref = 0.0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) ref += v[std::size_t((i - j + 8) % 8)] * a[std::size_t(i)] * b[std::size_t(j)];
  }
  ref *= s.h() * s.h();
  CHECK(oracle::energy(a, b, fixtures::core_shell_1d(), oracle::Kernel::PointSampled) == doctest::Approx(ref));
}

TEST_CASE("two-point and simplex references") {
  const TorusSpec s = build_grid(1, 4.0, 16);
  CHECK(oracle::two_point_K(fixtures::pure_well(), s) <= -1.0 + 1e-12);
  CHECK(oracle::two_point_K(fixtures::tent(), s) >= 0.0);
  const oracle::SimplexMinimum pw = oracle::simplex_K(fixtures::pure_well(), s);
  CHECK(pw.value == doctest::Approx(-1.0));
  const oracle::SimplexMinimum tent = oracle::simplex_K(fixtures::tent(), s);
  // the uniform density gives v / L = 1/4, below any two-point mixture
  CHECK(tent.value <= 0.25 + 1e-12);
  CHECK(tent.value >= 0.0);
  for (const auto& p : {fixtures::pure_well(), fixtures::tent(), fixtures::core_shell_1d()}) {
    CHECK(oracle::simplex_K(p, s).value <= oracle::two_point_K(p, s) + 1e-12);
  }
}

}
