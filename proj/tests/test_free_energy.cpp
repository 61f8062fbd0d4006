#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mckv/error.hpp"
#include "mckv/free_energy.hpp"
#include "mckv/potential.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mckv;
using mckv::test::kTwoPi;

TEST_SUITE("free_energy") {

TEST_CASE("entropy of the uniform density") {
  for (int d : {1, 2}) {
    const TorusSpec s = build_grid(d, 3.0, 16);
    CHECK(entropy(uniform(s)) == doctest::Approx(-std::log(s.volume())).epsilon(1e-14));
  }
}

TEST_CASE("entropy treats zero cells as 0 log 0 = 0") {
  const TorusSpec s = build_grid(1, 2.0, 8);
  Field v(8, 0.0);
  v[0] = v[1] = 2.0;
  const DensityField r(s, v);
  CHECK(entropy(r) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("interaction energy of the uniform density is v / L^d") {
  const TorusSpec s = build_grid(1, kTwoPi, 64);
  const PotentialAnalysis a = analyze(s, fixtures::pure_well());
  const DensityField u = uniform(s);
  CHECK(interaction_energy(u, u, a) == doctest::Approx(-2.0 / kTwoPi).epsilon(1e-13));
  CHECK(uniform_free_energy(a, 0.7) == doctest::Approx(free_energy(u, a, 0.7).F).epsilon(1e-14));
  CHECK(uniform_free_energy(a, 0.7) == doctest::Approx(-std::log(kTwoPi) + 0.5 * 0.7 * -2.0));
}

TEST_CASE("interaction energy matches the band-limited double sum") {
  struct Case {
    PotentialSpec pot;
    int d;
    double L;
    int N;
  };
  for (const Case& c : {Case{fixtures::pure_well(), 1, kTwoPi, 32}, Case{fixtures::core_shell_1d(), 1, 8.0, 32},
                        Case{fixtures::core_shell_2d(), 2, 8.0, 16}}) {
    const TorusSpec s = build_grid(c.d, c.L, c.N);
    const PotentialAnalysis a = analyze(s, c.pot);
    const DensityField x = fixtures::random_density(s, 100 + c.N);
    const DensityField y = fixtures::random_density(s, 200 + c.N);
    const double ref = oracle::energy(x, y, c.pot, oracle::Kernel::BandLimited);
    CHECK(interaction_energy(x, y, a) == doctest::Approx(ref).epsilon(1e-9).scale(1.0));
    CHECK(interaction_energy(x, y, a) == doctest::Approx(interaction_energy(y, x, a)).epsilon(1e-13));
  }
}

TEST_CASE("interaction energy requires matching tori") {
  const PotentialAnalysis a = analyze(build_grid(1, 8.0, 32), fixtures::pure_well());
  const DensityField u = uniform(build_grid(1, 8.0, 16));
  CHECK_THROWS_AS(interaction_energy(u, u, a), Error);
}

TEST_CASE("free energy breakdown") {
  const TorusSpec s = build_grid(1, 8.0, 64);
  const PotentialAnalysis a = analyze(s, fixtures::core_shell_1d());
  const DensityField r = fixtures::random_density(s, 9);
  const FreeEnergyBreakdown b = free_energy(r, a, 1.3);
  CHECK(b.theta == 1.3);
  CHECK(b.S == doctest::Approx(entropy(r)));
  CHECK(b.E == doctest::Approx(interaction_energy(r, r, a)));
  CHECK(b.F == doctest::Approx(b.S + 0.5 * 1.3 * 8.0 * b.E));
}

TEST_CASE("the uniform density is a Kirkwood-Monroe fixed point") {
  for (const auto& pot : {fixtures::pure_well(), fixtures::tent(), fixtures::core_shell_1d()}) {
    const PotentialAnalysis a = analyze(build_grid(1, 8.0, 128), pot);
    for (double theta : {0.1, 1.0, 10.0}) CHECK(km_residual(uniform(a.spec), a, theta).sup < 1e-12);
  }
}

TEST_CASE("km_map returns a normalized density") {
  const TorusSpec s = build_grid(2, 8.0, 32);
  const PotentialAnalysis a = analyze(s, fixtures::core_shell_2d());
  const DensityField r = fixtures::random_density(s, 3);
  const Field xi = km_map(a, r.values(), 0.5);
  CHECK(integrate(s, xi) == doctest::Approx(1.0).epsilon(1e-12));
  for (double x : xi) CHECK(x > 0.0);
  const Field phi = potential_field(a, r.values());
  const double z = std::exp(-0.5 * 64.0 * phi[0]) / xi[0];
  CHECK(std::exp(-0.5 * 64.0 * phi[17]) / xi[17] == doctest::Approx(z).epsilon(1e-10));
}

TEST_CASE("expansion coefficients match finite differences of F") {
  const TorusSpec s = build_grid(1, kTwoPi, 64);
  const PotentialAnalysis a = analyze(s, fixtures::pure_well());
  const double theta = 0.4;
  const Field eta = [&] {
    Field e(s.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double x = s.coordinate(int(i));
      e[i] = std::cos(x) + 0.5 * std::sin(2.0 * x + 0.3) + 0.2 * std::cos(3.0 * x);
    }
    return e;
  }();
  const ExpansionCoefficients c = expansion_coefficients(eta, a, theta);
  auto F = [&](double eps) {
    Field v(s.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 + eps * eta[i]) / kTwoPi;
    return free_energy(DensityField(s, v), a, theta).F;
  };
  const double F0 = uniform_free_energy(a, theta);
  const double eps = 1e-3;
  const double c2_fd = (F(eps) + F(-eps) - 2.0 * F0) / (2.0 * eps * eps);
  const double c3_fd = (F(eps) - F(-eps)) / (2.0 * eps * eps * eps);
  CHECK(c.c2 == doctest::Approx(c2_fd).epsilon(1e-5));
  CHECK(c.c3 == doctest::Approx(c3_fd).epsilon(1e-3));
}

TEST_CASE("a single plane wave has no cubic term") {
  const TorusSpec s = build_grid(1, kTwoPi, 64);
  const PotentialAnalysis a = analyze(s, fixtures::pure_well());
  Field eta(s.size());
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = std::cos(2.0 * s.coordinate(int(i)) + 0.7);
  CHECK(std::abs(expansion_coefficients(eta, a, 1.0).c3) < 1e-12);
}

TEST_CASE("entropy excess bounds the squared L1 distance") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 25; ++t) {
    const TorusSpec s = build_grid(1 + t % 2, 3.0 + t, 16);
    const DensityField r = fixtures::random_density(s, rng());
    const double gap = entropy(r) - entropy(uniform(s));
    const double l1 = distance(r, uniform(s), Norm::L1);
    CHECK(gap >= 0.5 * l1 * l1);
  }
}

}
