#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mckv/error.hpp"
#include "mckv/solver.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mckv;
using mckv::test::kTwoPi;

TEST_SUITE("solver") {

TEST_CASE("km_iterate stays on the uniform fixed point") {
  const PotentialAnalysis a = analyze(build_grid(1, kTwoPi, 64), fixtures::pure_well());
  const StationaryPoint p = km_iterate(uniform(a.spec), a, 0.5, 1e-10, 100);
  CHECK(p.converged());
  CHECK(p.iterations <= 1);
  CHECK(p.classification == StationaryPoint::Classification::Uniform);
  CHECK(p.breakdown.F == doctest::Approx(uniform_free_energy(a, 0.5)));
}

TEST_CASE("km_iterate descends and its residual is reproducible") {
  const PotentialAnalysis a = analyze(build_grid(1, kTwoPi, 64), fixtures::pure_well());
  const DensityField init = fixtures::random_density(a.spec, 12);
  const double F_init = free_energy(init, a, 1.0).F;
  const StationaryPoint p = km_iterate(init, a, 1.0, 1e-10, 5000, "random");
  REQUIRE(p.converged());
  CHECK(p.seed_label == "random");
  CHECK(p.breakdown.F <= F_init);
  CHECK(p.max_F_increase <= 1e-12);
  const double again = km_residual(p.density, a, 1.0).sup;
  CHECK(again <= 2.0 * p.residual_sup + 1e-15);
  CHECK(p.residual_sup <= 2.0 * again + 1e-15);
  CHECK(p.best_F_seen <= p.breakdown.F + 1e-15);
}

TEST_CASE("seed kinds parse") {
  CHECK(parse_seed_kind("uniform") == SeedKind::Uniform);
  CHECK(parse_seed_kind("planewave") == SeedKind::PlaneWave);
  CHECK(parse_seed_kind("threewave") == SeedKind::ThreeWave);
  CHECK(parse_seed_kind("ball") == SeedKind::Ball);
  CHECK(parse_seed_kind("flow") == SeedKind::Flow);
  CHECK(to_string(SeedKind::Flow) == "flow");
  CHECK_THROWS_AS(parse_seed_kind("nucleus"), Error);
}

TEST_CASE("minimizer search on the pure well") {
  const PotentialAnalysis a = analyze(build_grid(1, kTwoPi, 64), fixtures::pure_well());
  SUBCASE("weak coupling keeps the uniform density") {
    const MinimizerSet m = minimize_free_energy(a, 0.3, {});
    CHECK(m.best().classification == StationaryPoint::Classification::Uniform);
    CHECK_FALSE(m.improves_on_uniform());
    CHECK(m.F_uniform == doctest::Approx(uniform_free_energy(a, 0.3)));
  }
  SUBCASE("strong coupling finds a lower nonuniform minimizer") {
    const MinimizerSet m = minimize_free_energy(a, 1.0, {});
    CHECK(m.best().classification == StationaryPoint::Classification::NonTrivial);
    CHECK(m.best().converged());
    CHECK(m.best().breakdown.F < m.F_uniform - 0.1);
    CHECK(m.improves_on_uniform());
    for (const auto& p : m.points) {
      if (p.converged()) CHECK(m.best().breakdown.F <= p.breakdown.F);
    }
  }
}

TEST_CASE("rescaling V and theta together leaves the incumbent unchanged") {
  const TorusSpec s = build_grid(1, kTwoPi, 64);
  const PotentialAnalysis a = analyze(s, fixtures::pure_well());
  const PotentialAnalysis b = analyze(s, fixtures::pure_well().scaled(2.5));
  SolverOptions o;
  o.tol = 1e-10;
  const MinimizerSet ma = minimize_free_energy(a, 0.9, o);
  const MinimizerSet mb = minimize_free_energy(b, 0.9 / 2.5, o);
  CHECK(ma.best().breakdown.F == doctest::Approx(mb.best().breakdown.F).epsilon(1e-8));
}

TEST_CASE("warm starts are used") {
  const PotentialAnalysis a = analyze(build_grid(1, kTwoPi, 64), fixtures::pure_well());
  const MinimizerSet first = minimize_free_energy(a, 1.0, {});
  SolverOptions only_uniform;
  only_uniform.seeds = {SeedKind::Uniform};
  const MinimizerSet warm = minimize_free_energy(a, 1.0, only_uniform, {first.best().density});
  CHECK(warm.best().breakdown.F == doctest::Approx(first.best().breakdown.F).epsilon(1e-9));
}

TEST_CASE("condition-K minimization") {
  SUBCASE("pure well reaches the ball value") {
    const ConditionKResult r = condition_k_minimize(build_grid(1, 4.0, 64), fixtures::pure_well(), 1e-10, 20000);
    CHECK(r.value <= -1.0 + 1e-6);
    CHECK(r.certificate.mass() == doctest::Approx(1.0));
  }
  SUBCASE("positive type stays nonnegative") {
    const ConditionKResult r = condition_k_minimize(build_grid(1, 4.0, 64), fixtures::tent(), 1e-10, 20000);
    CHECK(r.value >= -1e-8);
    CHECK(r.converged);
  }
  SUBCASE("two-dimensional core-shell is nonnegative") {
    const ConditionKResult r = condition_k_minimize(build_grid(2, 4.0, 32), fixtures::core_shell_2d(), 1e-8, 20000);
    CHECK(r.value >= 0.0);
  }
  SUBCASE("random budget instances agree with exhaustive references") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const TorusSpec s = build_grid(1, 4.0, 16);
    for (int t = 0; t < 12; ++t) {
      std::vector<Shell> sh;
      const int n = 1 + t % 3;
      for (int i = 0; i < n; ++i) sh.push_back({(i + 1.0) / n, u(rng)});
      const PotentialSpec p = PotentialSpec::shells(sh);
      const ConditionKResult r = condition_k_minimize(s, p, 1e-10, 20000);
      const oracle::SimplexMinimum exact = oracle::simplex_K(p, s);
      CHECK(r.value <= oracle::two_point_K(p, s) + 1e-4);
      CHECK(r.value == doctest::Approx(exact.value).epsilon(1e-4).scale(1.0));
    }
  }
  SUBCASE("range must fit") {
    CHECK_THROWS_AS(condition_k_minimize(build_grid(1, 1.0, 16), fixtures::pure_well(), 1e-8, 100), Error);
  }
}

}
