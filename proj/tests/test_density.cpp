#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mckv/density.hpp"
#include "mckv/error.hpp"
#include "mckv/free_energy.hpp"
#include "mckv/potential.hpp"
#include "test_support.hpp"

using namespace mckv;

namespace {

ErrorCode code_of(auto f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

double angle_deg(const WaveVector& a, const WaveVector& b) {
  const double c = (a.k[0] * b.k[0] + a.k[1] * b.k[1]) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

}  // namespace

TEST_SUITE("density") {

TEST_CASE("densities must be nonnegative with unit mass") {
  const TorusSpec s = build_grid(1, 2.0, 8);
  CHECK_NOTHROW(DensityField(s, Field(8, 0.5)));
  CHECK(code_of([&] { DensityField(s, Field(8, 0.6)); }) == ErrorCode::InvalidDensity);
  Field neg(8, 0.5);
  neg[0] = -0.1;
  neg[1] = 1.1;
  CHECK(code_of([&] { DensityField(s, neg); }) == ErrorCode::InvalidDensity);
  CHECK(code_of([&] { DensityField(s, Field(7, 0.5)); }) == ErrorCode::ShapeMismatch);
  const DensityField r = DensityField::normalized(s, Field(8, 3.0));
  CHECK(r.mass() == doctest::Approx(1.0));
  CHECK(r.min() == doctest::Approx(0.5));
}

TEST_CASE("uniform density and perturbation") {
  const TorusSpec s = build_grid(2, 3.0, 8);
  const DensityField u = uniform(s);
  CHECK(u.max() == doctest::Approx(1.0 / 9.0));
  const Perturbation p = perturbation_of(u);
  for (double e : p.eta) CHECK(e == doctest::Approx(0.0));
  CHECK(p.h == doctest::Approx(0.0));
}

TEST_CASE("plane wave trial") {
  const TorusSpec s = build_grid(1, 5.0, 32);
  const WaveVector k = make_wave_vector(s, {2, 0});
  const DensityField r = plane_wave_trial(s, k, 0.3, 0.4);
  CHECK(r.mass() == doctest::Approx(1.0));
  const Perturbation p = perturbation_of(r);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(p.eta[i] == doctest::Approx(0.3 * std::cos(k.k[0] * s.coordinate(int(i)) + 0.4)).epsilon(1e-12).scale(1.0));
  }
  CHECK(code_of([&] { plane_wave_trial(s, k, 1.0); }) == ErrorCode::AmplitudeTooLarge);
  CHECK(code_of([&] { plane_wave_trial(s, k, -1.5); }) == ErrorCode::AmplitudeTooLarge);
}

TEST_CASE("closing triple around k_sharp") {
  const PotentialAnalysis a = analyze(build_grid(2, 8.0, 64), fixtures::core_shell_2d());
  const ClosingTriple t = find_closing_triple(a);
  CHECK(t.modes[0] == a.k_sharp);
  for (int c = 0; c < 2; ++c) CHECK(t.modes[0].m[c] + t.modes[1].m[c] + t.modes[2].m[c] == 0);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(angle_deg(t.modes[i], t.modes[j]) - 120.0) <= 15.0);
    CHECK(std::abs(t.modes[i].m[0]) < 32);
    CHECK(std::abs(t.modes[i].m[1]) < 32);
  }
  CHECK(t.max_angle_error_deg <= 15.0);
  CHECK(t.sigma < 0.05 * std::abs(a.vhat_sharp));

  const PotentialAnalysis a1 = analyze(build_grid(1, 8.0, 64), fixtures::core_shell_1d());
  CHECK(code_of([&] { find_closing_triple(a1); }) == ErrorCode::NoClosingTriple);
}

TEST_CASE("three wave trial") {
  const TorusSpec s = build_grid(2, 8.0, 64);
  const PotentialAnalysis a = analyze(s, fixtures::core_shell_2d());
  const ThreeWaveTrial t = three_wave_trial(s, a, 0.1, {0.1, 0.2, 0.3});
  CHECK(t.density.mass() == doctest::Approx(1.0));
  const Field prof = three_wave_profile(s, t.triple, {0.1, 0.2, 0.3});
  const Perturbation p = perturbation_of(t.density);
  for (std::size_t i = 0; i < s.size(); i += 97) CHECK(p.eta[i] == doctest::Approx(0.1 * prof[i]).scale(1.0));
  CHECK(code_of([&] { three_wave_trial(s, a, 0.34, {0.0, 0.0, 0.0}); }) == ErrorCode::AmplitudeTooLarge);
}

TEST_CASE("periodic extension tiles and preserves mass") {
  const TorusSpec s = build_grid(2, 2.0, 8);
  const DensityField r = fixtures::random_density(s, 4);
  const DensityField e = periodic_extension(r, 3);
  CHECK(e.spec().N == 24);
  CHECK(e.spec().L == doctest::Approx(6.0));
  CHECK(e.mass() == doctest::Approx(1.0));
  CHECK(e[0] * 9.0 == doctest::Approx(r[0]));
  CHECK(e[std::size_t(8) * 24 + 8] * 9.0 == doctest::Approx(r[0]));
  CHECK(code_of([&] { periodic_extension(r, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("ball density") {
  const TorusSpec s = build_grid(1, 8.0, 64);
  const DensityField b = ball_density(s, 1.0);
  CHECK(b.mass() == doctest::Approx(1.0));
  int support = 0;
  for (std::size_t i = 0; i < s.size(); ++i) support += b[i] > 0.0;
  CHECK(support == 17);
  CHECK(code_of([&] { ball_density(s, 4.0); }) == ErrorCode::BallExceedsTorus);
}

TEST_CASE("distances") {
  const TorusSpec s = build_grid(1, 4.0, 16);
  const DensityField a = fixtures::random_density(s, 1);
  const DensityField b = fixtures::random_density(s, 2);
  CHECK(distance(a, a, Norm::L1) == 0.0);
  CHECK(distance(a, b, Norm::L1) == doctest::Approx(distance(b, a, Norm::L1)));
  CHECK(distance(a, b, Norm::Linf) > 0.0);
  CHECK(distance(a, b, Norm::L1) <= 2.0);
  double l1 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) l1 += std::abs(a[i] - b[i]) * s.h();
  CHECK(distance(a, b, Norm::L1) == doctest::Approx(l1));
}

}
