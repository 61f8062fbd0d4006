#include <doctest.h>

#include "mckv/error.hpp"
#include "mckv/torus.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mckv;
using mckv::test::random_field;

TEST_SUITE("torus") {

TEST_CASE("build_grid validates its arguments") {
  CHECK_NOTHROW(build_grid(1, 1.0, 8));
  CHECK_NOTHROW(build_grid(2, 3.0, 16));
  auto code_of = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  CHECK(code_of([] { build_grid(1, 1.0, 7); }) == ErrorCode::OddResolution);
  CHECK(code_of([] { build_grid(1, 0.0, 8); }) == ErrorCode::NonPositiveLength);
  CHECK(code_of([] { build_grid(1, -2.0, 8); }) == ErrorCode::NonPositiveLength);
  CHECK(code_of([] { build_grid(3, 1.0, 8); }) == ErrorCode::UnsupportedDimension);
}

TEST_CASE("grid geometry") {
  const TorusSpec s = build_grid(2, 4.0, 8);
  CHECK(s.size() == 64);
  CHECK(s.h() == doctest::Approx(0.5));
  CHECK(s.volume() == doctest::Approx(16.0));
  CHECK(s.cell_volume() == doctest::Approx(0.25));
  const auto p = s.point(8 * 3 + 5);
  CHECK(p[0] == doctest::Approx(1.5));
  CHECK(p[1] == doctest::Approx(2.5));
}

TEST_CASE("mode indexing round trips and maps Nyquist to -N/2") {
  for (int d : {1, 2}) {
    const TorusSpec s = build_grid(d, 3.0, 8);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const WaveVector k = wave_vector(s, i);
      CHECK(mode_index(s, k.m) == i);
    }
  }
  const TorusSpec s = build_grid(1, 3.0, 8);
  const WaveVector ny = wave_vector(s, 4);
  CHECK(ny.m[0] == -4);
  CHECK(is_nyquist(s, ny));
  CHECK_FALSE(is_nyquist(s, wave_vector(s, 3)));
  CHECK(make_wave_vector(s, {1, 0}).norm() == doctest::Approx(mckv::test::kTwoPi / 3.0));
}

TEST_CASE("integrate is the periodic midpoint sum") {
  const TorusSpec s = build_grid(2, 2.5, 16);
  const Field one(s.size(), 1.0);
  CHECK(integrate(s, one) == doctest::Approx(6.25));
}

TEST_CASE("forward transform matches the direct sum") {
  for (int d : {1, 2}) {
    const TorusSpec s = build_grid(d, 5.0, d == 1 ? 32 : 16);
    const Field f = random_field(s.size(), 11 + d);
    const SpectralField fast = forward_transform(s, f);
    const ComplexField slow = oracle::dft(s, f);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      err = std::max(err, std::abs(fast[i] - slow[i]));
      scale = std::max(scale, std::abs(slow[i]));
    }
    CHECK(err <= 1e-12 * scale);
  }
}

TEST_CASE("inverse transform round trips and matches the direct sum") {
  const TorusSpec s = build_grid(2, 2.0, 8);
  const Field f = random_field(s.size(), 5);
  const SpectralField fh = forward_transform(s, f);
  const Field back = inverse_transform(fh);
  const ComplexField slow = oracle::inverse_dft(s, fh.coeffs);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-12));
    CHECK(slow[i].real() == doctest::Approx(f[i]).epsilon(1e-12));
  }
  CHECK(last_discarded_imaginary() < 1e-12);
}

TEST_CASE("Parseval identity") {
  const TorusSpec s = build_grid(1, 7.0, 64);
  const Field f = random_field(s.size(), 3);
  const SpectralField fh = forward_transform(s, f);
  double spec_sum = 0.0;
  for (const auto& c : fh.coeffs) spec_sum += std::norm(c);
  Field f2(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
  CHECK(spec_sum / s.volume() == doctest::Approx(integrate(s, f2)).epsilon(1e-12));
}

TEST_CASE("periodic convolution matches the direct sum") {
  for (int d : {1, 2}) {
    const TorusSpec s = build_grid(d, 3.0, 16);
    const Field f = random_field(s.size(), 21);
    const Field g = random_field(s.size(), 22);
    const Field fast = convolve_periodic(s, f, g);
    const Field slow = oracle::convolution(s, f, g);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-11));
    CHECK(last_discarded_imaginary() < 1e-12);
  }
}

TEST_CASE("size mismatches are rejected") {
  const TorusSpec s = build_grid(1, 1.0, 8);
  const Field f(7, 0.0);
  CHECK_THROWS_AS(forward_transform(s, f), Error);
}

}
