#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "mckv/free_energy.hpp"
#include "mckv/potential.hpp"
#include "mckv/solver.hpp"
#include "test_support.hpp"

using namespace mckv;

namespace {

PotentialSpec lookup(const std::string& name) {
  if (name == "pure_well") return fixtures::pure_well();
  if (name == "tent") return fixtures::tent();
  if (name == "core_shell_1d") return fixtures::core_shell_1d();
  if (name == "core_shell_2d") return fixtures::core_shell_2d();
  FAIL("unknown fixture potential " << name);
  return fixtures::pure_well();
}

fixtures::Table load(const std::string& name) {
  const fixtures::Table t = fixtures::read_table(mckv::test::fixture_dir() / name);
  REQUIRE_FALSE(t.provenance.empty());
  return t;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("fixtures") {

TEST_CASE("spectrum matches stored quadrature values") {
  const fixtures::Table t = load("spectrum.csv");
  REQUIRE(t.rows.size() > 20);
  for (const auto& r : t.rows) {
    const int d = std::stoi(r[t.column("d")]);
    const double L = std::stod(r[t.column("L")]);
    const PotentialAnalysis a = analyze(build_grid(d, L, 64), lookup(r[t.column("potential")]));
    const std::array<int, 2> m{std::stoi(r[t.column("m0")]), std::stoi(r[t.column("m1")])};
    const double ref = std::stod(r[t.column("vhat")]);
    CAPTURE(r[t.column("potential")]);
    CAPTURE(m[0]);
    CAPTURE(m[1]);
    CHECK(a.vhat[mode_index(a.spec, m)] == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("interaction energy matches stored double sums") {
  const fixtures::Table t = load("energy.csv");
  for (const auto& r : t.rows) {
    const TorusSpec s = build_grid(std::stoi(r[t.column("d")]), std::stod(r[t.column("L")]), std::stoi(r[t.column("N")]));
    const PotentialAnalysis a = analyze(s, lookup(r[t.column("potential")]));
    const DensityField x = fixtures::random_density(s, std::stoull(r[t.column("seed_a")]));
    const DensityField y = fixtures::random_density(s, std::stoull(r[t.column("seed_b")]));
    CHECK(interaction_energy(x, y, a) == doctest::Approx(std::stod(r[t.column("band_limited")])).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("condition-K never exceeds the stored two-point values") {
  const fixtures::Table t = load("two_point.csv");
  for (const auto& r : t.rows) {
    const TorusSpec s = build_grid(std::stoi(r[t.column("d")]), std::stod(r[t.column("L")]), std::stoi(r[t.column("N")]));
    const ConditionKResult k = condition_k_minimize(s, lookup(r[t.column("potential")]), 1e-10, 20000);
    CHECK(k.value <= std::stod(r[t.column("value")]) + 1e-4);
  }
}

TEST_CASE("regenerated fixtures are byte-identical to the stored ones") {
  const auto dir = mckv::test::scratch_dir("fixtures");
  for (const auto& f : fixtures::generate_oracle_fixtures(dir)) {
    CAPTURE(f.filename().string());
    CHECK(slurp(f) == slurp(mckv::test::fixture_dir() / f.filename()));
  }
}

}
