#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "mckv/error.hpp"
#include "oracles.hpp"

namespace mckv::fixtures {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

PotentialSpec pure_well() { return PotentialSpec::shells({{1.0, -1.0}}); }
PotentialSpec tent() { return PotentialSpec::table({{0.0, 1.0}, {1.0, 0.0}}); }
PotentialSpec core_shell_1d() { return PotentialSpec::shells({{0.5, 4.0}, {1.0, -1.0}}); }
PotentialSpec core_shell_2d() { return PotentialSpec::shells({{0.5, 20.0}, {1.0, -1.0}}); }

DensityField random_density(const TorusSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Field v(spec.size());
  for (double& x : v) x = u(rng);
  return DensityField::normalized(spec, std::move(v));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "fixture has no column '" + name + "'");
}

void write_table(const std::filesystem::path& path, const Table& table) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& p : table.provenance) os << "# " << p << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path.string());
  Table t;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.provenance.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header) {
      t.columns = std::move(cells);
      header = true;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

std::vector<std::filesystem::path> generate_oracle_fixtures(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const double two_pi = 2.0 * std::numbers::pi;

  struct Named {
    std::string name;
    PotentialSpec pot;
  };
  const std::vector<Named> pots{{"pure_well", pure_well()},
                                {"tent", tent()},
                                {"core_shell_1d", core_shell_1d()},
                                {"core_shell_2d", core_shell_2d()}};
  auto lookup = [&](const std::string& n) {
    for (const auto& p : pots) {
      if (p.name == n) return p.pot;
    }
    throw Error(ErrorCode::Internal, "unknown fixture potential " + n);
  };

  {
    Table t;
    t.provenance = {"generator: mckv gen-fixtures",
                    "oracle: adaptive Gauss-Kronrod quadrature of the radial transform between breakpoints",
                    "d = 2 uses a nested angular quadrature instead of a Bessel function"};
    t.columns = {"potential", "d", "L", "m0", "m1", "k", "vhat"};
    auto add = [&](const std::string& name, int d, double L, int m0, int m1) {
      const double k = two_pi / L * std::hypot(double(m0), double(m1));
      t.rows.push_back({name, std::to_string(d), num(L), std::to_string(m0), std::to_string(m1), num(k),
                        num(oracle::spectrum(lookup(name), k, d))});
    };
    for (int m = 0; m <= 8; ++m) add("pure_well", 1, two_pi, m, 0);
    for (int m = 0; m <= 8; ++m) add("tent", 1, two_pi, m, 0);
    for (int m = 0; m <= 12; ++m) add("core_shell_1d", 1, 8.0, m, 0);
    for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {3, 4}, {6, 0}, {9, 9}, {12, -3}, {-3, 12}, {10, 7}})
      add("core_shell_2d", 2, 8.0, a, b);
    written.push_back(dir / "spectrum.csv");
    write_table(written.back(), t);
  }
  {
    Table t;
    t.provenance = {"generator: mckv gen-fixtures",
                    "oracle: direct double sum h^{2d} sum_{x,y} K(x - y) a(x) b(y)",
                    "band_limited: K from the quadrature spectrum summed over the grid modes",
                    "point_sampled: K = V at the minimum-image distance",
                    "densities: fixtures::random_density(spec, seed)"};
    t.columns = {"potential", "d", "L", "N", "seed_a", "seed_b", "band_limited", "point_sampled"};
    struct Case {
      std::string pot;
      int d;
      double L;
      int N;
      std::uint64_t sa, sb;
    };
    const std::vector<Case> cases{{"pure_well", 1, two_pi, 16, 1, 2},   {"pure_well", 1, two_pi, 32, 3, 4},
                                  {"tent", 1, two_pi, 16, 5, 6},        {"core_shell_1d", 1, 8.0, 32, 7, 8},
                                  {"core_shell_2d", 2, 8.0, 16, 9, 10}, {"core_shell_2d", 2, 8.0, 32, 11, 12}};
    for (const auto& c : cases) {
      const TorusSpec spec = build_grid(c.d, c.L, c.N);
      const DensityField a = random_density(spec, c.sa);
      const DensityField b = random_density(spec, c.sb);
      const PotentialSpec pot = lookup(c.pot);
      t.rows.push_back({c.pot, std::to_string(c.d), num(c.L), std::to_string(c.N), std::to_string(c.sa),
                        std::to_string(c.sb), num(oracle::energy(a, b, pot, oracle::Kernel::BandLimited)),
                        num(oracle::energy(a, b, pot, oracle::Kernel::PointSampled))});
    }
    written.push_back(dir / "energy.csv");
    write_table(written.back(), t);
  }
  {
    Table t;
    t.provenance = {"generator: mckv gen-fixtures",
                    "oracle: exhaustive two-point-mass minimization over all cell pairs, weights j/100"};
    t.columns = {"potential", "d", "L", "N", "value"};
    for (const auto& name : {"pure_well", "tent", "core_shell_1d"}) {
      const TorusSpec spec = build_grid(1, 4.0, 16);
      t.rows.push_back({name, "1", "4", "16", num(oracle::two_point_K(lookup(name), spec))});
    }
    written.push_back(dir / "two_point.csv");
    write_table(written.back(), t);
  }
  return written;
}

}  // namespace mckv::fixtures
