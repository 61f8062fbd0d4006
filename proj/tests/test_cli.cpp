#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "mckv/cli.hpp"
#include "mckv/error.hpp"
#include "test_support.hpp"

using namespace mckv;
using namespace mckv::cli;

namespace {

const char* kPw = "torus.d = 1\ntorus.L = 6.283185307179586\ntorus.N = 64\npotential.shells = 1:-1\n";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Error config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e;
  }
  FAIL("config was accepted: " << text);
  return Error(ErrorCode::Internal, "unreachable");
}

std::vector<std::vector<double>> read_csv_numbers(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

RunConfig with_out(const std::string& text, const std::string& name) {
  RunConfig c = parse_config(text);
  c.output_dir = mckv::test::scratch_dir(name);
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal config fills defaults") {
  const RunConfig c = parse_config("torus.L = 8\npotential.shells = 0.5:4, 1:-1\n");
  CHECK(c.torus.d == 1);
  CHECK(c.torus.N == 64);
  CHECK(c.torus.L == 8.0);
  CHECK(c.potential_set);
  CHECK(c.potential.shell_list().size() == 2);
  CHECK(c.solver.tol == 1e-8);
  CHECK(c.solver.max_iter == 5000);
  CHECK(c.solver.seeds.size() == 5);
  CHECK(c.dynamics.dt == 1e-3);
  CHECK(c.output_dir == "out");
}

TEST_CASE("comments, blank lines and lists") {
  const RunConfig c = parse_config(
      "# header\n\ntorus.d = 2   # trailing\ntorus.L = 8\ntorus.N = 32\npotential.shells = 0.5:20,1:-1\n"
      "solver.seeds = uniform, ball\nscan.thetas = 0.1, 0.2,0.3\ndynamics.track_modes = 1:0, 0:2\n");
  CHECK(c.torus.d == 2);
  CHECK(c.solver.seeds == std::vector<SeedKind>{SeedKind::Uniform, SeedKind::Ball});
  CHECK(c.theta_grid() == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(c.dynamics.track_modes.size() == 2);
  CHECK(c.dynamics.track_modes[1] == std::array<int, 2>{0, 2});
}

TEST_CASE("table potentials") {
  const RunConfig c = parse_config("torus.L = 8\npotential.kind = table\npotential.table = 0:1, 1:0\n");
  CHECK(c.potential.kind() == PotentialSpec::Kind::Table);
  CHECK(c.potential.value(0.5) == doctest::Approx(0.5));
}

TEST_CASE("validation errors name the line and key") {
  SUBCASE("odd resolution") {
    const Error e = config_error("potential.shells = 1:-1\ntorus.N = 7\n");
    CHECK(e.code() == ErrorCode::ConstraintViolation);
    CHECK(std::string(e.what()).find("torus.N must be even") != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  SUBCASE("range beyond the torus") {
    const Error e = config_error("torus.L = 8\npotential.shells = 1:-1\npotential.range = 10\n");
    CHECK(e.code() == ErrorCode::ConstraintViolation);
    CHECK(std::string(e.what()).find("range must be < L") != std::string::npos);
    CHECK(std::string(e.what()).find("potential.range") != std::string::npos);
  }
  SUBCASE("unknown key") {
    const Error e = config_error("torus.L = 8\nsolver.tolerance = 1e-6\n");
    CHECK(e.code() == ErrorCode::UnknownKey);
    CHECK(std::string(e.what()).find("line 2: solver.tolerance") != std::string::npos);
  }
  SUBCASE("type mismatch") {
    const Error e = config_error("torus.L = eight\npotential.shells = 1:-1\n");
    CHECK(e.code() == ErrorCode::TypeMismatch);
    CHECK(std::string(e.what()).find("torus.L") != std::string::npos);
  }
  SUBCASE("malformed line") {
    CHECK(config_error("torus.L 8\n").code() == ErrorCode::TypeMismatch);
  }
  SUBCASE("time step above the cap") {
    const Error e = config_error(std::string(kPw) + "model.theta = 1\ndynamics.dt = 0.1\n");
    CHECK(e.code() == ErrorCode::ConstraintViolation);
    CHECK(std::string(e.what()).find("dynamics.dt") != std::string::npos);
  }
  SUBCASE("missing potential") {
    CHECK(config_error("torus.L = 8\n").code() == ErrorCode::ConstraintViolation);
  }
  SUBCASE("modes at or above Nyquist") {
    CHECK(config_error(std::string(kPw) + "dynamics.track_modes = 32\n").code() == ErrorCode::ConstraintViolation);
  }
}

TEST_CASE("help enumerates every accepted key") {
  const std::string help = help_text();
  REQUIRE(config_keys().size() >= 30);
  for (const auto& k : config_keys()) {
    CAPTURE(k.key);
    CHECK(help.find(k.key + " <") != std::string::npos);
    CHECK_FALSE(k.help.empty());
    // every documented key is accepted by the parser
    try {
      parse_config(std::string(kPw) + k.key + " = ?\n");
    } catch (const Error& e) {
      CHECK(e.code() != ErrorCode::UnknownKey);
    }
  }
}

TEST_CASE("svg plots") {
  SUBCASE("one series gives one polyline") {
    const std::string svg = render_plot({{"a", {0.0, 1.0}, {1.0, 2.0}}}, {"t", "x", "y", false, false});
    std::size_t count = 0;
    for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++count;
    CHECK(count == 1);
    CHECK(svg.find("<line") != std::string::npos);
    CHECK(svg.rfind("<svg", 0) == 0);
  }
  SUBCASE("empty input is an error") {
    try {
      render_plot({}, {});
      FAIL("expected EmptyPlot");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyPlot);
    }
  }
  SUBCASE("output is deterministic and log axes drop nonpositive points") {
    const std::vector<Series> s{{"a", {1.0, 10.0, 100.0}, {0.5, 0.05, 0.005}}, {"b", {1.0, 10.0}, {0.0, 1.0}}};
    const PlotOptions o{"log", "L", "theta", true, true};
    CHECK(render_plot(s, o) == render_plot(s, o));
    const auto dir = mckv::test::scratch_dir("plot");
    emit_plot(s, o, dir / "p.svg");
    CHECK(slurp(dir / "p.svg") == render_plot(s, o));
  }
}

TEST_CASE("command names") {
  for (const auto& n : command_names()) {
    REQUIRE(parse_command(n).has_value());
    CHECK(to_string(*parse_command(n)) == n);
  }
  CHECK_FALSE(parse_command("bogus").has_value());
}

TEST_CASE("analyze-potential reports the pure well") {
  const RunConfig c = with_out(kPw, "analyze");
  std::ostringstream log;
  REQUIRE(run(Command::AnalyzePotential, c, log) == 0);
  const std::string report = slurp(c.output_dir / "report.txt");
  CHECK(report.find("v = -2\n") != std::string::npos);
  CHECK(report.find("k_sharp = (-1)\n") != std::string::npos);
  CHECK(report.find("theta_sharp = 0.5941975529\n") != std::string::npos);
  CHECK(report.find("class = CatastrophicTPZa\n") != std::string::npos);
  CHECK(std::filesystem::exists(c.output_dir / "spectrum.csv"));
}

TEST_CASE("simulate at zero coupling follows discrete heat decay") {
  RunConfig c = with_out(std::string(kPw) + "model.theta = 0\ndynamics.t_end = 0.5\ndynamics.record_every = 25\n", "heat");
  c.init_amplitude = 0.3;
  std::ostringstream log;
  REQUIRE(run(Command::Simulate, c, log) == 0);
  const auto rows = read_csv_numbers(c.output_dir / "trajectory.csv");
  REQUIRE(rows.size() == 21);
  const TorusSpec s = c.torus;
  for (const auto& r : rows) {
    // rho = rho0 (1 + eps g^n cos x) with g = 1 / (1 + dt)
    const double amp = 0.3 * std::pow(1.0 + 1e-3, -std::round(r[0] / 1e-3));
    double S = 0.0;
    for (int i = 0; i < s.N; ++i) {
      const double rho = (1.0 + amp * std::cos(s.coordinate(i))) / s.L;
      S += rho * std::log(rho) * s.h();
    }
    CHECK(r[1] == doctest::Approx(S).epsilon(1e-12));
  }
}

TEST_CASE("every declared csv is produced with its declared header") {
  const std::string base = std::string(kPw) + "torus.N = 32\nscan.theta_min = 0.2\nscan.theta_max = 1.0\nscan.theta_points = 5\n";
  std::ostringstream log;
  {
    const RunConfig c = with_out(base, "iface_scan");
    REQUIRE(run(Command::ScanTheta, c, log) == 0);
    CHECK(slurp(c.output_dir / "theta_scan.csv").rfind("theta,F,S,E,class,dist_L1\n", 0) == 0);
  }
  {
    const RunConfig c = with_out(base, "iface_transition");
    REQUIRE(run(Command::LocateTransition, c, log) == 0);
    CHECK(slurp(c.output_dir / "transition.csv").rfind("theta_sharp,theta_T_lo,theta_T_hi,kind,jump_S,jump_E\n", 0) == 0);
  }
  {
    const RunConfig c = with_out(base + "scan.ladder = 6.283185307179586, 12.566370614359172\n", "iface_scaling");
    REQUIRE(run(Command::ScanL, c, log) == 0);
    CHECK(slurp(c.output_dir / "scaling.csv").rfind("L,N,theta_sharp,theta_T_lo,theta_T_hi,theta_bound\n", 0) == 0);
  }
  {
    const RunConfig c = with_out(base + "model.theta = 0.5\ndynamics.t_end = 0.05\ndynamics.track_modes = 1, 2\n", "iface_traj");
    REQUIRE(run(Command::Simulate, c, log) == 0);
    CHECK(slurp(c.output_dir / "trajectory.csv").rfind("t,F,mass,min_rho,mode_1_0_re,mode_1_0_im,mode_2_0_re,mode_2_0_im\n", 0) ==
          0);
  }
}

TEST_CASE("scan-L on the pure well ladder") {
  RunConfig c = with_out(std::string(kPw) +
                             "scan.ladder = 6.283185307179586, 12.566370614359172, 25.132741228718345, 50.26548245743669\n",
                         "scanL");
  c.plot = true;
  std::ostringstream log;
  REQUIRE(run(Command::ScanL, c, log) == 0);
  CHECK(read_csv_numbers(c.output_dir / "scaling.csv").size() == 4);
  CHECK(slurp(c.output_dir / "report.txt").find("regime = catastrophic\n") != std::string::npos);
  CHECK(std::filesystem::exists(c.output_dir / "scaling.svg"));
}

TEST_CASE("config errors found at run time exit with 1") {
  const RunConfig c = with_out(std::string(kPw) + "model.theta = 2\n", "basin_bad");
  std::ostringstream log;
  CHECK(run(Command::CheckBasin, c, log) == 1);
  CHECK(slurp(c.output_dir / "report.txt").find("exit = 1") != std::string::npos);
  const RunConfig d = with_out(kPw, "scanL_bad");
  CHECK(run(Command::ScanL, d, log) == 1);
}

TEST_CASE("command-line tool exit codes") {
  const auto dir = mckv::test::scratch_dir("tool");
  {
    std::ofstream(dir / "bad.cfg") << "torus.N = 7\npotential.shells = 1:-1\n";
    std::ofstream(dir / "good.cfg") << kPw;
  }
  const std::string tool = MCKV_TOOL;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status(tool + " analyze-potential --config " + (dir / "bad.cfg").string()) == 1);
  CHECK(status(tool + " analyze-potential --config " + (dir / "missing.cfg").string()) == 1);
  CHECK(status(tool + " frobnicate") == 1);
  CHECK(status(tool + " analyze-potential --config " + (dir / "good.cfg").string() + " --out " + (dir / "o").string() +
               " --plot --seed 3") == 0);
  CHECK(std::filesystem::exists(dir / "o" / "spectrum.svg"));
  CHECK(status(tool + " --help") == 0);
}

TEST_CASE("scan-theta output is deterministic") {
  const std::string text = std::string(kPw) + "torus.N = 32\nscan.theta_min = 0.4\nscan.theta_max = 0.9\nscan.theta_points = 6\n";
  std::ostringstream log;
  const RunConfig a = with_out(text, "det_a");
  const RunConfig b = with_out(text, "det_b");
  REQUIRE(run(Command::ScanTheta, a, log) == 0);
  REQUIRE(run(Command::ScanTheta, b, log) == 0);
  CHECK(slurp(a.output_dir / "theta_scan.csv") == slurp(b.output_dir / "theta_scan.csv"));
}

}
