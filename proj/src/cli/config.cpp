#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include "mckv/cli.hpp"
#include "mckv/error.hpp"

namespace mckv::cli {

namespace {

struct Located {
  int line = 0;
  std::string key;
};

[[noreturn]] void fail(ErrorCode code, const Located& at, const std::string& msg) {
  std::ostringstream os;
  if (at.line > 0) os << "line " << at.line << ": ";
  os << at.key << ": " << msg;
  throw Error(code, os.str());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_real(const std::string& v, const Located& at) {
  double x = 0.0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e || !std::isfinite(x)) fail(ErrorCode::TypeMismatch, at, "expected a real number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& v, const Located& at) {
  long long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) fail(ErrorCode::TypeMismatch, at, "expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& v, const Located& at) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) fail(ErrorCode::TypeMismatch, at, "expected an unsigned integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const Located& at) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::TypeMismatch, at, "expected true or false, got '" + v + "'");
}

std::vector<double> to_reals(const std::string& v, const Located& at) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(to_real(item, at));
  return out;
}

std::vector<std::pair<double, double>> to_pairs(const std::string& v, const Located& at) {
  std::vector<std::pair<double, double>> out;
  for (const auto& item : split(v, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) fail(ErrorCode::TypeMismatch, at, "expected r:v pairs, got '" + item + "'");
    out.emplace_back(to_real(parts[0], at), to_real(parts[1], at));
  }
  return out;
}

struct Pending {
  std::optional<std::string> kind;
  std::optional<std::vector<std::pair<double, double>>> shells, table;
  std::optional<double> range;
  std::map<std::string, int> lines;
  std::optional<double> L, cap_check_dt;
  std::optional<long long> d, N;
  std::vector<std::string> track_modes;
};

using Setter = std::function<void(RunConfig&, Pending&, const std::string&, const Located&)>;

struct KeySpec {
  KeyDoc doc;
  Setter set;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = [] {
    std::vector<KeySpec> s;
    auto add = [&](std::string key, std::string type, std::string def, std::string help, Setter f) {
      s.push_back({{std::move(key), std::move(type), std::move(def), std::move(help)}, std::move(f)});
    };
    add("torus.d", "int", "1", "dimension, 1 or 2", [](RunConfig&, Pending& p, const std::string& v, const Located& at) {
      p.d = to_int(v, at);
    });
    add("torus.L", "real", "6.283185307179586", "side length", [](RunConfig&, Pending& p, const std::string& v, const Located& at) {
      p.L = to_real(v, at);
    });
    add("torus.N", "int", "64", "grid points per axis, even and >= 8",
        [](RunConfig&, Pending& p, const std::string& v, const Located& at) { p.N = to_int(v, at); });
    add("potential.kind", "shells|table", "shells", "radial profile representation",
        [](RunConfig&, Pending& p, const std::string& v, const Located& at) {
          if (v != "shells" && v != "table") fail(ErrorCode::TypeMismatch, at, "expected shells or table, got '" + v + "'");
          p.kind = v;
        });
    add("potential.shells", "list r:v", "", "piecewise-constant shells, outer radius:value",
        [](RunConfig&, Pending& p, const std::string& v, const Located& at) { p.shells = to_pairs(v, at); });
    add("potential.table", "list r:v", "", "piecewise-linear knots starting at r = 0",
        [](RunConfig&, Pending& p, const std::string& v, const Located& at) { p.table = to_pairs(v, at); });
    add("potential.range", "real", "outermost radius", "range a; V = 0 beyond it",
        [](RunConfig&, Pending& p, const std::string& v, const Located& at) { p.range = to_real(v, at); });
    add("model.theta", "real", "1", "coupling theta >= 0", [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
      c.theta = to_real(v, at);
      if (c.theta < 0.0) fail(ErrorCode::ConstraintViolation, at, "theta must be nonnegative");
    });
    add("solver.tol", "real", "1e-8", "Kirkwood-Monroe residual tolerance",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          c.solver.tol = to_real(v, at);
          if (!(c.solver.tol > 0.0)) fail(ErrorCode::ConstraintViolation, at, "tolerance must be positive");
        });
    add("solver.max_iter", "int", "5000", "Picard iteration cap", [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
      const long long n = to_int(v, at);
      if (n < 1) fail(ErrorCode::ConstraintViolation, at, "max_iter must be positive");
      c.solver.max_iter = int(n);
    });
    add("solver.seeds", "list", "uniform,planewave,threewave,ball,flow", "seed plan for the minimizer search",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          c.solver.seeds.clear();
          for (const auto& item : split(v, ',')) {
            try {
              c.solver.seeds.push_back(parse_seed_kind(item));
            } catch (const Error&) {
              fail(ErrorCode::TypeMismatch, at, "unknown seed '" + item + "'");
            }
          }
        });
    add("solver.flow_t_end", "real", "2", "gradient-flow horizon for the flow seed",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.solver.flow_t_end = to_real(v, at); });
    add("stability.tol_k", "real", "1e-8", "quadratic-form tolerance", [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
      c.stability.tol_K = to_real(v, at);
    });
    add("stability.points", "int", "64", "grid points per axis of the L = 4a torus",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          const long long n = to_int(v, at);
          if (n < 8 || n % 2) fail(ErrorCode::ConstraintViolation, at, "points must be even and >= 8");
          c.stability.condition_k_points = int(n);
        });
    add("stability.max_iter", "int", "20000", "Frank-Wolfe iteration cap",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.stability.condition_k_max_iter = int(to_int(v, at)); });
    add("dynamics.dt", "real", "1e-3", "time step (must not exceed the stability cap)",
        [](RunConfig& c, Pending& p, const std::string& v, const Located& at) {
          c.dynamics.dt = to_real(v, at);
          if (!(c.dynamics.dt > 0.0)) fail(ErrorCode::ConstraintViolation, at, "dt must be positive");
          p.cap_check_dt = c.dynamics.dt;
        });
    add("dynamics.t_end", "real", "1", "time horizon", [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
      c.dynamics.t_end = to_real(v, at);
      if (c.dynamics.t_end < 0.0) fail(ErrorCode::ConstraintViolation, at, "t_end must be nonnegative");
    });
    add("dynamics.steady_tol", "real", "1e-8", "steady-state threshold on ||drho||_inf / dt",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.dynamics.steady_tol = to_real(v, at); });
    add("dynamics.positivity_floor", "real", "1e-14", "smallest admissible density value",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          c.dynamics.positivity_floor = to_real(v, at);
          if (c.dynamics.positivity_floor < 0.0) fail(ErrorCode::ConstraintViolation, at, "floor must be nonnegative");
        });
    add("dynamics.max_floor_mass", "real", "1e-6", "cumulative floor mass that ends a run as under-resolved",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          c.dynamics.max_floor_mass = to_real(v, at);
          if (!(c.dynamics.max_floor_mass > 0.0)) fail(ErrorCode::ConstraintViolation, at, "max_floor_mass must be positive");
        });
    add("dynamics.record_every", "int", "10", "sampling stride in steps",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          const long long n = to_int(v, at);
          if (n < 1) fail(ErrorCode::ConstraintViolation, at, "record_every must be positive");
          c.dynamics.record_every = int(n);
        });
    add("dynamics.cap_factor", "real", "0.5", "safety factor of the time-step cap",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          c.dynamics.cap_factor = to_real(v, at);
          if (!(c.dynamics.cap_factor > 0.0)) fail(ErrorCode::ConstraintViolation, at, "cap_factor must be positive");
        });
    add("dynamics.dealias", "bool", "false", "2/3-rule on the transport term",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.dynamics.dealias = to_bool(v, at); });
    add("dynamics.init", "uniform|planewave|threewave|random|ball", "planewave", "initial density for simulate",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          if (v != "uniform" && v != "planewave" && v != "threewave" && v != "random" && v != "ball")
            fail(ErrorCode::TypeMismatch, at, "unknown initial density '" + v + "'");
          c.init = v;
        });
    add("dynamics.init_amplitude", "real", "0.01", "amplitude of the initial perturbation",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.init_amplitude = to_real(v, at); });
    add("dynamics.track_modes", "list m or m0:m1", "k_sharp", "modes recorded in trajectory.csv",
        [](RunConfig&, Pending& p, const std::string& v, const Located&) { p.track_modes = split(v, ','); });
    add("dynamics.mode_cutoff", "int", "4", "mode truncation for check-basin",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          const long long n = to_int(v, at);
          if (n < 1) fail(ErrorCode::ConstraintViolation, at, "mode_cutoff must be positive");
          c.mode_cutoff = int(n);
        });
    add("dynamics.basin_eps", "list real", "0,1e-4,1e-3", "perturbation sizes for check-basin",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.basin_eps = to_reals(v, at); });
    add("scan.thetas", "list real", "", "explicit increasing theta grid",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          c.thetas = to_reals(v, at);
          for (std::size_t i = 1; i < c.thetas.size(); ++i) {
            if (!(c.thetas[i] > c.thetas[i - 1])) fail(ErrorCode::ConstraintViolation, at, "theta grid must be increasing");
          }
        });
    add("scan.theta_min", "real", "0.1", "first grid point when scan.thetas is absent",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.theta_min = to_real(v, at); });
    add("scan.theta_max", "real", "2", "last grid point when scan.thetas is absent",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.theta_max = to_real(v, at); });
    add("scan.theta_points", "int", "20", "grid size when scan.thetas is absent",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          const long long n = to_int(v, at);
          if (n < 1) fail(ErrorCode::ConstraintViolation, at, "theta_points must be positive");
          c.theta_points = int(n);
        });
    add("scan.bracket_tol", "real", "1e-3", "transition bracket width", [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
      c.transition.bracket_tol = to_real(v, at);
      if (!(c.transition.bracket_tol > 0.0)) fail(ErrorCode::ConstraintViolation, at, "bracket_tol must be positive");
    });
    add("scan.relative_tol", "bool", "true", "bracket width relative to theta_sharp",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) { c.transition.relative_tol = to_bool(v, at); });
    add("scan.coarse_points", "int", "21", "coarse grid size before bisection",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          const long long n = to_int(v, at);
          if (n < 2) fail(ErrorCode::ConstraintViolation, at, "coarse_points must be at least 2");
          c.transition.coarse_points = int(n);
        });
    add("scan.ladder", "list real", "", "side lengths for scan-L", [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
      c.ladder = to_reals(v, at);
      for (double L : c.ladder) {
        if (!(L > 0.0)) fail(ErrorCode::ConstraintViolation, at, "ladder lengths must be positive");
      }
    });
    add("scan.h", "real", "torus.L / torus.N", "fixed grid spacing for scan-L",
        [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
          c.spacing = to_real(v, at);
          if (!(*c.spacing > 0.0)) fail(ErrorCode::ConstraintViolation, at, "h must be positive");
        });
    add("output.dir", "path", "out", "artifact directory", [](RunConfig& c, Pending&, const std::string& v, const Located&) {
      c.output_dir = v;
    });
    add("output.plot", "bool", "false", "write SVG plots", [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
      c.plot = to_bool(v, at);
    });
    add("random.seed", "u64", "0", "seed for randomized initial data", [](RunConfig& c, Pending&, const std::string& v, const Located& at) {
      c.seed = to_u64(v, at);
    });
    return s;
  }();
  return specs;
}

}  // namespace

std::vector<double> RunConfig::theta_grid() const {
  if (!thetas.empty()) return thetas;
  std::vector<double> g;
  for (int i = 0; i < theta_points; ++i) {
    g.push_back(theta_points == 1 ? theta_min : theta_min + (theta_max - theta_min) * i / (theta_points - 1));
  }
  return g;
}

const std::vector<KeyDoc>& config_keys() {
  static const std::vector<KeyDoc> docs = [] {
    std::vector<KeyDoc> d;
    for (const auto& s : key_specs()) d.push_back(s.doc);
    return d;
  }();
  return docs;
}

std::string help_text() {
  std::ostringstream os;
  os << "Configuration keys (section.key = value, '#' starts a comment):\n";
  for (const auto& k : config_keys()) {
    os << "  " << k.key << " <" << k.type << ">";
    if (!k.default_value.empty()) os << " [default " << k.default_value << "]";
    os << "\n      " << k.help << '\n';
  }
  return os.str();
}

RunConfig parse_config(const std::string& text) {
  static const std::regex line_re(R"(^\s*([A-Za-z_]+\.[A-Za-z_]+)\s*=\s*(.+?)\s*$)");
  RunConfig cfg;
  Pending p;
  std::stringstream ss(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    if (trim(raw).empty()) continue;
    std::smatch m;
    if (!std::regex_match(raw, m, line_re)) {
      fail(ErrorCode::TypeMismatch, {lineno, trim(raw)}, "expected 'section.key = value'");
    }
    const std::string key = m[1];
    const std::string value = m[2];
    const Located at{lineno, key};
    const auto& specs = key_specs();
    auto it = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.doc.key == key; });
    if (it == specs.end()) fail(ErrorCode::UnknownKey, at, "unknown configuration key");
    p.lines[key] = lineno;
    it->set(cfg, p, value, at);
  }
  auto where = [&](const std::string& key) { return Located{p.lines.count(key) ? p.lines[key] : 0, key}; };

  const long long d = p.d.value_or(1);
  const double L = p.L.value_or(2.0 * std::numbers::pi);
  const long long N = p.N.value_or(64);
  if (d != 1 && d != 2) fail(ErrorCode::ConstraintViolation, where("torus.d"), "d must be 1 or 2");
  if (!(L > 0.0)) fail(ErrorCode::ConstraintViolation, where("torus.L"), "L must be positive");
  if (N % 2 != 0) fail(ErrorCode::ConstraintViolation, where("torus.N"), "torus.N must be even");
  if (N < 8) fail(ErrorCode::ConstraintViolation, where("torus.N"), "torus.N must be at least 8");
  cfg.torus = build_grid(int(d), L, int(N));

  const std::string kind = p.kind.value_or(p.table && !p.shells ? "table" : "shells");
  try {
    if (kind == "shells") {
      if (!p.shells) fail(ErrorCode::ConstraintViolation, where("potential.shells"), "a shell list is required");
      std::vector<Shell> sh;
      for (auto [r, v] : *p.shells) sh.push_back({r, v});
      cfg.potential = PotentialSpec::shells(sh, p.range);
    } else {
      if (!p.table) fail(ErrorCode::ConstraintViolation, where("potential.table"), "a knot table is required");
      std::vector<RadialKnot> kn;
      for (auto [r, v] : *p.table) kn.push_back({r, v});
      cfg.potential = PotentialSpec::table(kn, p.range);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidPotential) throw;
    fail(ErrorCode::ConstraintViolation, where(kind == "shells" ? "potential.shells" : "potential.table"), e.what());
  }
  cfg.potential_set = true;
  if (!(cfg.potential.range() < L)) {
    fail(ErrorCode::ConstraintViolation, where(p.range ? "potential.range" : "torus.L"), "range must be < L");
  }

  for (const auto& item : p.track_modes) {
    const Located at = where("dynamics.track_modes");
    const auto parts = split(item, ':');
    if (parts.size() != std::size_t(d)) fail(ErrorCode::TypeMismatch, at, "mode '" + item + "' needs " + std::to_string(d) + " integers");
    std::array<int, 2> m{int(to_int(parts[0], at)), d == 2 ? int(to_int(parts[1], at)) : 0};
    if (std::abs(m[0]) >= N / 2 || std::abs(m[1]) >= N / 2) fail(ErrorCode::ConstraintViolation, at, "mode '" + item + "' is not below Nyquist");
    cfg.dynamics.track_modes.push_back(m);
  }
  if (p.cap_check_dt) {
    const PotentialAnalysis a = analyze(cfg.torus, cfg.potential);
    const double cap = dt_cap(a, cfg.theta, cfg.dynamics.cap_factor);
    if (*p.cap_check_dt > cap) {
      std::ostringstream os;
      os << "dt exceeds the stability cap " << cap << " at theta = " << cfg.theta;
      fail(ErrorCode::ConstraintViolation, where("dynamics.dt"), os.str());
    }
  }
  if (cfg.thetas.empty() && !(cfg.theta_max >= cfg.theta_min && cfg.theta_min >= 0.0)) {
    fail(ErrorCode::ConstraintViolation, where("scan.theta_max"), "need 0 <= theta_min <= theta_max");
  }
  return cfg;
}

}  // namespace mckv::cli
