#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mckv/cli.hpp"
#include "mckv/error.hpp"

namespace mckv::cli {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string short_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string mode_label(const WaveVector& k) {
  return k.d == 1 ? "(" + std::to_string(k.m[0]) + ")" : "(" + std::to_string(k.m[0]) + ", " + std::to_string(k.m[1]) + ")";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownKey:
    case ErrorCode::TypeMismatch:
    case ErrorCode::ConstraintViolation:
    case ErrorCode::OddResolution:
    case ErrorCode::NonPositiveLength:
    case ErrorCode::UnsupportedDimension:
    case ErrorCode::InvalidPotential:
    case ErrorCode::RangeExceedsTorus:
    case ErrorCode::AmplitudeTooLarge:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

/// Accumulates report.txt so that partial results survive a failure.
class Report {
 public:
  explicit Report(std::filesystem::path dir) : dir_(std::move(dir)) {}

  template <class T>
  void kv(const std::string& key, const T& value) {
    os_ << key << " = " << value << '\n';
  }
  void kv(const std::string& key, double value) { os_ << key << " = " << short_num(value) << '\n'; }
  void line(const std::string& s) { os_ << s << '\n'; }
  void flush() const { write_file(dir_ / "report.txt", os_.str()); }

 private:
  std::filesystem::path dir_;
  std::ostringstream os_;
};

struct Context {
  const RunConfig& cfg;
  Report& report;
  std::ostream& log;
  int exit_code = 0;

  std::filesystem::path out(const std::string& name) const { return cfg.output_dir / name; }
  void plot(const std::vector<Series>& s, const PlotOptions& o, const std::string& name) const {
    if (!cfg.plot) return;
    emit_plot(s, o, out(name));
    log << "wrote " << out(name).string() << '\n';
  }
  void csv(const std::string& name, const std::string& content) const {
    write_file(out(name), content);
    log << "wrote " << out(name).string() << '\n';
  }
};

void describe_setup(const RunConfig& cfg, Report& r) {
  r.kv("torus.d", cfg.torus.d);
  r.kv("torus.L", cfg.torus.L);
  r.kv("torus.N", cfg.torus.N);
  r.kv("potential", cfg.potential.describe());
}

WaveVector unstable_or_first(const PotentialAnalysis& a) {
  return a.has_negative_mode() ? a.k_sharp : make_wave_vector(a.spec, {1, 0});
}

std::string density_csv(const DensityField& rho) {
  const TorusSpec& s = rho.spec();
  std::ostringstream os;
  os << (s.d == 1 ? "x,rho\n" : "x0,x1,rho\n");
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const auto p = s.point(i);
    os << num(p[0]) << ',';
    if (s.d == 2) os << num(p[1]) << ',';
    os << num(rho[i]) << '\n';
  }
  return os.str();
}

Series density_slice(const DensityField& rho, const std::string& label) {
  const TorusSpec& s = rho.spec();
  Series out{label, {}, {}};
  if (s.d == 1) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      out.x.push_back(s.point(i)[0]);
      out.y.push_back(rho[i]);
    }
    return out;
  }
  std::size_t arg = 0;
  for (std::size_t i = 1; i < rho.size(); ++i) {
    if (rho[i] > rho[arg]) arg = i;
  }
  const std::size_t row = arg / std::size_t(s.N);
  for (int j = 0; j < s.N; ++j) {
    out.x.push_back(s.coordinate(j));
    out.y.push_back(rho[row * std::size_t(s.N) + std::size_t(j)]);
  }
  return out;
}

void analyze_potential(Context& c) {
  const PotentialAnalysis a = analyze(c.cfg.torus, c.cfg.potential);
  Report& r = c.report;
  r.kv("v", a.v);
  r.kv("v_max", a.v_max);
  r.kv("v0", a.v0);
  r.kv("k_sharp", mode_label(a.k_sharp));
  r.kv("k_sharp_norm", a.k_sharp.norm());
  r.kv("vhat_sharp", a.vhat_sharp);
  r.kv("theta_sharp", a.theta_sharp);
  r.kv("min_vhat", a.min_vhat_all);

  std::ostringstream os;
  os << "m0,m1,k,vhat\n";
  for (std::size_t i = 0; i < a.vhat.size(); ++i) {
    const WaveVector k = wave_vector(a.spec, i);
    os << k.m[0] << ',' << k.m[1] << ',' << num(k.norm()) << ',' << num(a.vhat[i]) << '\n';
  }
  c.csv("spectrum.csv", os.str());

  const StabilityClass cls = classify_stability(a, c.cfg.stability);
  r.kv("class", to_string(cls.kind));
  if (cls.kind == StabilityClass::Kind::ConditionKStable || cls.kind == StabilityClass::Kind::CatastrophicNumeric ||
      cls.kind == StabilityClass::Kind::Inconclusive)
    r.kv("condition_k_value", cls.value);
  if (!cls.detail.empty()) r.kv("class_detail", cls.detail);
  if (cls.kind == StabilityClass::Kind::CatastrophicTPZb) {
    if (auto rc = tpz_b_core_radius(c.cfg.potential, c.cfg.torus.d)) r.kv("tpz_b_radius", *rc);
  }

  Series s{"Vhat", {}, {}};
  for (int m = 0; m < a.spec.N / 2; ++m) {
    const WaveVector k = make_wave_vector(a.spec, {m, 0});
    s.x.push_back(k.norm());
    s.y.push_back(a.vhat[mode_index(a.spec, k.m)]);
  }
  c.plot({s}, {"Spectrum along the first axis", "|k|", "Vhat(k)", false, false}, "spectrum.svg");
}

DensityField initial_density(const RunConfig& cfg, const PotentialAnalysis& a) {
  const TorusSpec& spec = cfg.torus;
  const std::string& init = cfg.init;
  if (init == "uniform") return uniform(spec);
  if (init == "planewave") return plane_wave_trial(spec, unstable_or_first(a), cfg.init_amplitude);
  if (init == "threewave") return three_wave_trial(spec, a, cfg.init_amplitude, {0.0, 0.0, 0.0}).density;
  if (init == "ball") return catastrophic_density(spec, cfg.potential).density;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  if (!(std::abs(cfg.init_amplitude) < 1.0)) throw Error(ErrorCode::AmplitudeTooLarge, "random init needs amplitude < 1");
  Field v(spec.size());
  for (double& x : v) x = 1.0 + cfg.init_amplitude * u(rng);
  return DensityField::normalized(spec, std::move(v));
}

void simulate(Context& c) {
  const PotentialAnalysis a = analyze(c.cfg.torus, c.cfg.potential);
  DynamicsConfig dc = c.cfg.dynamics;
  if (dc.track_modes.empty()) dc.track_modes.push_back(unstable_or_first(a).m);
  dc.record_densities = false;
  const DensityField init = initial_density(c.cfg, a);
  Report& r = c.report;
  r.kv("theta", c.cfg.theta);
  r.kv("init", c.cfg.init);
  r.kv("dt_cap", dt_cap(a, c.cfg.theta, dc.cap_factor));
  const Trajectory traj = evolve(init, a, c.cfg.theta, dc);
  c.csv("trajectory.csv", trajectory_csv(traj));
  r.kv("status", to_string(traj.status));
  if (!traj.message.empty()) r.kv("message", traj.message);
  r.kv("dt", traj.dt);
  r.kv("min_dt", traj.min_dt);
  r.kv("steps", traj.steps);
  if (!traj.times.empty()) {
    r.kv("t_final", traj.times.back());
    r.kv("F_final", traj.F.back());
    r.kv("min_rho_final", traj.min_rho.back());
  }
  r.kv("floor_mass_total", traj.floor_mass_total);
  r.kv("max_mass_drift", traj.max_mass_drift);
  r.kv("max_relative_F_increase", traj.max_relative_F_increase);
  if (!traj.times.empty()) {
    c.plot({{"F", traj.times, traj.F}}, {"Free energy along the flow", "t", "F", false, false}, "trajectory.svg");
  }
  if (traj.status == Trajectory::Status::BlowUp) c.exit_code = 2;
}

void solve(Context& c) {
  const PotentialAnalysis a = analyze(c.cfg.torus, c.cfg.potential);
  const MinimizerSet set = minimize_free_energy(a, c.cfg.theta, c.cfg.solver);
  const StationaryPoint& best = set.best();
  c.csv("density.csv", density_csv(best.density));
  Report& r = c.report;
  r.kv("theta", c.cfg.theta);
  r.kv("theta_sharp", a.theta_sharp);
  r.kv("F_uniform", set.F_uniform);
  r.kv("F", best.breakdown.F);
  r.kv("S", best.breakdown.S);
  r.kv("E", best.breakdown.E);
  r.kv("classification", to_string(best.classification));
  r.kv("seed", best.seed_label);
  r.kv("status", to_string(best.status));
  r.kv("residual_sup", best.residual_sup);
  r.kv("dist_L1", best.distance_to_uniform);
  r.kv("improves_on_uniform", set.improves_on_uniform() ? "true" : "false");
  r.line("# stationary points: seed, status, F, residual");
  for (const auto& p : set.points) {
    r.line(p.seed_label + ", " + to_string(p.status) + ", " + short_num(p.breakdown.F) + ", " + short_num(p.residual_sup));
  }
  c.plot({density_slice(best.density, "incumbent")}, {"Incumbent density", "x", "rho", false, false}, "density.svg");
}

void scan_theta(Context& c) {
  const PotentialAnalysis a = analyze(c.cfg.torus, c.cfg.potential);
  const std::vector<double> grid = c.cfg.theta_grid();
  const ThetaScan scan = theta_scan(a, grid, c.cfg.solver);
  c.csv("theta_scan.csv", theta_scan_csv(scan));
  Report& r = c.report;
  r.kv("points", scan.points.size());
  r.kv("theta_sharp", a.theta_sharp);
  r.kv("S_nondecreasing", scan.S_monotone() ? "true" : "false");
  r.kv("F_shift_nonincreasing", scan.F_monotone() ? "true" : "false");
  r.kv("E_over_theta_nonincreasing", scan.E_over_theta_monotone() ? "true" : "false");
  r.kv("E_shift_nonincreasing", scan.E_shift_monotone() ? "true" : "false");
  r.kv("max_violation", std::max({scan.S_violation, scan.F_violation, scan.E_over_theta_violation, scan.E_shift_violation}));
  Series F{"F", {}, {}}, S{"S", {}, {}}, E{"E", {}, {}};
  for (const auto& p : scan.points) {
    F.x.push_back(p.theta);
    F.y.push_back(p.F);
    S.x.push_back(p.theta);
    S.y.push_back(p.S);
    E.x.push_back(p.theta);
    E.y.push_back(p.E);
  }
  c.plot({F, S, E}, {"Incumbent free energy across theta", "theta", "value", false, false}, "theta_scan.svg");
}

void locate(Context& c) {
  const PotentialAnalysis a = analyze(c.cfg.torus, c.cfg.potential);
  const TransitionReport t = locate_transition(a, c.cfg.solver, c.cfg.transition);
  c.csv("transition.csv", transition_csv(t));
  Report& r = c.report;
  r.kv("theta_sharp", t.theta_sharp);
  r.kv("theta_T_lo", t.theta_T_lo);
  r.kv("theta_T_hi", t.theta_T_hi);
  r.kv("ratio", t.ratio());
  r.kv("kind", to_string(t.kind));
  r.kv("jump_S", t.jump_S);
  r.kv("jump_E", t.jump_E);
  r.kv("dist_L1", t.dist_L1);
  r.kv("F_gap_mid", t.F_gap_mid);
  r.kv("samples", t.samples.size());
  Series s{"predicate", {}, {}};
  for (auto [theta, p] : t.samples) {
    s.x.push_back(theta);
    s.y.push_back(p ? 1.0 : 0.0);
  }
  if (t.rho_T) c.csv("density.csv", density_csv(*t.rho_T));
  c.plot({s}, {"Bisection samples", "theta", "nontrivial minimizer found", false, false}, "transition.svg");
  if (t.rho_T) c.plot({density_slice(*t.rho_T, "rho_T")}, {"Density above the transition", "x", "rho", false, false}, "density.svg");
}

void scan_L(Context& c) {
  if (c.cfg.ladder.empty()) throw Error(ErrorCode::ConstraintViolation, "scan.ladder: scan-L needs a ladder of side lengths");
  const double h = c.cfg.spacing.value_or(c.cfg.torus.h());
  for (double L : c.cfg.ladder) {
    if (!(c.cfg.potential.range() < L)) throw Error(ErrorCode::ConstraintViolation, "scan.ladder: range must be < L for L = " + short_num(L));
  }
  const ScalingStudy st = scaling_study(c.cfg.potential, c.cfg.torus.d, h, c.cfg.ladder, c.cfg.solver, c.cfg.transition);
  c.csv("scaling.csv", scaling_csv(st));
  Report& r = c.report;
  r.kv("h", h);
  r.kv("rows", st.rows.size());
  r.kv("limit", st.limit);
  r.kv("correction", st.correction);
  r.kv("slope", st.slope);
  r.kv("prefactor", st.prefactor);
  r.kv("regime", st.regime);
  bool failed = false;
  for (const auto& row : st.rows) {
    if (!row.ok) {
      failed = true;
      r.line("# L = " + short_num(row.L) + " failed: " + row.message);
    }
  }
  Series mid{"theta_T", {}, {}}, bound{"bound", {}, {}};
  for (const auto& row : st.rows) {
    if (!row.ok) continue;
    mid.x.push_back(row.L);
    mid.y.push_back(0.5 * (row.theta_T_lo + row.theta_T_hi));
    if (row.theta_bound) {
      bound.x.push_back(row.L);
      bound.y.push_back(*row.theta_bound);
    }
  }
  std::vector<Series> series{mid};
  if (!bound.x.empty()) series.push_back(bound);
  if (!mid.x.empty()) c.plot(series, {"Transition point against system size", "L", "theta_T", true, true}, "scaling.svg");
  if (failed) c.exit_code = 2;
}

void check_basin(Context& c) {
  const PotentialAnalysis a = analyze(c.cfg.torus, c.cfg.potential);
  if (!(c.cfg.theta < a.theta_sharp)) {
    throw Error(ErrorCode::ConstraintViolation, "model.theta: check-basin needs theta below theta_sharp = " + short_num(a.theta_sharp));
  }
  DynamicsConfig dc = c.cfg.dynamics;
  dc.record_densities = false;
  const BasinReport b = basin_experiment(a, c.cfg.theta, c.cfg.basin_eps, dc, c.cfg.mode_cutoff, c.cfg.seed);
  std::ostringstream os;
  os << "eps0,satisfies_bound,fitted_rate,decayed,status\n";
  for (const auto& e : b.entries) {
    os << num(e.eps0) << ',' << (e.satisfies_bound ? "true" : "false") << ',' << num(e.fitted_rate) << ','
       << (e.decayed ? "true" : "false") << ',' << to_string(e.status) << '\n';
  }
  c.csv("basin.csv", os.str());
  Report& r = c.report;
  r.kv("theta", b.theta);
  r.kv("lambda_min", b.lambda_min);
  r.kv("G", b.G);
  r.kv("eps_bound", b.eps_bound);
  r.kv("cutoff", b.cutoff);
  Series s{"fitted rate", {}, {}}, half{"lambda_min / 2", {}, {}};
  for (const auto& e : b.entries) {
    if (e.eps0 <= 0.0) continue;
    s.x.push_back(e.eps0);
    s.y.push_back(e.fitted_rate);
    half.x.push_back(e.eps0);
    half.y.push_back(0.5 * b.lambda_min);
  }
  if (!s.x.empty()) c.plot({s, half}, {"Decay rate against perturbation size", "eps0", "rate", true, false}, "basin.svg");
}

void gen_fixtures(Context& c) {
  const auto files = fixtures::generate_oracle_fixtures(c.cfg.output_dir);
  for (const auto& f : files) {
    c.log << "wrote " << f.string() << '\n';
    c.report.kv("fixture", f.filename().string());
  }
}

const std::map<Command, std::string>& names() {
  static const std::map<Command, std::string> m{{Command::AnalyzePotential, "analyze-potential"},
                                                {Command::Simulate, "simulate"},
                                                {Command::Solve, "solve"},
                                                {Command::ScanTheta, "scan-theta"},
                                                {Command::LocateTransition, "locate-transition"},
                                                {Command::ScanL, "scan-L"},
                                                {Command::CheckBasin, "check-basin"},
                                                {Command::GenFixtures, "gen-fixtures"}};
  return m;
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  for (const auto& [c, n] : names()) {
    if (n == name) return c;
  }
  return std::nullopt;
}

std::string to_string(Command c) { return names().at(c); }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> v = [] {
    std::vector<std::string> out;
    for (const auto& [c, n] : names()) out.push_back(n);
    return out;
  }();
  return v;
}

int run(Command command, const RunConfig& config, std::ostream& log) {
  try {
    std::filesystem::create_directories(config.output_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }
  Report report(config.output_dir);
  report.kv("command", to_string(command));
  if (command != Command::GenFixtures) describe_setup(config, report);
  Context ctx{config, report, log};
  try {
    switch (command) {
      case Command::AnalyzePotential: analyze_potential(ctx); break;
      case Command::Simulate: simulate(ctx); break;
      case Command::Solve: solve(ctx); break;
      case Command::ScanTheta: scan_theta(ctx); break;
      case Command::LocateTransition: locate(ctx); break;
      case Command::ScanL: scan_L(ctx); break;
      case Command::CheckBasin: check_basin(ctx); break;
      case Command::GenFixtures: gen_fixtures(ctx); break;
    }
  } catch (const Error& e) {
    ctx.exit_code = is_config_error(e.code()) ? 1 : 2;
    report.kv("error", e.what());
    log << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    ctx.exit_code = 2;
    report.kv("error", e.what());
    log << "error: " << e.what() << '\n';
  }
  report.kv("exit", ctx.exit_code);
  try {
    report.flush();
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }
  return ctx.exit_code;
}

}  // namespace mckv::cli
