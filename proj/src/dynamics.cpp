#include "mckv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "mckv/error.hpp"

namespace mckv {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

bool dealias_cut(const TorusSpec& spec, const WaveVector& w) {
  const int lim = spec.N / 3;
  return std::abs(w.m[0]) > lim || std::abs(w.m[1]) > lim;
}

}  // namespace

double dt_cap(const PotentialAnalysis& analysis, double theta, double cap_factor, double peak) {
  double vmax = 0.0;
  for (double v : analysis.vhat) vmax = std::max(vmax, std::abs(v));
  const double h = analysis.spec.h();
  return cap_factor * h * h / (1.0 + 0.25 * std::numbers::pi * std::numbers::pi * theta * vmax * std::max(1.0, peak));
}

double linear_rate(const PotentialAnalysis& analysis, const WaveVector& k, double theta) {
  const double vh = analysis.potential.transform(k.norm(), analysis.spec.d);
  return k.norm2() * (1.0 + theta * vh);
}

StepResult step(const DensityField& rho, const PotentialAnalysis& analysis, double theta, double dt,
                double positivity_floor, bool dealias) {
  const TorusSpec& spec = analysis.spec;
  if (!(rho.spec() == spec)) throw Error(ErrorCode::SpecMismatch, "density and analysis tori differ");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const std::size_t n = spec.size();
  const int d = spec.d;

  SpectralField rh = forward_transform(spec, rho.values());

  // Gradient of U = V * rho, one complex field per axis.
  std::array<ComplexField, 2> grad;
  for (int a = 0; a < d; ++a) grad[a].assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const WaveVector w = wave_vector(spec, i);
    if (is_nyquist(spec, w) || (dealias && dealias_cut(spec, w))) continue;
    const cplx u = analysis.vhat[i] * rh[i];
    for (int a = 0; a < d; ++a) grad[a][i] = I * w.k[a] * u;
  }
  SpectralField nonlin{spec, ComplexField(n, 0.0)};
  const double coupling = theta * spec.volume();
  for (int a = 0; a < d; ++a) {
    ComplexField g = inverse_transform_complex(SpectralField{spec, std::move(grad[a])});
    ComplexField flux(n);
    for (std::size_t i = 0; i < n; ++i) flux[i] = rho[i] * g[i].real();
    SpectralField fh = forward_transform_complex(spec, flux);
    for (std::size_t i = 0; i < n; ++i) {
      const WaveVector w = wave_vector(spec, i);
      if (is_nyquist(spec, w) || (dealias && dealias_cut(spec, w))) continue;
      nonlin[i] += coupling * I * w.k[a] * fh[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const WaveVector w = wave_vector(spec, i);
    rh[i] = (rh[i] + dt * nonlin[i]) / (1.0 + dt * w.norm2());
  }
  StepResult out;
  out.rho = inverse_transform(rh);

  const double blow = 1e6 / spec.volume();
  double added = 0.0;
  for (double& v : out.rho) {
    if (!std::isfinite(v) || v > blow) throw Error(ErrorCode::BlowUp, "density exceeded 1e6 rho0 or became non-finite");
    if (v < positivity_floor) {
      added += positivity_floor - v;
      v = positivity_floor;
    }
  }
  out.floor_mass = added * spec.cell_volume();
  out.mass_before = integrate(spec, out.rho);
  for (double& v : out.rho) v /= out.mass_before;
  out.mass_before -= out.floor_mass;
  return out;
}

std::string to_string(Trajectory::Status status) {
  switch (status) {
    case Trajectory::Status::Completed: return "Completed";
    case Trajectory::Status::SteadyState: return "SteadyState";
    case Trajectory::Status::BlowUp: return "BlowUp";
  }
  return "Unknown";
}

Trajectory evolve(const DensityField& init, const PotentialAnalysis& analysis, double theta, const DynamicsConfig& config) {
  const TorusSpec& spec = analysis.spec;
  if (!(config.dt > 0.0) || !(config.t_end >= 0.0) || config.record_every < 1)
    throw Error(ErrorCode::InvalidArgument, "dynamics config needs dt > 0, t_end >= 0, record_every >= 1");
  Trajectory traj;
  traj.tracked = config.track_modes;
  auto step_size = [&](const DensityField& r) {
    return std::min(config.dt, dt_cap(analysis, theta, config.cap_factor, r.max() * spec.volume()));
  };
  traj.dt = step_size(init);
  traj.min_dt = traj.dt;

  DensityField rho = init;
  double F_prev = free_energy(rho, analysis, theta).F;
  auto record = [&](double t, double F, double mass) {
    traj.times.push_back(t);
    traj.F.push_back(F);
    traj.mass.push_back(mass);
    traj.min_rho.push_back(rho.min());
    if (config.record_densities) traj.densities.push_back(rho.values());
    if (!traj.tracked.empty()) {
      const SpectralField rh = forward_transform(spec, rho.values());
      std::vector<cplx> row;
      for (const auto& m : traj.tracked) row.push_back(rh[mode_index(spec, m)]);
      traj.modes.push_back(std::move(row));
    }
  };
  record(0.0, F_prev, rho.mass());

  // t = steps * dt while the step is unchanged, so uniform runs land on t_end exactly
  double t = 0.0;
  double t_base = 0.0;
  long base_step = 0;
  double dt = traj.dt;
  for (long s = 1;; ++s) {
    const double want = step_size(rho);
    if (want != dt) {
      t_base = t;
      base_step = s - 1;
      dt = want;
    }
    const double remaining = config.t_end - t;
    if (remaining <= 1e-9 * dt) break;
    const bool last = remaining <= dt * (1.0 + 1e-9);
    const double h = last ? remaining : dt;
    traj.min_dt = std::min(traj.min_dt, h);
    StepResult r;
    try {
      r = step(rho, analysis, theta, h, config.positivity_floor, config.dealias);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BlowUp) throw;
      traj.status = Trajectory::Status::BlowUp;
      traj.message = e.what();
      break;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < r.rho.size(); ++i) change = std::max(change, std::abs(r.rho[i] - rho[i]));
    rho = DensityField(spec, std::move(r.rho));
    traj.steps = s;
    traj.floor_mass_total += r.floor_mass;
    if (traj.floor_mass_total > config.max_floor_mass) {
      std::ostringstream os;
      os << "positivity floor added mass " << traj.floor_mass_total << " by t = " << t + h
         << "; the grid does not resolve the density";
      traj.status = Trajectory::Status::BlowUp;
      traj.message = os.str();
      break;
    }
    traj.max_mass_drift = std::max(traj.max_mass_drift, std::abs(r.mass_before - 1.0));
    const double F = free_energy(rho, analysis, theta).F;
    traj.max_relative_F_increase = std::max(traj.max_relative_F_increase, (F - F_prev) / std::abs(F_prev));
    F_prev = F;
    t = last ? config.t_end : t_base + double(s - base_step) * dt;
    bool steady = false;
    if (config.stop_at_steady_state && change / h < config.steady_tol) {
      steady = km_residual(rho, analysis, theta).sup < config.steady_residual_tol;
    }
    if (s % config.record_every == 0 || last || steady) record(t, F, r.mass_before);
    if (steady) {
      traj.status = Trajectory::Status::SteadyState;
      break;
    }
    if (last) break;
  }
  traj.final_density = rho.values();
  return traj;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t,F,mass,min_rho";
  for (const auto& m : traj.tracked) {
    const std::string tag = std::to_string(m[0]) + "_" + std::to_string(m[1]);
    os << ",mode_" << tag << "_re,mode_" << tag << "_im";
  }
  os << '\n';
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    os << traj.times[r] << ',' << traj.F[r] << ',' << traj.mass[r] << ',' << traj.min_rho[r];
    for (std::size_t j = 0; j < traj.tracked.size(); ++j) os << ',' << traj.modes[r][j].real() << ',' << traj.modes[r][j].imag();
    os << '\n';
  }
  return os.str();
}

std::size_t ModeState::index(std::array<int, 2> m) const {
  const int w = 2 * cutoff + 1;
  if (d == 1) return std::size_t(m[0] + cutoff);
  return std::size_t(m[0] + cutoff) * w + std::size_t(m[1] + cutoff);
}

ModeState modes_of(const DensityField& rho, int cutoff) {
  const TorusSpec& spec = rho.spec();
  if (cutoff < 1 || cutoff >= spec.N / 2) throw Error(ErrorCode::InvalidArgument, "mode cutoff must lie in [1, N/2)");
  ModeState st;
  st.d = spec.d;
  st.cutoff = cutoff;
  const int w = 2 * cutoff + 1;
  st.c.assign(spec.d == 1 ? w : w * w, 0.0);
  const SpectralField rh = forward_transform(spec, rho.values());
  for (int a = -cutoff; a <= cutoff; ++a) {
    for (int b = (spec.d == 1 ? 0 : -cutoff); b <= (spec.d == 1 ? 0 : cutoff); ++b) {
      if (a == 0 && b == 0) continue;
      st.c[st.index({a, b})] = rh[mode_index(spec, {a, b})];
    }
  }
  return st;
}

ModeTrajectory mode_system_evolve(const ModeState& init, const PotentialAnalysis& analysis, double theta, double dt,
                                  double t_end, const std::vector<std::array<int, 2>>& tracked, int record_every) {
  const TorusSpec& spec = analysis.spec;
  if (init.d != spec.d) throw Error(ErrorCode::SpecMismatch, "mode state dimension differs from the torus");
  if (!(dt > 0.0) || record_every < 1) throw Error(ErrorCode::InvalidArgument, "mode system needs dt > 0");
  const int M = init.cutoff;
  const int d = spec.d;

  struct Mode {
    std::array<int, 2> m;
    std::array<double, 2> k;
    double lambda;
    double vhat;
  };
  std::vector<Mode> modes;
  for (int a = -M; a <= M; ++a) {
    for (int b = (d == 1 ? 0 : -M); b <= (d == 1 ? 0 : M); ++b) {
      const WaveVector w = make_wave_vector(spec, {a, b});
      const double vh = analysis.potential.transform(w.norm(), d);
      modes.push_back({{a, b}, w.k, w.norm2() * (1.0 + theta * vh), vh});
    }
  }
  auto inside = [&](int a, int b) { return std::abs(a) <= M && std::abs(b) <= M; };

  auto rhs = [&](const std::vector<cplx>& c) {
    std::vector<cplx> out(c.size(), 0.0);
    for (const Mode& q : modes) {
      const std::size_t iq = init.index(q.m);
      if (q.m[0] == 0 && q.m[1] == 0) continue;
      cplx acc = -q.lambda * c[iq];
      cplx quad = 0.0;
      for (const Mode& p : modes) {
        const int a = q.m[0] - p.m[0];
        const int b = q.m[1] - p.m[1];
        if (!inside(a, b) || (p.m[0] == 0 && p.m[1] == 0) || (a == 0 && b == 0)) continue;
        const double dot = q.k[0] * p.k[0] + q.k[1] * p.k[1];
        quad += dot * p.vhat * c[init.index(p.m)] * c[init.index({a, b})];
      }
      out[iq] = acc - theta * quad;
    }
    return out;
  };

  ModeTrajectory traj;
  traj.tracked = tracked;
  std::vector<cplx> c = init.c;
  auto record = [&](double t) {
    traj.times.push_back(t);
    std::vector<cplx> row;
    for (const auto& m : tracked) row.push_back(inside(m[0], m[1]) ? c[init.index(m)] : cplx{});
    traj.amplitudes.push_back(std::move(row));
  };
  record(0.0);
  const long total = long(std::ceil(t_end / dt - 1e-9));
  auto axpy = [](const std::vector<cplx>& x, double s, const std::vector<cplx>& y) {
    std::vector<cplx> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s * y[i];
    return out;
  };
  for (long s = 1; s <= total; ++s) {
    const auto k1 = rhs(c);
    const auto k2 = rhs(axpy(c, 0.5 * dt, k1));
    const auto k3 = rhs(axpy(c, 0.5 * dt, k2));
    const auto k4 = rhs(axpy(c, dt, k3));
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(c[i].real()) || !std::isfinite(c[i].imag()) || std::abs(c[i]) > 1e6)
        throw Error(ErrorCode::BlowUp, "mode system diverged at t = " + std::to_string(s * dt));
    }
    if (s % record_every == 0 || s == total) record(s * dt);
  }
  traj.final_state = init;
  traj.final_state.c = c;
  return traj;
}

double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2) throw Error(ErrorCode::InvalidArgument, "fit needs two or more samples");
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = double(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "log fit needs positive samples");
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  const double den = n * stt - st * st;
  if (den == 0.0) throw Error(ErrorCode::DegenerateDenominator, "fit abscissae coincide");
  return (n * sty - st * sy) / den;
}

BasinReport basin_experiment(const PotentialAnalysis& analysis, double theta, const std::vector<double>& eps_grid,
                             const DynamicsConfig& config, int cutoff, std::uint64_t seed,
                             const std::vector<std::array<int, 2>>& aligned_modes) {
  const TorusSpec& spec = analysis.spec;
  const int d = spec.d;
  if (cutoff < 1 || cutoff >= spec.N / 2) throw Error(ErrorCode::InvalidArgument, "mode cutoff must lie in [1, N/2)");
  BasinReport rep;
  rep.theta = theta;
  rep.cutoff = cutoff;
  rep.lambda_min = std::numeric_limits<double>::infinity();
  std::vector<std::array<int, 2>> lattice;
  for (int a = -cutoff; a <= cutoff; ++a) {
    for (int b = (d == 1 ? 0 : -cutoff); b <= (d == 1 ? 0 : cutoff); ++b) {
      if (a == 0 && b == 0) continue;
      lattice.push_back({a, b});
      const WaveVector w = make_wave_vector(spec, {a, b});
      rep.G += std::abs(analysis.potential.transform(w.norm(), d)) * w.norm();
    }
  }
  // lambda_min over every nonzero torus mode; the bound is checked on the truncation.
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const WaveVector w = wave_vector(spec, i);
    if (w.is_zero()) continue;
    rep.lambda_min = std::min(rep.lambda_min, w.norm2() * (1.0 + theta * analysis.vhat[i]));
  }
  rep.eps_bound = std::numeric_limits<double>::infinity();
  for (const auto& m : lattice) {
    const WaveVector w = make_wave_vector(spec, m);
    const double lam = linear_rate(analysis, w, theta);
    const double denom = 2.0 * w.norm() * theta * rep.G;
    rep.eps_bound = std::min(rep.eps_bound, denom > 0.0 ? lam / denom : std::numeric_limits<double>::infinity());
  }

  const auto& support = aligned_modes.empty() ? lattice : aligned_modes;
  const double rho0 = 1.0 / spec.volume();
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    const double eps0 = eps_grid[e];
    BasinEntry entry;
    entry.eps0 = eps0;
    entry.satisfies_bound = eps0 < rep.eps_bound;
    std::mt19937_64 rng(seed + e);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Hermitian coefficients: draw for one of each +-m pair.
    std::vector<std::pair<std::array<int, 2>, cplx>> coeff;
    double biggest = 0.0;
    for (const auto& m : support) {
      const bool canonical = m[0] > 0 || (m[0] == 0 && m[1] > 0);
      if (!canonical && !aligned_modes.empty()) {
        // aligned lists may name either sign; keep one representative
        const std::array<int, 2> neg{-m[0], -m[1]};
        if (std::find(support.begin(), support.end(), neg) != support.end()) continue;
      } else if (!canonical) {
        continue;
      }
      const double amp = aligned_modes.empty() ? unit(rng) : 1.0;
      const double ph = 2.0 * std::numbers::pi * unit(rng);
      coeff.push_back({m, std::polar(amp, ph)});
      biggest = std::max(biggest, amp);
    }
    Field v(spec.size(), rho0);
    if (eps0 > 0.0 && biggest > 0.0) {
      for (auto& [m, c] : coeff) c *= eps0 / biggest;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto x = spec.point(i);
        double eta = 0.0;
        for (const auto& [m, c] : coeff) {
          const WaveVector w = make_wave_vector(spec, m);
          eta += 2.0 * (c * std::exp(I * (w.k[0] * x[0] + w.k[1] * x[1]))).real();
        }
        v[i] = rho0 * (1.0 + eta);
      }
    }
    DensityField init = DensityField::normalized(spec, std::move(v));
    DynamicsConfig cfg = config;
    cfg.record_densities = true;
    cfg.stop_at_steady_state = false;
    const Trajectory traj = evolve(init, analysis, theta, cfg);
    entry.status = traj.status;
    std::vector<double> ts, dev;
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
      double m = 0.0;
      for (double x : traj.densities[r]) m = std::max(m, std::abs(x - rho0));
      // stop fitting once the deviation reaches round-off
      if (m < 1e-11 * rho0) break;
      ts.push_back(traj.times[r]);
      dev.push_back(m);
    }
    if (eps0 == 0.0) {
      entry.decayed = true;
      entry.fitted_rate = std::numeric_limits<double>::infinity();
    } else if (traj.status != Trajectory::Status::BlowUp && ts.size() >= 4) {
      // discard the initial transient in which fast modes die out
      const std::size_t skip = ts.size() / 4;
      std::vector<double> t2(ts.begin() + skip, ts.end()), d2(dev.begin() + skip, dev.end());
      entry.fitted_rate = -fit_log_slope(t2, d2);
      entry.decayed = entry.fitted_rate > 0.0 && dev.back() < dev.front();
    }
    rep.entries.push_back(entry);
  }
  return rep;
}

}  // namespace mckv
