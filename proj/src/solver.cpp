#include "mckv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

#include "mckv/error.hpp"
#include "mckv/scan.hpp"

namespace mckv {

std::string to_string(StationaryStatus status) {
  switch (status) {
    case StationaryStatus::Converged: return "Converged";
    case StationaryStatus::MaxIterExceeded: return "MaxIterExceeded";
    case StationaryStatus::OscillationDetected: return "OscillationDetected";
  }
  return "Unknown";
}

std::string to_string(StationaryPoint::Classification c) {
  return c == StationaryPoint::Classification::Uniform ? "Uniform" : "NonTrivial";
}

std::string to_string(SeedKind kind) {
  switch (kind) {
    case SeedKind::Uniform: return "uniform";
    case SeedKind::PlaneWave: return "planewave";
    case SeedKind::ThreeWave: return "threewave";
    case SeedKind::Ball: return "ball";
    case SeedKind::Flow: return "flow";
  }
  return "unknown";
}

SeedKind parse_seed_kind(const std::string& name) {
  for (SeedKind k : {SeedKind::Uniform, SeedKind::PlaneWave, SeedKind::ThreeWave, SeedKind::Ball, SeedKind::Flow}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown seed kind '" + name + "'");
}

namespace {

double abs_integral(const PotentialSpec& pot, int d) {
  const double a = pot.range();
  const int n = 20000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r0 = a * i / n;
    const double r1 = a * (i + 1) / n;
    const double shell = d == 1 ? 2.0 * (r1 - r0) : std::numbers::pi * (r1 * r1 - r0 * r0);
    acc += std::abs(pot.value(0.5 * (r0 + r1))) * shell;
  }
  return acc;
}

double positivity_bound(const DensityField& rho, const PotentialAnalysis& analysis, double theta) {
  const TorusSpec& spec = rho.spec();
  const double a = analysis.potential.range();
  Field ball(spec.size(), 0.0);
  auto image = [&](double x) { return x > 0.5 * spec.L ? x - spec.L : x; };
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const auto p = spec.point(i);
    const double x = image(p[0]);
    const double y = spec.d == 2 ? image(p[1]) : 0.0;
    ball[i] = x * x + y * y <= a * a ? 1.0 : 0.0;
  }
  const Field local = convolve_periodic(spec, ball, rho.values());
  const double Pa = *std::max_element(local.begin(), local.end());
  const double bound = theta * spec.volume() * (Pa * analysis.v0 + rho.max() * abs_integral(analysis.potential, spec.d));
  return std::exp(-bound);
}

}  // namespace

StationaryPoint km_iterate(const DensityField& init, const PotentialAnalysis& analysis, double theta, double tol,
                           int max_iter, std::string seed_label) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "solver tolerance must be positive");
  if (!(init.spec() == analysis.spec)) throw Error(ErrorCode::SpecMismatch, "seed and analysis tori differ");
  const TorusSpec& spec = analysis.spec;
  const std::size_t n = spec.size();

  Field rho = init.values();
  double F = free_energy(init, analysis, theta).F;
  double best_F = F;
  double alpha = 0.5;
  int good = 0;
  double residual = std::numeric_limits<double>::infinity();
  double best_residual = residual;
  int last_progress = 0;
  double max_increase = 0.0;
  std::deque<double> recent_F;
  StationaryStatus status = StationaryStatus::MaxIterExceeded;
  int it = 0;

  for (; it <= max_iter; ++it) {
    const Field xi = km_map(analysis, rho, theta);
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(rho[i] - xi[i]));
    if (residual < tol) {
      status = StationaryStatus::Converged;
      break;
    }
    if (it == max_iter) break;
    if (residual < 0.99 * best_residual) {
      best_residual = residual;
      last_progress = it;
    }
    recent_F.push_back(F);
    if (recent_F.size() > 500) recent_F.pop_front();
    if (it - last_progress > 500) {
      const auto [lo, hi] = std::minmax_element(recent_F.begin(), recent_F.end());
      if (*hi - *lo < 1e-12) {
        status = StationaryStatus::OscillationDetected;
        break;
      }
    }

    Field next(n);
    double F_next = 0.0;
    bool accepted = false;
    while (alpha > 1e-14) {
      for (std::size_t i = 0; i < n; ++i) next[i] = (1.0 - alpha) * rho[i] + alpha * xi[i];
      F_next = free_energy(DensityField::normalized(spec, next), analysis, theta).F;
      if (F_next <= F + 1e-13) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
      good = 0;
    }
    if (!accepted) {
      status = StationaryStatus::OscillationDetected;
      break;
    }
    max_increase = std::max(max_increase, F_next - F);
    rho = DensityField::normalized(spec, std::move(next)).values();
    F = F_next;
    best_F = std::min(best_F, F);
    if (++good >= 5) {
      alpha = std::min(1.0, alpha * 1.5);
      good = 0;
    }
  }

  StationaryPoint sp(DensityField(spec, rho));
  sp.residual_sup = residual;
  sp.breakdown = free_energy(sp.density, analysis, theta);
  sp.seed_label = std::move(seed_label);
  sp.status = status;
  sp.iterations = it;
  sp.distance_to_uniform = distance(sp.density, uniform(spec), Norm::L1);
  sp.classification = sp.distance_to_uniform > 1e-6 ? StationaryPoint::Classification::NonTrivial
                                                     : StationaryPoint::Classification::Uniform;
  sp.positivity_lower_bound = positivity_bound(sp.density, analysis, theta);
  sp.max_F_increase = max_increase;
  sp.best_F_seen = std::min(best_F, sp.breakdown.F);
  return sp;
}

MinimizerSet minimize_free_energy(const PotentialAnalysis& analysis, double theta, const SolverOptions& options,
                                  const std::vector<DensityField>& warm_starts) {
  const TorusSpec& spec = analysis.spec;
  MinimizerSet set;
  set.F_uniform = uniform_free_energy(analysis, theta);

  auto wants = [&](SeedKind k) { return std::find(options.seeds.begin(), options.seeds.end(), k) != options.seeds.end(); };
  std::vector<std::pair<std::string, DensityField>> seeds;
  seeds.emplace_back("uniform", uniform(spec));
  if (analysis.has_negative_mode()) {
    if (wants(SeedKind::PlaneWave)) {
      for (double eps : {0.05, 0.2}) seeds.emplace_back("planewave", plane_wave_trial(spec, analysis.k_sharp, eps));
    }
    if (wants(SeedKind::ThreeWave) && spec.d == 2) {
      try {
        const PhaseSweep sweep = phase_sweep_cubic(analysis, 0.05);
        for (double eps : {0.1, 0.3}) seeds.emplace_back("threewave", three_wave_trial(spec, analysis, eps, sweep.phases).density);
      } catch (const Error& e) {
        set.log.push_back(std::string("threewave skipped: ") + e.what());
      }
    }
  }
  if (wants(SeedKind::Ball)) {
    try {
      seeds.emplace_back("ball", catastrophic_density(spec, analysis.potential).density);
    } catch (const Error& e) {
      set.log.push_back(std::string("ball skipped: ") + e.what());
    }
  }
  for (std::size_t i = 0; i < warm_starts.size(); ++i) seeds.emplace_back("warm", warm_starts[i]);

  if (wants(SeedKind::Flow) && seeds.size() > 1) {
    std::size_t best = 1;
    double bestF = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < seeds.size(); ++i) {
      const double f = free_energy(seeds[i].second, analysis, theta).F;
      if (f < bestF) {
        bestF = f;
        best = i;
      }
    }
    DynamicsConfig cfg;
    cfg.t_end = options.flow_t_end;
    cfg.dt = dt_cap(analysis, theta);
    cfg.record_densities = false;
    cfg.record_every = 1 << 30;
    const Trajectory traj = evolve(seeds[best].second, analysis, theta, cfg);
    if (traj.status == Trajectory::Status::BlowUp) {
      set.log.push_back("flow seed blew up: " + traj.message);
    } else {
      seeds.emplace_back("flow", DensityField::normalized(spec, traj.final_density));
    }
  }

  set.best_F_any = set.F_uniform;
  for (auto& [label, rho] : seeds) {
    StationaryPoint sp = km_iterate(rho, analysis, theta, options.tol, options.max_iter, label);
    set.log.push_back(label + ": " + to_string(sp.status) + " after " + std::to_string(sp.iterations) +
                      " iterations, F = " + std::to_string(sp.breakdown.F) + ", residual " +
                      std::to_string(sp.residual_sup));
    set.best_F_any = std::min(set.best_F_any, sp.best_F_seen);
    set.points.push_back(std::move(sp));
  }
  set.incumbent = 0;
  for (std::size_t i = 1; i < set.points.size(); ++i) {
    const auto& p = set.points[i];
    if (p.converged() && p.breakdown.F < set.points[set.incumbent].breakdown.F) set.incumbent = i;
  }
  return set;
}

ConditionKResult condition_k_minimize(const TorusSpec& spec, const PotentialSpec& pot, double tol_K, int max_iter) {
  if (!(pot.range() < spec.L)) throw Error(ErrorCode::RangeExceedsTorus, "range must be below L");
  const int N = spec.N;
  const int d = spec.d;
  const std::size_t n = spec.size();
  const Field vs = sample_potential(spec, pot);

  auto column = [&](std::size_t s, std::size_t i) {
    if (d == 1) return vs[(i + n - s) % n];
    const std::size_t si = s / N, sj = s % N, ii = i / N, ij = i % N;
    return vs[((ii + N - si) % N) * N + (ij + N - sj) % N];
  };
  auto apply = [&](const Field& w) {
    Field mw = convolve_periodic(spec, vs, w);
    const double inv = 1.0 / spec.cell_volume();
    for (double& x : mw) x *= inv;
    return mw;
  };
  auto dot = [](const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };

  struct Run {
    Field w;
    double value;
    double gap;
    bool converged;
    int iterations;
  };

  auto run = [&](Field w) -> Run {
    Field mw = apply(w);
    double gap = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < max_iter; ++it) {
      if (it % 200 == 199) mw = apply(w);
      const double wmw = dot(w, mw);
      std::size_t s = 0, a = n;
      for (std::size_t i = 1; i < n; ++i) {
        if (mw[i] < mw[s]) s = i;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > 0.0 && (a == n || mw[i] > mw[a])) a = i;
      }
      gap = 2.0 * (wmw - mw[s]);
      if (gap < tol_K) return {w, wmw, gap, true, it};
      const double away_gain = 2.0 * (mw[a] - wmw);
      const bool use_fw = gap >= away_gain || w[a] >= 1.0;
      const std::size_t v = use_fw ? s : a;
      const double slope = use_fw ? -gap : -away_gain;
      const double curv = vs[0] - 2.0 * mw[v] + wmw;
      const double gmax = use_fw ? 1.0 : w[a] / (1.0 - w[a]);
      double gamma = curv > 0.0 ? std::min(gmax, -slope / (2.0 * curv)) : gmax;
      if (!(gamma > 0.0)) return {w, wmw, gap, false, it};
      const double sign = use_fw ? 1.0 : -1.0;
      // w += gamma * sign * (e_v - w)
      for (std::size_t i = 0; i < n; ++i) {
        w[i] -= sign * gamma * w[i];
        mw[i] += sign * gamma * (column(v, i) - mw[i]);
      }
      w[v] += sign * gamma;
      if (!use_fw && gamma == gmax) w[a] = 0.0;
      for (double& x : w) x = std::max(x, 0.0);
    }
    mw = apply(w);
    return {w, dot(w, mw), gap, false, it};
  };

  std::vector<Field> starts;
  starts.emplace_back(n, 1.0 / double(n));
  Field vertex(n, 0.0);
  vertex[0] = 1.0;
  starts.push_back(vertex);
  std::mt19937_64 rng(20240611);
  std::exponential_distribution<double> expo(1.0);
  for (int r = 0; r < 2; ++r) {
    Field w(n);
    double sum = 0.0;
    for (double& x : w) sum += (x = expo(rng));
    for (double& x : w) x /= sum;
    starts.push_back(std::move(w));
  }
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = spec.point(i);
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double x = p[k] > 0.5 * spec.L ? p[k] - spec.L : p[k];
      r2 += x * x;
    }
    if (r2 <= pot.range() * pot.range() * (1.0 + 1e-12)) near.push_back(i);
  }
  for (double frac : {0.25, 0.5, 1.0}) {
    Field w(n, 0.0);
    double sum = 0.0;
    for (std::size_t i : near) {
      const auto p = spec.point(i);
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double x = p[k] > 0.5 * spec.L ? p[k] - spec.L : p[k];
        r2 += x * x;
      }
      if (r2 <= std::pow(frac * pot.range(), 2) * (1.0 + 1e-12)) sum += (w[i] = 1.0);
    }
    for (double& x : w) x /= sum;
    starts.push_back(std::move(w));
  }
  // sparse clusters inside the interaction range
  std::uniform_int_distribution<std::size_t> pick(0, near.size() - 1);
  for (int r = 0; r < 24; ++r) {
    const int k = 2 + r % 7;
    Field w(n, 0.0);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double x = expo(rng);
      w[near[pick(rng)]] += x;
      sum += x;
    }
    for (double& x : w) x /= sum;
    starts.push_back(std::move(w));
  }

  std::optional<Run> best;
  for (auto& s : starts) {
    Run r = run(std::move(s));
    if (!best || r.value < best->value) best = std::move(r);
  }
  Field rho = best->w;
  double total = 0.0;
  for (double x : rho) total += x;
  for (double& x : rho) x /= total * spec.cell_volume();
  ConditionKResult out{best->value, best->gap, best->converged, best->iterations, DensityField(spec, std::move(rho))};
  return out;
}

}  // namespace mckv
