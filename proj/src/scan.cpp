#include "mckv/scan.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "mckv/error.hpp"
#include "mckv/free_energy.hpp"

namespace mckv {

namespace {

ThetaPoint point_from(const StationaryPoint& sp, const PotentialAnalysis& analysis, double theta) {
  ThetaPoint p;
  p.theta = theta;
  p.F = sp.breakdown.F;
  p.S = sp.breakdown.S;
  p.E_form = sp.breakdown.E;
  p.E = 0.5 * theta * analysis.spec.volume() * sp.breakdown.E;
  p.classification = sp.classification;
  p.dist_L1 = sp.distance_to_uniform;
  p.converged = sp.converged();
  p.seed_label = sp.seed_label;
  return p;
}

void evaluate_monotonicity(ThetaScan& scan) {
  const auto& pts = scan.points;
  scan.S_violation = scan.F_violation = scan.E_over_theta_violation = scan.E_shift_violation = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[i + 1];
    scan.S_violation = std::max(scan.S_violation, a.S - b.S);
    scan.F_violation = std::max(scan.F_violation, (b.F - 0.5 * b.theta * scan.v) - (a.F - 0.5 * a.theta * scan.v));
    if (a.theta > 0.0) scan.E_over_theta_violation = std::max(scan.E_over_theta_violation, b.E / b.theta - a.E / a.theta);
    scan.E_shift_violation = std::max(scan.E_shift_violation, (b.E - 0.5 * b.theta * scan.v) - (a.E - 0.5 * a.theta * scan.v));
  }
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

ThetaScan theta_scan(const PotentialAnalysis& analysis, const std::vector<double>& grid, const SolverOptions& options,
                     double slack) {
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i + 1] > grid[i])) throw Error(ErrorCode::InvalidArgument, "theta grid must be increasing");
  }
  for (double t : grid) {
    if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "theta grid must be nonnegative");
  }
  ThetaScan scan;
  scan.v = analysis.v;
  scan.slack = slack;
  std::vector<DensityField> dens;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<DensityField> warm;
    if (i > 0 && scan.points[i - 1].classification == StationaryPoint::Classification::NonTrivial) warm.push_back(dens[i - 1]);
    const MinimizerSet set = minimize_free_energy(analysis, grid[i], options, warm);
    scan.points.push_back(point_from(set.best(), analysis, grid[i]));
    dens.push_back(set.best().density);
  }
  for (std::size_t j = grid.size(); j-- > 1;) {
    const std::size_t i = j - 1;
    if (scan.points[j].classification != StationaryPoint::Classification::NonTrivial) continue;
    const StationaryPoint sp = km_iterate(dens[j], analysis, grid[i], options.tol, options.max_iter, "backward");
    if (sp.converged() && sp.breakdown.F < scan.points[i].F - 1e-13) {
      scan.points[i] = point_from(sp, analysis, grid[i]);
      dens[i] = sp.density;
    }
  }
  evaluate_monotonicity(scan);
  return scan;
}

std::string theta_scan_csv(const ThetaScan& scan) {
  std::ostringstream os;
  os << "theta,F,S,E,class,dist_L1\n";
  for (const auto& p : scan.points) {
    os << fmt(p.theta) << ',' << fmt(p.F) << ',' << fmt(p.S) << ',' << fmt(p.E) << ',' << to_string(p.classification)
       << ',' << fmt(p.dist_L1) << '\n';
  }
  return os.str();
}

std::string to_string(TransitionReport::Kind kind) {
  switch (kind) {
    case TransitionReport::Kind::Continuous: return "Continuous";
    case TransitionReport::Kind::Discontinuous: return "Discontinuous";
    case TransitionReport::Kind::NoneFound: return "NoneFound";
  }
  return "Unknown";
}

namespace {

struct Probe {
  bool improves = false;
  double best_F = 0.0;  ///< lowest F among candidate densities
  std::optional<DensityField> best;
};

// Cheapest route first: a warm start that already certifies settles the
// predicate; otherwise the full seed plan runs.
Probe probe(const PotentialAnalysis& analysis, double theta, const SolverOptions& options, double margin,
            const std::optional<DensityField>& warm) {
  const double F0 = uniform_free_energy(analysis, theta);
  Probe p;
  p.best_F = F0;
  auto consider = [&](const StationaryPoint& sp) {
    if (sp.classification == StationaryPoint::Classification::NonTrivial && sp.breakdown.F < p.best_F) {
      p.best_F = sp.breakdown.F;
      p.best = sp.density;
    }
    if (sp.best_F_seen < F0 - margin) p.improves = true;
  };
  if (warm) {
    consider(km_iterate(*warm, analysis, theta, options.tol, options.max_iter, "warm"));
    if (p.improves) return p;
  }
  const MinimizerSet set = minimize_free_energy(analysis, theta, options);
  for (const auto& sp : set.points) consider(sp);
  p.improves = p.improves || set.improves_on_uniform(margin);
  return p;
}

}  // namespace

TransitionReport locate_transition(const PotentialAnalysis& analysis, const SolverOptions& options,
                                   const TransitionOptions& topts) {
  TransitionReport rep;
  rep.theta_sharp = analysis.theta_sharp;
  if (!analysis.has_negative_mode()) return rep;
  const double ts = analysis.theta_sharp;
  const double tol = topts.relative_tol ? topts.bracket_tol * ts : topts.bracket_tol;
  const int M = std::max(2, topts.coarse_points);

  // Descending sweep so the non-trivial branch can be followed downward.
  std::optional<DensityField> warm;
  std::vector<std::pair<double, bool>> coarse;
  std::optional<DensityField> hi_density;
  for (int j = M; j >= 1; --j) {
    const double th = 1.05 * ts * j / M;
    Probe p = probe(analysis, th, options, topts.margin, warm);
    rep.samples.emplace_back(th, p.improves);
    coarse.emplace_back(th, p.improves);
    if (p.best) warm = p.best;
    if (p.improves && p.best) hi_density = p.best;
  }
  std::reverse(coarse.begin(), coarse.end());
  auto first_true = std::find_if(coarse.begin(), coarse.end(), [](const auto& s) { return s.second; });
  if (first_true == coarse.end()) return rep;
  for (auto it = first_true; it != coarse.end(); ++it) {
    if (!it->second) {
      std::ostringstream os;
      os << "predicate not monotone on the coarse grid:";
      for (const auto& [th, b] : coarse) os << ' ' << th << (b ? ":T" : ":F");
      throw Error(ErrorCode::BracketCollapse, os.str());
    }
  }
  double hi = first_true->first;
  double lo = first_true == coarse.begin() ? 0.0 : std::prev(first_true)->first;

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    Probe p = probe(analysis, mid, options, topts.margin, hi_density);
    rep.samples.emplace_back(mid, p.improves);
    if (p.improves) {
      hi = mid;
      if (p.best) hi_density = p.best;
    } else {
      lo = mid;
    }
  }
  for (const auto& [th, b] : rep.samples) {
    if ((b && th <= lo) || (!b && th >= hi)) {
      throw Error(ErrorCode::BracketCollapse, "predicate sample at theta = " + fmt(th) + " contradicts the bracket");
    }
  }
  rep.theta_T_lo = lo;
  rep.theta_T_hi = hi;

  // Incumbent just above the transition.
  Probe top = probe(analysis, hi, options, topts.margin, hi_density);
  if (!top.best) throw Error(ErrorCode::Internal, "no non-trivial density at the upper bracket end");
  const DensityField& rho_T = *top.best;
  const DensityField rho0 = uniform(analysis.spec);
  const FreeEnergyBreakdown bT = free_energy(rho_T, analysis, hi);
  const FreeEnergyBreakdown b0 = free_energy(rho0, analysis, hi);
  rep.jump_S = bT.S - b0.S;
  rep.jump_E = bT.E - b0.E;
  rep.dist_L1 = distance(rho_T, rho0, Norm::L1);
  rep.rho_T = rho_T;

  const double mid = 0.5 * (lo + hi);
  const StationaryPoint at_mid = km_iterate(rho_T, analysis, mid, options.tol, options.max_iter, "midpoint");
  rep.F_gap_mid = std::min(at_mid.breakdown.F, uniform_free_energy(analysis, mid)) - uniform_free_energy(analysis, mid);

  if (rep.dist_L1 > 0.1) {
    rep.kind = TransitionReport::Kind::Discontinuous;
  } else {
    // Distances of the branch along a shrinking sequence above theta_T.
    std::vector<double> dists;
    std::optional<DensityField> w = rho_T;
    for (double delta : {16.0, 8.0, 4.0, 2.0}) {
      Probe p = probe(analysis, hi + delta * tol, options, topts.margin, w);
      dists.push_back(p.best ? distance(*p.best, rho0, Norm::L1) : 0.0);
      if (p.best) w = p.best;
    }
    dists.push_back(rep.dist_L1);
    bool shrinking = true;
    for (std::size_t i = 0; i + 1 < dists.size(); ++i) shrinking = shrinking && dists[i + 1] <= dists[i] * (1.0 + 1e-6);
    rep.kind = shrinking ? TransitionReport::Kind::Continuous : TransitionReport::Kind::Discontinuous;
  }
  return rep;
}

std::string transition_csv(const TransitionReport& r) {
  std::ostringstream os;
  os << "theta_sharp,theta_T_lo,theta_T_hi,kind,jump_S,jump_E\n";
  os << fmt(r.theta_sharp) << ',' << fmt(r.theta_T_lo) << ',' << fmt(r.theta_T_hi) << ',' << to_string(r.kind) << ','
     << fmt(r.jump_S) << ',' << fmt(r.jump_E) << '\n';
  return os.str();
}

PhaseSweep phase_sweep_cubic(const PotentialAnalysis& analysis, double eps) {
  const TorusSpec& spec = analysis.spec;
  PhaseSweep out;
  out.triple = find_closing_triple(analysis);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 16; ++j) {
    const double sum = 2.0 * std::numbers::pi * j / 16.0;
    const Field eta = three_wave_profile(spec, out.triple, {0.0, 0.0, sum});
    const double c3 = expansion_coefficients(eta, analysis, analysis.theta_sharp).c3;
    out.sums.push_back(sum);
    out.c3_values.push_back(c3);
    if (c3 < best) {
      best = c3;
      out.phases = {0.0, 0.0, sum};
      out.phase_sum = sum;
      out.c3 = c3;
    }
  }
  if (!(out.c3 < 0.0)) throw Error(ErrorCode::Internal, "phase sweep found no negative cubic coefficient");
  const double rho0 = 1.0 / spec.volume();
  const Field eta = three_wave_profile(spec, out.triple, out.phases);
  auto F_at = [&](double e) {
    Field v(eta.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rho0 * (1.0 + e * eta[i]);
    return free_energy(DensityField::normalized(spec, std::move(v)), analysis, analysis.theta_sharp).F;
  };
  out.c3_finite_difference = (F_at(eps) - F_at(-eps)) / (2.0 * eps * eps * eps);
  return out;
}

double catastrophic_bound(const PotentialAnalysis& analysis, const DensityField& rho_sun, double u0) {
  const double Ld = analysis.spec.volume();
  const double den = u0 * Ld + analysis.v;
  if (!(u0 > 0.0) || !(den > 0.0))
    throw Error(ErrorCode::DegenerateDenominator, "u0 L^d + v = " + fmt(den) + " must be positive");
  return 2.0 * (entropy(rho_sun) + std::log(Ld)) / den;
}

ScalingStudy scaling_study(const PotentialSpec& pot, int d, double h, const std::vector<double>& ladder,
                           const SolverOptions& options, const TransitionOptions& topts) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  ScalingStudy study;
  for (double L : ladder) {
    ScalingRow row;
    row.L = L;
    row.N = 2 * int(std::lround(L / h / 2.0));
    try {
      const TorusSpec spec = build_grid(d, L, row.N);
      const PotentialAnalysis analysis = analyze(spec, pot);
      row.theta_sharp = analysis.theta_sharp;
      try {
        const CatastrophicDensity cd = catastrophic_density(spec, pot);
        row.theta_bound = catastrophic_bound(analysis, cd.density, cd.u0);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotCatastrophic && e.code() != ErrorCode::DegenerateDenominator) throw;
      }
      const TransitionReport rep = locate_transition(analysis, options, topts);
      row.theta_T_lo = rep.theta_T_lo;
      row.theta_T_hi = rep.theta_T_hi;
      row.kind = rep.kind;
      row.ok = rep.kind != TransitionReport::Kind::NoneFound;
    } catch (const Error& e) {
      row.message = e.what();
    }
    study.rows.push_back(row);
  }

  std::vector<double> xs, ys, lx, ly;
  for (const auto& r : study.rows) {
    if (!r.ok) continue;
    const double t = 0.5 * (r.theta_T_lo + r.theta_T_hi);
    xs.push_back(1.0 / r.L);
    ys.push_back(t);
    lx.push_back(std::log(r.L));
    ly.push_back(std::log(t));
  }
  study.regime = "undetermined";
  if (xs.size() < 4) return study;
  auto linfit = [](const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::pair{(sy - slope * sx) / n, slope};
  };
  std::tie(study.limit, study.correction) = linfit(xs, ys);
  double logc = 0.0;
  std::tie(logc, study.slope) = linfit(lx, ly);
  study.prefactor = std::exp(logc);
  if (study.slope <= -0.5) {
    study.regime = "catastrophic";
  } else if (study.limit > 0.0) {
    study.regime = "stable";
  }
  return study;
}

std::string scaling_csv(const ScalingStudy& study) {
  std::ostringstream os;
  os << "L,N,theta_sharp,theta_T_lo,theta_T_hi,theta_bound\n";
  for (const auto& r : study.rows) {
    os << fmt(r.L) << ',' << r.N << ',' << fmt(r.theta_sharp) << ',' << fmt(r.theta_T_lo) << ',' << fmt(r.theta_T_hi)
       << ',' << (r.theta_bound ? fmt(*r.theta_bound) : std::string("nan")) << '\n';
  }
  return os.str();
}

}  // namespace mckv
