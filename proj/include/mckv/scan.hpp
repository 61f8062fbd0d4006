#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mckv/potential.hpp"
#include "mckv/solver.hpp"

namespace mckv {

struct ThetaPoint {
  double theta = 0.0;
  double F = 0.0;
  double S = 0.0;
  double E = 0.0;          ///< theta L^d E(rho, rho) / 2, the energy part of F
  double E_form = 0.0;     ///< E(rho, rho)
  StationaryPoint::Classification classification = StationaryPoint::Classification::Uniform;
  double dist_L1 = 0.0;
  bool converged = true;
  std::string seed_label;
};

struct ThetaScan {
  std::vector<ThetaPoint> points;
  double v = 0.0;
  double slack = 1e-8;
  /// Largest violation of each monotonicity (<= slack means it holds).
  double S_violation = 0.0;             ///< S non-decreasing
  double F_violation = 0.0;             ///< F - theta v / 2 non-increasing
  double E_over_theta_violation = 0.0;  ///< E / theta non-increasing
  double E_shift_violation = 0.0;       ///< E - theta v / 2 non-increasing

  bool S_monotone() const { return S_violation <= slack; }
  bool F_monotone() const { return F_violation <= slack; }
  bool E_over_theta_monotone() const { return E_over_theta_violation <= slack; }
  bool E_shift_monotone() const { return E_shift_violation <= slack; }
  bool all_monotone() const { return S_monotone() && F_monotone() && E_over_theta_monotone() && E_shift_monotone(); }
};

/// Forward sweep warm-started from the previous incumbent (plus fresh seeds),
/// then a backward sweep warm-started from the next incumbent; each point
/// keeps the lower free energy.
ThetaScan theta_scan(const PotentialAnalysis& analysis, const std::vector<double>& grid, const SolverOptions& options,
                     double slack = 1e-8);

std::string theta_scan_csv(const ThetaScan& scan);

struct TransitionReport {
  enum class Kind { Continuous, Discontinuous, NoneFound };

  double theta_sharp = 0.0;
  double theta_T_lo = 0.0;
  double theta_T_hi = 0.0;
  Kind kind = Kind::NoneFound;
  double jump_S = 0.0;   ///< S(rho_T) - S(rho0)
  double jump_E = 0.0;   ///< E(rho_T, rho_T) - E(rho0, rho0)
  double dist_L1 = 0.0;  ///< ||rho_T - rho0||_1 at theta_T_hi
  double F_gap_mid = 0.0;  ///< F(incumbent) - F(rho0) at the bracket midpoint
  std::vector<std::pair<double, bool>> samples;  ///< (theta, predicate) in evaluation order
  std::optional<DensityField> rho_T;

  double ratio() const { return 0.5 * (theta_T_lo + theta_T_hi) / theta_sharp; }
};

std::string to_string(TransitionReport::Kind kind);

struct TransitionOptions {
  double bracket_tol = 1e-3;   ///< bracket width, relative to theta_sharp when relative_tol
  bool relative_tol = true;
  int coarse_points = 21;      ///< grid on (0, 1.05 theta_sharp]
  double margin = 1e-10;       ///< predicate F < F(rho0) - margin
};

/// Coarse sweep then bisection on "some density beats rho0". Throws
/// BracketCollapse when the sampled predicate is not monotone.
TransitionReport locate_transition(const PotentialAnalysis& analysis, const SolverOptions& options,
                                   const TransitionOptions& topts = {});

std::string transition_csv(const TransitionReport& report);

struct PhaseSweep {
  std::array<double, 3> phases{0.0, 0.0, 0.0};
  double c3 = 0.0;
  double phase_sum = 0.0;
  std::vector<double> sums;      ///< the 16 sampled phase sums
  std::vector<double> c3_values;
  double c3_finite_difference = 0.0;  ///< (F(eps) - F(-eps)) / (2 eps^3) at the best phases
  ClosingTriple triple;
};

/// Sweeps phi0 + phi1 + phi2 over 16 values and keeps the most negative c3.
PhaseSweep phase_sweep_cubic(const PotentialAnalysis& analysis, double eps = 0.05);

/// 2 (S(rho_sun) + log L^d) / (u0 L^d + v); throws DegenerateDenominator.
double catastrophic_bound(const PotentialAnalysis& analysis, const DensityField& rho_sun, double u0);

struct ScalingRow {
  double L = 0.0;
  int N = 0;
  double theta_sharp = 0.0;
  double theta_T_lo = 0.0;
  double theta_T_hi = 0.0;
  std::optional<double> theta_bound;
  TransitionReport::Kind kind = TransitionReport::Kind::NoneFound;
  bool ok = false;
  std::string message;
};

struct ScalingStudy {
  std::vector<ScalingRow> rows;
  double limit = 0.0;        ///< theta_T ~ limit + B / L
  double correction = 0.0;   ///< B
  double slope = 0.0;        ///< d log theta_T / d log L
  double prefactor = 0.0;    ///< theta_T ~ prefactor L^slope
  std::string regime;        ///< "stable", "catastrophic" or "undetermined"
};

/// Transition location on each L with the fixed spacing h (N = L / h, even).
ScalingStudy scaling_study(const PotentialSpec& pot, int d, double h, const std::vector<double>& ladder,
                           const SolverOptions& options, const TransitionOptions& topts);

std::string scaling_csv(const ScalingStudy& study);

}  // namespace mckv
