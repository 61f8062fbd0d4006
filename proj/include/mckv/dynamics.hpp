#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "mckv/density.hpp"
#include "mckv/free_energy.hpp"
#include "mckv/potential.hpp"

namespace mckv {

struct DynamicsConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double steady_tol = 1e-8;        ///< on ||rho_{n+1} - rho_n||_inf / dt
  double positivity_floor = 1e-14; ///< values below are raised to this
  double max_floor_mass = 1e-6;    ///< cumulative floor mass treated as under-resolution
  int record_every = 10;
  double cap_factor = 0.5;
  bool dealias = false;            ///< 2/3-rule on the transport term
  bool record_densities = true;
  bool stop_at_steady_state = true;
  double steady_residual_tol = 1e-6;  ///< KM residual required for a steady state
  std::vector<std::array<int, 2>> track_modes;
};

/// Largest admissible step: cap_factor h^2 / (1 + (pi^2/4) theta max|Vhat| peak),
/// where peak = max(1, L^d max rho) scales the explicit transport term.
double dt_cap(const PotentialAnalysis& analysis, double theta, double cap_factor = 0.5, double peak = 1.0);

/// lambda(k) = |k|^2 (1 + theta Vhat(k)).
double linear_rate(const PotentialAnalysis& analysis, const WaveVector& k, double theta);

struct StepResult {
  Field rho;
  double floor_mass = 0.0;    ///< mass added by the positivity floor
  double mass_before = 1.0;   ///< mass before renormalization
};

/// One IMEX step: implicit diffusion, explicit pseudo-spectral transport,
/// then floor and renormalize. Throws BlowUp.
StepResult step(const DensityField& rho, const PotentialAnalysis& analysis, double theta, double dt,
                double positivity_floor = 1e-14, bool dealias = false);

struct Trajectory {
  enum class Status { Completed, SteadyState, BlowUp };

  std::vector<double> times;
  std::vector<Field> densities;
  std::vector<double> F;
  std::vector<double> mass;      ///< before renormalization
  std::vector<double> min_rho;
  std::vector<std::array<int, 2>> tracked;
  std::vector<std::vector<std::complex<double>>> modes;  ///< rho^(k) per record, per tracked mode

  Status status = Status::Completed;
  std::string message;
  double dt = 0.0;      ///< step size at the initial density
  double min_dt = 0.0;  ///< smallest step taken
  long steps = 0;
  double floor_mass_total = 0.0;
  double max_mass_drift = 0.0;       ///< max |mass - 1| before renormalization
  double max_relative_F_increase = 0.0;  ///< max over steps of (F_{n+1} - F_n) / |F_n|
  Field final_density;
};

std::string to_string(Trajectory::Status status);

/// Integrates to t_end or to a steady state; a blow-up (including floor mass
/// beyond max_floor_mass) ends the run with a partial trajectory instead of throwing.
Trajectory evolve(const DensityField& init, const PotentialAnalysis& analysis, double theta, const DynamicsConfig& config);

/// CSV with columns t,F,mass,min_rho and a _re/_im pair per tracked mode.
std::string trajectory_csv(const Trajectory& traj);

/// Fourier-series coefficients c_m of eta = rho / rho0 - 1 for |m_i| <= cutoff.
struct ModeState {
  int d = 1;
  int cutoff = 0;
  std::vector<std::complex<double>> c;  ///< (2 cutoff + 1)^d entries, m_i in [-cutoff, cutoff]

  std::size_t index(std::array<int, 2> m) const;
  std::complex<double> at(std::array<int, 2> m) const { return c[index(m)]; }
};

/// Restriction of a density's spectrum to |m_i| <= cutoff (c_m = rho^(k_m)).
ModeState modes_of(const DensityField& rho, int cutoff);

struct ModeTrajectory {
  std::vector<double> times;
  std::vector<std::array<int, 2>> tracked;
  std::vector<std::vector<std::complex<double>>> amplitudes;
  ModeState final_state;
};

/// RK4 for dc_k/dt = -lambda(k) c_k - theta sum_{k'} (k.k') Vhat(k') c_{k'} c_{k-k'}
/// on the truncated lattice. Throws BlowUp on divergence.
ModeTrajectory mode_system_evolve(const ModeState& init, const PotentialAnalysis& analysis, double theta, double dt,
                                  double t_end, const std::vector<std::array<int, 2>>& tracked, int record_every = 1);

/// Least-squares slope of log(y) against t.
double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y);

struct BasinEntry {
  double eps0 = 0.0;
  bool satisfies_bound = false;  ///< 2 |k| theta G eps0 < lambda(k) for all truncated k
  double fitted_rate = 0.0;      ///< decay rate of ||rho - rho0||_inf
  bool decayed = false;
  Trajectory::Status status = Trajectory::Status::Completed;
};

struct BasinReport {
  double theta = 0.0;
  double lambda_min = 0.0;
  double G = 0.0;
  double eps_bound = 0.0;  ///< largest eps0 satisfying the smallness condition
  int cutoff = 0;
  std::vector<BasinEntry> entries;
};

/// Multi-mode noise with max amplitude eps0 on |m_i| <= cutoff; each run is
/// checked for exponential decay to rho0 at rate >= lambda_min / 2.
BasinReport basin_experiment(const PotentialAnalysis& analysis, double theta, const std::vector<double>& eps_grid,
                             const DynamicsConfig& config, int cutoff, std::uint64_t seed,
                             const std::vector<std::array<int, 2>>& aligned_modes = {});

}  // namespace mckv
