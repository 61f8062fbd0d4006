#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mckv/density.hpp"
#include "mckv/dynamics.hpp"
#include "mckv/free_energy.hpp"
#include "mckv/potential.hpp"

namespace mckv {

enum class StationaryStatus { Converged, MaxIterExceeded, OscillationDetected };
std::string to_string(StationaryStatus status);

struct StationaryPoint {
  enum class Classification { Uniform, NonTrivial };

  explicit StationaryPoint(DensityField rho) : density(std::move(rho)) {}

  DensityField density;
  double residual_sup = 0.0;
  FreeEnergyBreakdown breakdown;
  std::string seed_label;
  Classification classification = Classification::Uniform;
  StationaryStatus status = StationaryStatus::Converged;
  int iterations = 0;
  double distance_to_uniform = 0.0;  ///< L1
  /// exp(-theta L^d [P_a V0 + ||rho||_inf ||V||_1]), recorded as a diagnostic.
  double positivity_lower_bound = 0.0;
  double max_F_increase = 0.0;       ///< largest accepted increase of F
  double best_F_seen = 0.0;          ///< lowest F over every iterate

  bool converged() const { return status == StationaryStatus::Converged; }
};

std::string to_string(StationaryPoint::Classification c);

/// Damped Picard iteration rho <- (1 - alpha) rho + alpha Xi(rho).
StationaryPoint km_iterate(const DensityField& init, const PotentialAnalysis& analysis, double theta, double tol,
                           int max_iter, std::string seed_label = "custom");

enum class SeedKind { Uniform, PlaneWave, ThreeWave, Ball, Flow };
std::string to_string(SeedKind kind);
SeedKind parse_seed_kind(const std::string& name);

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  std::vector<SeedKind> seeds{SeedKind::Uniform, SeedKind::PlaneWave, SeedKind::ThreeWave, SeedKind::Ball,
                              SeedKind::Flow};
  double flow_t_end = 2.0;
};

struct MinimizerSet {
  std::vector<StationaryPoint> points;
  std::size_t incumbent = 0;           ///< lowest F among converged points
  double F_uniform = 0.0;
  double best_F_any = 0.0;             ///< lowest F over all iterates of all seeds
  std::vector<std::string> log;

  const StationaryPoint& best() const { return points[incumbent]; }
  /// Some valid density beats rho0 by more than margin.
  bool improves_on_uniform(double margin = 1e-10) const { return best_F_any < F_uniform - margin; }
};

/// Multi-start search: rho0 always, then the requested seeds plus any warm starts.
MinimizerSet minimize_free_energy(const PotentialAnalysis& analysis, double theta, const SolverOptions& options,
                                  const std::vector<DensityField>& warm_starts = {});

struct ConditionKResult {
  double value = 0.0;   ///< best quadratic-form value found
  double gap = 0.0;     ///< Frank-Wolfe duality gap at the returned point
  bool converged = false;
  int iterations = 0;
  DensityField certificate;
};

/// Frank-Wolfe with away steps and exact line search over cell-mass
/// mixtures, minimizing sum_ij V(x_i - x_j) w_i w_j with point-sampled V.
ConditionKResult condition_k_minimize(const TorusSpec& spec, const PotentialSpec& pot, double tol_K, int max_iter);

}  // namespace mckv
