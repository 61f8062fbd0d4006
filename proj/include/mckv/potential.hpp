#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mckv/density.hpp"
#include "mckv/torus.hpp"

namespace mckv {

/// One radial step of a piecewise-constant profile: V(x) = value for
/// previous_radius < |x| <= radius.
struct Shell {
  double radius;
  double value;
};

/// Knot of a piecewise-linear radial profile.
struct RadialKnot {
  double r;
  double value;
};

/// Finite-range, radially symmetric interaction with V(x) = 0 beyond range().
class PotentialSpec {
 public:
  enum class Kind { Shells, Table };

  /// Shells ordered by strictly increasing radius; range defaults to the
  /// outermost radius and may be set larger.
  static PotentialSpec shells(std::vector<Shell> shells, std::optional<double> range = std::nullopt);
  /// Piecewise-linear profile through the knots, which must start at r = 0
  /// and increase strictly; V vanishes beyond the last knot.
  static PotentialSpec table(std::vector<RadialKnot> knots, std::optional<double> range = std::nullopt);
  static PotentialSpec zero(double range);

  Kind kind() const { return kind_; }
  double range() const { return range_; }
  const std::vector<Shell>& shell_list() const { return shells_; }
  const std::vector<RadialKnot>& knots() const { return knots_; }

  /// Radial profile V(r).
  double value(double r) const;
  /// Exact continuum transform \int V(x) e^{-ik.x} dx in dimension d at |k|.
  double transform(double k, int d) const;
  /// \int V dx over R^d.
  double integral(int d) const;
  /// Integral of V over the ball |x| <= r.
  double ball_integral(double r, int d) const;
  double max_abs() const;
  /// sup(-V), clipped at zero.
  double lower_bound_constant() const;
  /// Radii where the profile changes slope or jumps (shell edges, knots).
  std::vector<double> breakpoints() const;
  /// Same potential multiplied by c.
  PotentialSpec scaled(double c) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::Shells;
  std::vector<Shell> shells_;
  std::vector<RadialKnot> knots_;
  double range_ = 0.0;
};

/// Grid samples V(x_i) at minimum-image distance (used by the point-mass
/// quadratic form, not by the spectral machinery).
Field sample_potential(const TorusSpec& spec, const PotentialSpec& pot);

struct PotentialAnalysis {
  TorusSpec spec;
  PotentialSpec potential;
  double v = 0.0;      ///< \int V dx
  double v_max = 0.0;  ///< sup |V|
  double v0 = 0.0;     ///< sup(-V) >= 0
  SpectralField spectrum;
  std::vector<double> vhat;  ///< real part of the spectrum, flat FFT ordering
  WaveVector k_sharp;
  double vhat_sharp = 0.0;
  double theta_sharp = 0.0;  ///< +inf when no nonzero mode is negative
  double min_vhat_all = 0.0; ///< min over every mode including k = 0

  bool has_negative_mode() const;
};

/// Spectrum on the torus lattice from the exact per-shell transform; k_sharp
/// minimizes over nonzero, non-Nyquist modes (ties: smallest |k|, then
/// lexicographic m).
PotentialAnalysis analyze(const TorusSpec& spec, const PotentialSpec& pot);

struct StabilityOptions {
  double tol_spec_factor = 1e-10;  ///< tol_spec = factor * V_max
  double tol_K = 1e-8;
  int condition_k_points = 64;     ///< grid points per axis on the L = 4a torus
  int condition_k_max_iter = 20000;
};

struct StabilityClass {
  enum class Kind { PositiveType, ConditionKStable, CatastrophicTPZa, CatastrophicTPZb, CatastrophicNumeric, Inconclusive };
  Kind kind = Kind::Inconclusive;
  double value = 0.0;  ///< numeric quadratic-form minimum when computed
  std::optional<Field> certificate;  ///< density on the L = 4a torus for CatastrophicNumeric
  std::optional<TorusSpec> certificate_spec;
  std::string detail;

  bool catastrophic() const {
    return kind == Kind::CatastrophicTPZa || kind == Kind::CatastrophicTPZb || kind == Kind::CatastrophicNumeric;
  }
};

std::string to_string(StabilityClass::Kind kind);

/// Shell-structure test for a repulsive core dominated by an attractive
/// ring: returns the core radius lambda * a when some shell boundary works.
std::optional<double> tpz_b_core_radius(const PotentialSpec& pot, int d);

StabilityClass classify_stability(const PotentialAnalysis& analysis, const StabilityOptions& options = {});

struct CatastrophicDensity {
  DensityField density;
  double u0 = 0.0;      ///< -E(rho, rho) > 0
  double radius = 0.0;  ///< ball radius
  StabilityClass::Kind criterion = StabilityClass::Kind::CatastrophicTPZa;
};

/// Uniform-ball density with negative self-energy for potentials failing
/// the integral or core/ring criterion.
CatastrophicDensity catastrophic_density(const TorusSpec& spec, const PotentialSpec& pot);

}  // namespace mckv
