#pragma once

#include <array>
#include <span>

#include "mckv/torus.hpp"

namespace mckv {

struct PotentialAnalysis;

/// Nonnegative grid density integrating to one.
class DensityField {
 public:
  /// Validates nonnegativity and unit mass (within 1e-10).
  DensityField(TorusSpec spec, Field values);
  /// Rescales nonnegative samples to unit mass before validating.
  static DensityField normalized(TorusSpec spec, Field values);

  const TorusSpec& spec() const { return spec_; }
  const Field& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double mass() const { return integrate(spec_, values_); }
  double min() const;
  double max() const;

 private:
  TorusSpec spec_;
  Field values_;
};

/// Relative perturbation eta = (rho - rho0) / rho0 of a density.
struct Perturbation {
  TorusSpec spec;
  Field eta;
  double h = 0.0;  ///< ||rho0 eta||_1
  Field eta_plus;
  Field eta_minus;
};

Perturbation perturbation_of(const DensityField& rho);

DensityField uniform(const TorusSpec& spec);

/// rho0 (1 + eps cos(k.x + phi)); requires |eps| < 1.
DensityField plane_wave_trial(const TorusSpec& spec, const WaveVector& k, double eps, double phi = 0.0);

/// Lattice-closed triad of modes around k_sharp.
struct ClosingTriple {
  std::array<WaveVector, 3> modes;  ///< k_sharp, k1, k2 with k_sharp + k1 + k2 = 0
  double sigma = 0.0;               ///< max_i |Vhat(k_i) - Vhat(k_sharp)|
  double max_angle_error_deg = 0.0;
};

/// Picks k1, k2 closest to the 120-degree rotations of k_sharp with exact
/// integer closure; throws NoClosingTriple when no candidate lies within
/// 15 degrees.
ClosingTriple find_closing_triple(const PotentialAnalysis& analysis);

struct ThreeWaveTrial {
  DensityField density;
  ClosingTriple triple;
};

/// rho0 (1 + eps sum_i cos(k_i.x + phi_i)); d = 2 only, |eps| < 1/3.
ThreeWaveTrial three_wave_trial(const TorusSpec& spec, const PotentialAnalysis& analysis, double eps,
                                std::array<double, 3> phases);
/// Zero-mean relative profile sum_i cos(k_i.x + phi_i) of the triad.
Field three_wave_profile(const TorusSpec& spec, const ClosingTriple& triple, std::array<double, 3> phases);

/// n^d tiled copies on the torus of side nL with resolution nN.
DensityField periodic_extension(const DensityField& rho, int n);

/// Uniform density on the grid cells whose points lie within radius of center.
DensityField ball_density(const TorusSpec& spec, double radius, std::array<double, 2> center = {0.0, 0.0});

enum class Norm { L1, L2, Linf };

double distance(const DensityField& a, const DensityField& b, Norm norm);

}  // namespace mckv
