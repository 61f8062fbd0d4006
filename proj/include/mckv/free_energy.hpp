#pragma once

#include <span>

#include "mckv/density.hpp"
#include "mckv/potential.hpp"

namespace mckv {

struct FreeEnergyBreakdown {
  double S = 0.0;  ///< \int rho log rho
  double E = 0.0;  ///< E(rho, rho)
  double theta = 0.0;
  double F = 0.0;  ///< S + theta L^d E / 2
};

/// Quadrature of rho log rho with 0 log 0 = 0.
double entropy(const DensityField& rho);

/// L^{-d} sum_k Vhat(k) fa(k) conj(fb(k)) for arbitrary real fields.
double interaction_form(const PotentialAnalysis& analysis, std::span<const double> a, std::span<const double> b);
double interaction_energy(const DensityField& a, const DensityField& b, const PotentialAnalysis& analysis);

/// (V * f)(x) with the exact spectrum.
Field potential_field(const PotentialAnalysis& analysis, std::span<const double> f);

FreeEnergyBreakdown free_energy(const DensityField& rho, const PotentialAnalysis& analysis, double theta);
/// F(rho0) = -log L^d + theta v / 2.
double uniform_free_energy(const PotentialAnalysis& analysis, double theta);

/// Right side of the Kirkwood-Monroe equation, exp(-theta L^d V*rho) / Z.
Field km_map(const PotentialAnalysis& analysis, std::span<const double> rho, double theta);

struct KmResidual {
  Field residual;  ///< rho - Xi(rho)
  double sup = 0.0;
};

KmResidual km_residual(const DensityField& rho, const PotentialAnalysis& analysis, double theta);

struct ExpansionCoefficients {
  double c2 = 0.0;
  double c3 = 0.0;
};

/// Coefficients of eps^2 and eps^3 in F(rho0 (1 + eps eta)) - F(rho0).
ExpansionCoefficients expansion_coefficients(std::span<const double> eta, const PotentialAnalysis& analysis, double theta);

}  // namespace mckv
