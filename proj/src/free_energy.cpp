#include "mckv/free_energy.hpp"

#include <algorithm>
#include <cmath>

#include "mckv/error.hpp"

namespace mckv {

namespace {

void require_analysis(const TorusSpec& spec, const PotentialAnalysis& analysis) {
  if (!(spec == analysis.spec)) throw Error(ErrorCode::SpecMismatch, "potential was analyzed on a different torus");
}

}  // namespace

double entropy(const DensityField& rho) {
  double acc = 0.0;
  for (double v : rho.values()) {
    if (v > 0.0) acc += v * std::log(v);
  }
  return acc * rho.spec().cell_volume();
}

double interaction_form(const PotentialAnalysis& analysis, std::span<const double> a, std::span<const double> b) {
  const TorusSpec& spec = analysis.spec;
  const SpectralField ah = forward_transform(spec, a);
  const SpectralField bh = forward_transform(spec, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < ah.coeffs.size(); ++i) acc += analysis.vhat[i] * (ah[i] * std::conj(bh[i])).real();
  return acc / spec.volume();
}

double interaction_energy(const DensityField& a, const DensityField& b, const PotentialAnalysis& analysis) {
  require_analysis(a.spec(), analysis);
  require_analysis(b.spec(), analysis);
  return interaction_form(analysis, a.values(), b.values());
}

Field potential_field(const PotentialAnalysis& analysis, std::span<const double> f) {
  SpectralField fh = forward_transform(analysis.spec, f);
  for (std::size_t i = 0; i < fh.coeffs.size(); ++i) fh[i] *= analysis.vhat[i];
  return inverse_transform(fh);
}

FreeEnergyBreakdown free_energy(const DensityField& rho, const PotentialAnalysis& analysis, double theta) {
  if (theta < 0.0) throw Error(ErrorCode::InvalidArgument, "theta must be nonnegative");
  require_analysis(rho.spec(), analysis);
  FreeEnergyBreakdown out;
  out.S = entropy(rho);
  out.E = interaction_form(analysis, rho.values(), rho.values());
  out.theta = theta;
  out.F = out.S + 0.5 * theta * rho.spec().volume() * out.E;
  return out;
}

double uniform_free_energy(const PotentialAnalysis& analysis, double theta) {
  return -std::log(analysis.spec.volume()) + 0.5 * theta * analysis.v;
}

Field km_map(const PotentialAnalysis& analysis, std::span<const double> rho, double theta) {
  const TorusSpec& spec = analysis.spec;
  Field u = potential_field(analysis, rho);
  const double c = theta * spec.volume();
  double lo = *std::min_element(u.begin(), u.end());
  for (double& x : u) x = std::exp(-c * (x - lo));
  const double z = integrate(spec, u);
  for (double& x : u) x /= z;
  return u;
}

KmResidual km_residual(const DensityField& rho, const PotentialAnalysis& analysis, double theta) {
  require_analysis(rho.spec(), analysis);
  KmResidual out;
  out.residual = km_map(analysis, rho.values(), theta);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    out.residual[i] = rho[i] - out.residual[i];
    out.sup = std::max(out.sup, std::abs(out.residual[i]));
  }
  return out;
}

ExpansionCoefficients expansion_coefficients(std::span<const double> eta, const PotentialAnalysis& analysis,
                                             double theta) {
  const TorusSpec& spec = analysis.spec;
  detail::require_size(spec, eta.size(), "expansion_coefficients");
  const double rho0 = 1.0 / spec.volume();
  double sq = 0.0;
  double cube = 0.0;
  for (double e : eta) {
    sq += e * e;
    cube += e * e * e;
  }
  sq *= spec.cell_volume();
  cube *= spec.cell_volume();
  ExpansionCoefficients out;
  out.c2 = 0.5 * rho0 * sq + 0.5 * theta * rho0 * interaction_form(analysis, eta, eta);
  out.c3 = -rho0 * cube / 6.0;
  return out;
}

}  // namespace mckv
