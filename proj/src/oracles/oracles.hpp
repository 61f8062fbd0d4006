#pragma once

// Brute-force references for the test suite. Slow by design and guarded by
// explicit size budgets.

#include <span>

#include "mckv/density.hpp"
#include "mckv/potential.hpp"
#include "mckv/torus.hpp"

namespace mckv::oracle {

struct OracleBudget {
  int max_transform_N = 32;
  int max_pair_N_1d = 256;
  int max_pair_N_2d = 32;
  int max_simplex_cells = 16;
  double quadrature_tol = 1e-13;
};

inline constexpr OracleBudget kBudget{};

/// Direct sum h^d sum_x f(x) e^{-ik.x} for every grid mode.
ComplexField dft(const TorusSpec& spec, std::span<const double> f);
/// Direct sum L^{-d} sum_k fhat(k) e^{ik.x}.
ComplexField inverse_dft(const TorusSpec& spec, std::span<const std::complex<double>> fhat);

/// h^d sum_y f(x - y) g(y) with periodic index arithmetic.
Field convolution(const TorusSpec& spec, std::span<const double> f, std::span<const double> g);

/// Reference transform \int V(x) e^{-ik.x} dx by adaptive Gauss-Kronrod
/// quadrature between breakpoints (nested angular integral in d = 2).
double spectrum(const PotentialSpec& pot, double k, int d);

enum class Kernel {
  PointSampled,  ///< V at minimum-image distance of grid points
  BandLimited,   ///< L^{-d} sum_k spectrum(k) e^{ik.x} over the grid modes
};

/// h^{2d} sum_{x,y} K(x - y) a(x) b(y).
double energy(const DensityField& a, const DensityField& b, const PotentialSpec& pot, Kernel kernel);

/// Minimum of the point-sampled quadratic form over w delta_x + (1 - w) delta_y,
/// all cell pairs and w on a 101-point grid.
double two_point_K(const PotentialSpec& pot, const TorusSpec& spec);

struct SimplexMinimum {
  double value = 0.0;
  int support = 0;  ///< number of cells carrying mass at the minimizer
};

/// Exact minimum of the point-sampled quadratic form over the whole simplex:
/// every support S is tried and the KKT system Q_S w = mu 1, sum w = 1 is
/// solved; feasible solutions have value mu.
SimplexMinimum simplex_K(const PotentialSpec& pot, const TorusSpec& spec);

}  // namespace mckv::oracle
