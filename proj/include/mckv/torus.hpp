#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mckv {

using Field = std::vector<double>;
using ComplexField = std::vector<std::complex<double>>;

/// Uniform periodic grid on the d-dimensional torus of side L.
///
/// Samples are stored row-major with the first axis slowest; the grid point
/// with multi-index (i0, i1) sits at (i0 * h, i1 * h).
struct TorusSpec {
  int d = 1;
  double L = 1.0;
  int N = 8;

  double h() const { return L / N; }
  std::size_t size() const { return d == 1 ? std::size_t(N) : std::size_t(N) * std::size_t(N); }
  double volume() const;       ///< L^d
  double cell_volume() const;  ///< h^d
  double coordinate(int i) const { return i * h(); }
  /// Point coordinates of the flat sample index (unused axes are zero).
  std::array<double, 2> point(std::size_t flat) const;

  friend bool operator==(const TorusSpec&, const TorusSpec&) = default;
};

/// Validated constructor: d in {1,2}, L > 0, N even and >= 8.
TorusSpec build_grid(int d, double L, int N);

/// Admissible torus mode: integer multi-index m with |m_i| <= N/2 and
/// physical wave vector k = 2 pi m / L.
struct WaveVector {
  int d = 1;
  std::array<int, 2> m{0, 0};
  std::array<double, 2> k{0.0, 0.0};

  double norm() const;
  double norm2() const;
  bool is_zero() const { return m[0] == 0 && m[1] == 0; }

  friend bool operator==(const WaveVector& a, const WaveVector& b) {
    return a.d == b.d && a.m == b.m;
  }
};

/// Mode of the flat spectral index (FFT ordering; index N/2 maps to m = -N/2).
WaveVector wave_vector(const TorusSpec& spec, std::size_t flat);
/// Inverse of wave_vector; m components are taken modulo N.
std::size_t mode_index(const TorusSpec& spec, std::array<int, 2> m);
WaveVector make_wave_vector(const TorusSpec& spec, std::array<int, 2> m);
/// True when some component of the mode sits on the Nyquist frequency.
bool is_nyquist(const TorusSpec& spec, const WaveVector& k);

/// Fourier coefficients f^(k) = \int f(x) e^{-i k.x} dx, one per grid mode.
struct SpectralField {
  TorusSpec spec;
  ComplexField coeffs;

  std::complex<double>& operator[](std::size_t i) { return coeffs[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return coeffs[i]; }
  std::complex<double> at(const WaveVector& k) const { return coeffs[mode_index(spec, k.m)]; }
};

/// Periodic midpoint quadrature h^d * sum f.
double integrate(const TorusSpec& spec, std::span<const double> f);

SpectralField forward_transform(const TorusSpec& spec, std::span<const double> f);
SpectralField forward_transform_complex(const TorusSpec& spec, std::span<const std::complex<double>> f);
/// Real part of the inverse transform.
Field inverse_transform(const SpectralField& fhat);
ComplexField inverse_transform_complex(const SpectralField& fhat);

/// (f * g)(x) = \int f(x - y) g(y) dy, evaluated spectrally.
Field convolve_periodic(const TorusSpec& spec, std::span<const double> f, std::span<const double> g);

/// Largest |imag| discarded by the last real-valued inverse transform on
/// this thread; convolution tests use it to audit the real-output claim.
double last_discarded_imaginary();

namespace detail {
/// In-place unnormalized DFT of size N^d; sign -1 forward, +1 backward.
void fft_inplace(const TorusSpec& spec, std::span<std::complex<double>> data, int sign);
void require_size(const TorusSpec& spec, std::size_t n, const char* what);
}  // namespace detail

}  // namespace mckv
