#include "mckv/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "mckv/error.hpp"

namespace mckv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OddResolution: return "OddResolution";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidPotential: return "InvalidPotential";
    case ErrorCode::RangeExceedsTorus: return "RangeExceedsTorus";
    case ErrorCode::NotCatastrophic: return "NotCatastrophic";
    case ErrorCode::InvalidDensity: return "InvalidDensity";
    case ErrorCode::AmplitudeTooLarge: return "AmplitudeTooLarge";
    case ErrorCode::NoClosingTriple: return "NoClosingTriple";
    case ErrorCode::BallExceedsTorus: return "BallExceedsTorus";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::BracketCollapse: return "BracketCollapse";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::EmptyPlot: return "EmptyPlot";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

double TorusSpec::volume() const { return d == 1 ? L : L * L; }

double TorusSpec::cell_volume() const {
  const double hh = h();
  return d == 1 ? hh : hh * hh;
}

std::array<double, 2> TorusSpec::point(std::size_t flat) const {
  if (d == 1) return {coordinate(int(flat)), 0.0};
  return {coordinate(int(flat / N)), coordinate(int(flat % N))};
}

TorusSpec build_grid(int d, double L, int N) {
  if (d != 1 && d != 2)
    throw Error(ErrorCode::UnsupportedDimension, "dimension " + std::to_string(d) + " (expected 1 or 2)");
  if (!(L > 0.0) || !std::isfinite(L))
    throw Error(ErrorCode::NonPositiveLength, "side length must be positive");
  if (N % 2 != 0) throw Error(ErrorCode::OddResolution, "N = " + std::to_string(N) + " is odd");
  if (N < 8) throw Error(ErrorCode::OddResolution, "N = " + std::to_string(N) + " is below the minimum of 8");
  return TorusSpec{d, L, N};
}

double WaveVector::norm2() const { return k[0] * k[0] + k[1] * k[1]; }
double WaveVector::norm() const { return std::sqrt(norm2()); }

WaveVector make_wave_vector(const TorusSpec& spec, std::array<int, 2> m) {
  WaveVector w;
  w.d = spec.d;
  w.m = m;
  if (spec.d == 1) w.m[1] = 0;
  const double scale = 2.0 * std::numbers::pi / spec.L;
  w.k = {scale * w.m[0], scale * w.m[1]};
  return w;
}

namespace {
int signed_mode(int i, int N) { return i < N / 2 ? i : i - N; }
int wrap(int m, int N) { return ((m % N) + N) % N; }
}  // namespace

WaveVector wave_vector(const TorusSpec& spec, std::size_t flat) {
  if (spec.d == 1) return make_wave_vector(spec, {signed_mode(int(flat), spec.N), 0});
  return make_wave_vector(spec, {signed_mode(int(flat / spec.N), spec.N), signed_mode(int(flat % spec.N), spec.N)});
}

std::size_t mode_index(const TorusSpec& spec, std::array<int, 2> m) {
  if (spec.d == 1) return std::size_t(wrap(m[0], spec.N));
  return std::size_t(wrap(m[0], spec.N)) * spec.N + std::size_t(wrap(m[1], spec.N));
}

bool is_nyquist(const TorusSpec& spec, const WaveVector& k) {
  const int half = spec.N / 2;
  return std::abs(k.m[0]) == half || (spec.d == 2 && std::abs(k.m[1]) == half);
}

namespace detail {

void require_size(const TorusSpec& spec, std::size_t n, const char* what) {
  if (n != spec.size())
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + ": got " + std::to_string(n) + " samples, expected " + std::to_string(spec.size()));
}

namespace {

// FFTW planning is not thread-safe; execution with new-array execute is.
class PlanCache {
 public:
  fftw_plan get(int d, int N, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(d, N, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t n = d == 1 ? std::size_t(N) : std::size_t(N) * N;
    auto* buf = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = d == 1 ? fftw_plan_dft_1d(N, buf, buf, sign, flags) : fftw_plan_dft_2d(N, N, buf, buf, sign, flags);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void fft_inplace(const TorusSpec& spec, std::span<std::complex<double>> data, int sign) {
  require_size(spec, data.size(), "fft");
  fftw_plan p = plan_cache().get(spec.d, spec.N, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
}

}  // namespace detail

namespace {
thread_local double g_discarded_imag = 0.0;
}

double last_discarded_imaginary() { return g_discarded_imag; }

double integrate(const TorusSpec& spec, std::span<const double> f) {
  detail::require_size(spec, f.size(), "integrate");
  double sum = 0.0;
  for (double v : f) sum += v;
  return sum * spec.cell_volume();
}

SpectralField forward_transform_complex(const TorusSpec& spec, std::span<const std::complex<double>> f) {
  detail::require_size(spec, f.size(), "forward_transform");
  SpectralField out{spec, ComplexField(f.begin(), f.end())};
  detail::fft_inplace(spec, out.coeffs, -1);
  const double w = spec.cell_volume();
  for (auto& c : out.coeffs) c *= w;
  return out;
}

SpectralField forward_transform(const TorusSpec& spec, std::span<const double> f) {
  detail::require_size(spec, f.size(), "forward_transform");
  ComplexField buf(f.size());
  std::transform(f.begin(), f.end(), buf.begin(), [](double x) { return std::complex<double>(x, 0.0); });
  SpectralField out{spec, std::move(buf)};
  detail::fft_inplace(spec, out.coeffs, -1);
  const double w = spec.cell_volume();
  for (auto& c : out.coeffs) c *= w;
  return out;
}

ComplexField inverse_transform_complex(const SpectralField& fhat) {
  detail::require_size(fhat.spec, fhat.coeffs.size(), "inverse_transform");
  ComplexField buf = fhat.coeffs;
  detail::fft_inplace(fhat.spec, buf, +1);
  const double w = 1.0 / fhat.spec.volume();
  for (auto& c : buf) c *= w;
  return buf;
}

Field inverse_transform(const SpectralField& fhat) {
  ComplexField buf = inverse_transform_complex(fhat);
  Field out(buf.size());
  double imag = 0.0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    out[i] = buf[i].real();
    imag = std::max(imag, std::abs(buf[i].imag()));
  }
  g_discarded_imag = imag;
  return out;
}

Field convolve_periodic(const TorusSpec& spec, std::span<const double> f, std::span<const double> g) {
  SpectralField fh = forward_transform(spec, f);
  const SpectralField gh = forward_transform(spec, g);
  for (std::size_t i = 0; i < fh.coeffs.size(); ++i) fh[i] *= gh[i];
  return inverse_transform(fh);
}

}  // namespace mckv
