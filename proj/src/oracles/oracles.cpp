#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mckv/error.hpp"

namespace mckv::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

void require_transform_budget(const TorusSpec& spec) {
  if (spec.N > kBudget.max_transform_N)
    throw Error(ErrorCode::BudgetExceeded, "transform oracle limited to N <= " + std::to_string(kBudget.max_transform_N));
}

void require_pair_budget(const TorusSpec& spec) {
  const int cap = spec.d == 1 ? kBudget.max_pair_N_1d : kBudget.max_pair_N_2d;
  if (spec.N > cap) throw Error(ErrorCode::BudgetExceeded, "pair-sum oracle limited to N <= " + std::to_string(cap));
}

int signed_mode(int i, int N) { return i < N / 2 ? i : i - N; }

std::array<int, 2> multi(const TorusSpec& spec, std::size_t flat) {
  if (spec.d == 1) return {int(flat), 0};
  return {int(flat / spec.N), int(flat % spec.N)};
}

std::size_t flat_of(const TorusSpec& spec, int i, int j) {
  const int N = spec.N;
  i = ((i % N) + N) % N;
  if (spec.d == 1) return std::size_t(i);
  j = ((j % N) + N) % N;
  return std::size_t(i) * N + std::size_t(j);
}

// Phase 2 pi (m . i) / N reduced exactly in integers.
double phase(const TorusSpec& spec, std::array<int, 2> m, std::array<int, 2> i) {
  const long N = spec.N;
  const long p = ((long(m[0]) * i[0] + long(m[1]) * i[1]) % N + N) % N;
  return 2.0 * kPi * double(p) / double(N);
}

template <class F>
double integrate_pieces(F f, const std::vector<double>& cuts) {
  double acc = 0.0;
  double prev = 0.0;
  for (double c : cuts) {
    if (c <= prev) continue;
    acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, prev, c, 15, kBudget.quadrature_tol);
    prev = c;
  }
  return acc;
}

std::vector<double> kernel_samples(const TorusSpec& spec, const PotentialSpec& pot, Kernel kernel) {
  std::vector<double> K(spec.size());
  if (kernel == Kernel::PointSampled) {
    for (std::size_t f = 0; f < K.size(); ++f) {
      const auto i = multi(spec, f);
      double r2 = 0.0;
      for (int a = 0; a < spec.d; ++a) {
        double x = i[a] * spec.h();
        if (x > 0.5 * spec.L) x -= spec.L;
        r2 += x * x;
      }
      K[f] = pot.value(std::sqrt(r2));
    }
    return K;
  }
  std::vector<double> vh(spec.size());
  for (std::size_t f = 0; f < vh.size(); ++f) {
    const auto i = multi(spec, f);
    const double kx = 2.0 * kPi * signed_mode(i[0], spec.N) / spec.L;
    const double ky = spec.d == 2 ? 2.0 * kPi * signed_mode(i[1], spec.N) / spec.L : 0.0;
    vh[f] = spectrum(pot, std::hypot(kx, ky), spec.d);
  }
  for (std::size_t x = 0; x < K.size(); ++x) {
    const auto ix = multi(spec, x);
    double acc = 0.0;
    for (std::size_t f = 0; f < vh.size(); ++f) {
      const auto mf = multi(spec, f);
      acc += vh[f] * std::cos(phase(spec, {signed_mode(mf[0], spec.N), spec.d == 2 ? signed_mode(mf[1], spec.N) : 0}, ix));
    }
    K[x] = acc / spec.volume();
  }
  return K;
}

}  // namespace

ComplexField dft(const TorusSpec& spec, std::span<const double> f) {
  require_transform_budget(spec);
  detail::require_size(spec, f.size(), "oracle dft");
  ComplexField out(spec.size());
  for (std::size_t kf = 0; kf < out.size(); ++kf) {
    const auto m = multi(spec, kf);
    std::complex<double> acc = 0.0;
    for (std::size_t xf = 0; xf < f.size(); ++xf) acc += f[xf] * std::polar(1.0, -phase(spec, m, multi(spec, xf)));
    out[kf] = acc * spec.cell_volume();
  }
  return out;
}

ComplexField inverse_dft(const TorusSpec& spec, std::span<const std::complex<double>> fhat) {
  require_transform_budget(spec);
  detail::require_size(spec, fhat.size(), "oracle inverse dft");
  ComplexField out(spec.size());
  for (std::size_t xf = 0; xf < out.size(); ++xf) {
    const auto i = multi(spec, xf);
    std::complex<double> acc = 0.0;
    for (std::size_t kf = 0; kf < fhat.size(); ++kf) acc += fhat[kf] * std::polar(1.0, phase(spec, multi(spec, kf), i));
    out[xf] = acc / spec.volume();
  }
  return out;
}

Field convolution(const TorusSpec& spec, std::span<const double> f, std::span<const double> g) {
  require_pair_budget(spec);
  detail::require_size(spec, f.size(), "oracle convolution");
  detail::require_size(spec, g.size(), "oracle convolution");
  Field out(spec.size(), 0.0);
  for (std::size_t xf = 0; xf < out.size(); ++xf) {
    const auto x = multi(spec, xf);
    double acc = 0.0;
    for (std::size_t yf = 0; yf < g.size(); ++yf) {
      const auto y = multi(spec, yf);
      acc += f[flat_of(spec, x[0] - y[0], x[1] - y[1])] * g[yf];
    }
    out[xf] = acc * spec.cell_volume();
  }
  return out;
}

double spectrum(const PotentialSpec& pot, double k, int d) {
  std::vector<double> cuts = pot.breakpoints();
  if (d == 1) {
    return 2.0 * integrate_pieces([&](double r) { return pot.value(r) * std::cos(k * r); }, cuts);
  }
  if (d != 2) throw Error(ErrorCode::UnsupportedDimension, "oracle spectrum supports d = 1, 2");
  auto angular = [&](double r) {
    if (k * r == 0.0) return 2.0 * kPi;
    // Integrate over [0, pi] and double; the integrand is even about pi.
    const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double phi) { return std::cos(k * r * std::cos(phi)); }, 0.0, kPi, 15, kBudget.quadrature_tol);
    return 2.0 * half;
  };
  return integrate_pieces([&](double r) { return r * pot.value(r) * angular(r); }, cuts);
}

double energy(const DensityField& a, const DensityField& b, const PotentialSpec& pot, Kernel kernel) {
  const TorusSpec& spec = a.spec();
  if (!(spec == b.spec())) throw Error(ErrorCode::SpecMismatch, "oracle energy needs a shared torus");
  require_pair_budget(spec);
  if (kernel == Kernel::BandLimited) require_transform_budget(spec);
  const std::vector<double> K = kernel_samples(spec, pot, kernel);
  double acc = 0.0;
  for (std::size_t xf = 0; xf < spec.size(); ++xf) {
    const auto x = multi(spec, xf);
    double row = 0.0;
    for (std::size_t yf = 0; yf < spec.size(); ++yf) {
      const auto y = multi(spec, yf);
      row += K[flat_of(spec, x[0] - y[0], x[1] - y[1])] * b[yf];
    }
    acc += a[xf] * row;
  }
  const double w = spec.cell_volume();
  return acc * w * w;
}

double two_point_K(const PotentialSpec& pot, const TorusSpec& spec) {
  require_pair_budget(spec);
  const std::vector<double> K = kernel_samples(spec, pot, Kernel::PointSampled);
  const double v0 = K[0];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t xf = 0; xf < spec.size(); ++xf) {
    const auto x = multi(spec, xf);
    for (std::size_t yf = 0; yf < spec.size(); ++yf) {
      const auto y = multi(spec, yf);
      const double vxy = K[flat_of(spec, x[0] - y[0], x[1] - y[1])];
      for (int j = 0; j <= 100; ++j) {
        const double w = j / 100.0;
        best = std::min(best, (w * w + (1.0 - w) * (1.0 - w)) * v0 + 2.0 * w * (1.0 - w) * vxy);
      }
    }
  }
  return best;
}

SimplexMinimum simplex_K(const PotentialSpec& pot, const TorusSpec& spec) {
  const int n = int(spec.size());
  if (n > kBudget.max_simplex_cells)
    throw Error(ErrorCode::BudgetExceeded, "simplex oracle limited to " + std::to_string(kBudget.max_simplex_cells) + " cells");
  const std::vector<double> K = kernel_samples(spec, pot, Kernel::PointSampled);
  auto q = [&](int x, int y) {
    const auto a = multi(spec, std::size_t(x));
    const auto b = multi(spec, std::size_t(y));
    return K[flat_of(spec, a[0] - b[0], a[1] - b[1])];
  };
  SimplexMinimum best{std::numeric_limits<double>::infinity(), 0};
  std::vector<int> S;
  std::vector<double> A;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    S.clear();
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) S.push_back(i);
    }
    const int m = int(S.size());
    const int dim = m + 1;
    // unknowns (w_S, mu); rows Q_S w - mu 1 = 0 and 1^T w = 1
    A.assign(std::size_t(dim) * (dim + 1), 0.0);
    auto at = [&](int r, int c) -> double& { return A[std::size_t(r) * (dim + 1) + c]; };
    double scale = 1.0;
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        at(r, c) = q(S[r], S[c]);
        scale = std::max(scale, std::abs(at(r, c)));
      }
      at(r, m) = -1.0;
    }
    for (int c = 0; c < m; ++c) at(m, c) = 1.0;
    at(m, dim) = 1.0;
    bool singular = false;
    for (int col = 0; col < dim && !singular; ++col) {
      int piv = col;
      for (int r = col + 1; r < dim; ++r) {
        if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
      }
      if (std::abs(at(piv, col)) < 1e-12 * scale) {
        singular = true;
        break;
      }
      if (piv != col) {
        for (int c = 0; c <= dim; ++c) std::swap(at(piv, c), at(col, c));
      }
      for (int r = 0; r < dim; ++r) {
        if (r == col) continue;
        const double f = at(r, col) / at(col, col);
        if (f == 0.0) continue;
        for (int c = col; c <= dim; ++c) at(r, c) -= f * at(col, c);
      }
    }
    // singular faces carry a value-preserving direction to a smaller support
    if (singular) continue;
    bool feasible = true;
    for (int r = 0; r < m; ++r) {
      if (at(r, dim) / at(r, r) <= 0.0) feasible = false;
    }
    if (!feasible) continue;
    const double mu = at(m, dim) / at(m, m);
    if (mu < best.value) best = {mu, m};
  }
  return best;
}

}  // namespace mckv::oracle
