#include "mckv/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mckv/error.hpp"
#include "mckv/potential.hpp"

namespace mckv {

DensityField::DensityField(TorusSpec spec, Field values) : spec_(spec), values_(std::move(values)) {
  detail::require_size(spec_, values_.size(), "density");
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidDensity, "density values must be finite and nonnegative");
  }
  const double m = mass();
  if (std::abs(m - 1.0) > 1e-10) throw Error(ErrorCode::InvalidDensity, "mass " + std::to_string(m) + " differs from 1");
}

DensityField DensityField::normalized(TorusSpec spec, Field values) {
  detail::require_size(spec, values.size(), "density");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidDensity, "density values must be finite and nonnegative");
  }
  const double m = integrate(spec, values);
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidDensity, "density has zero mass");
  for (double& v : values) v /= m;
  return DensityField(spec, std::move(values));
}

double DensityField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double DensityField::max() const { return *std::max_element(values_.begin(), values_.end()); }

Perturbation perturbation_of(const DensityField& rho) {
  const TorusSpec& spec = rho.spec();
  Perturbation p;
  p.spec = spec;
  p.eta.resize(rho.size());
  p.eta_plus.resize(rho.size());
  p.eta_minus.resize(rho.size());
  const double vol = spec.volume();
  const double rho0 = 1.0 / vol;
  double l1 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    p.eta[i] = rho[i] * vol - 1.0;
    p.eta_plus[i] = std::max(p.eta[i], 0.0);
    p.eta_minus[i] = std::max(-p.eta[i], 0.0);
    l1 += std::abs(rho[i] - rho0);
  }
  p.h = l1 * spec.cell_volume();
  return p;
}

DensityField uniform(const TorusSpec& spec) { return DensityField(spec, Field(spec.size(), 1.0 / spec.volume())); }

DensityField plane_wave_trial(const TorusSpec& spec, const WaveVector& k, double eps, double phi) {
  if (std::abs(eps) >= 1.0) throw Error(ErrorCode::AmplitudeTooLarge, "plane-wave amplitude must satisfy |eps| < 1");
  const double rho0 = 1.0 / spec.volume();
  Field v(spec.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = spec.point(i);
    v[i] = rho0 * (1.0 + eps * std::cos(k.k[0] * x[0] + k.k[1] * x[1] + phi));
  }
  return DensityField::normalized(spec, std::move(v));
}

ClosingTriple find_closing_triple(const PotentialAnalysis& analysis) {
  const TorusSpec& spec = analysis.spec;
  if (spec.d != 2) throw Error(ErrorCode::NoClosingTriple, "three-wave triads need d = 2");
  if (!analysis.has_negative_mode()) throw Error(ErrorCode::NoClosingTriple, "spectrum has no negative mode");
  const WaveVector ks = analysis.k_sharp;
  const double m0x = ks.m[0];
  const double m0y = ks.m[1];
  const double rx = std::cos(2.0 * std::numbers::pi / 3.0);
  const double ry = std::sin(2.0 * std::numbers::pi / 3.0);
  const double tx = rx * m0x - ry * m0y;
  const double ty = ry * m0x + rx * m0y;
  const int half = spec.N / 2;
  const int radius = 3 + int(0.3 * std::hypot(m0x, m0y));

  auto angle_deg = [](double ax, double ay, double bx, double by) {
    const double c = (ax * bx + ay * by) / (std::hypot(ax, ay) * std::hypot(bx, by));
    return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  };

  bool found = false;
  ClosingTriple best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int dx = -radius; dx <= radius; ++dx) {
    for (int dy = -radius; dy <= radius; ++dy) {
      const std::array<int, 2> m1{int(std::lround(tx)) + dx, int(std::lround(ty)) + dy};
      const std::array<int, 2> m2{-ks.m[0] - m1[0], -ks.m[1] - m1[1]};
      bool ok = true;
      for (int c : {m1[0], m1[1], m2[0], m2[1]}) ok = ok && std::abs(c) < half;
      if (!ok || (m1[0] == 0 && m1[1] == 0) || (m2[0] == 0 && m2[1] == 0)) continue;
      // Each pair of the triad should be 120 degrees apart.
      const double e1 = std::abs(angle_deg(m0x, m0y, m1[0], m1[1]) - 120.0);
      const double e2 = std::abs(angle_deg(m0x, m0y, m2[0], m2[1]) - 120.0);
      const double e3 = std::abs(angle_deg(m1[0], m1[1], m2[0], m2[1]) - 120.0);
      const double err = std::max({e1, e2, e3});
      if (err > 15.0) continue;
      const WaveVector k1 = make_wave_vector(spec, m1);
      const WaveVector k2 = make_wave_vector(spec, m2);
      const double v1 = analysis.vhat[mode_index(spec, m1)];
      const double v2 = analysis.vhat[mode_index(spec, m2)];
      const double sigma = std::max(std::abs(v1 - analysis.vhat_sharp), std::abs(v2 - analysis.vhat_sharp));
      const double score = sigma + 1e-9 * err;
      if (score < best_score) {
        best_score = score;
        best = ClosingTriple{{ks, k1, k2}, sigma, err};
        found = true;
      }
    }
  }
  if (!found) throw Error(ErrorCode::NoClosingTriple, "no lattice triad within 15 degrees of the hexagonal directions");
  return best;
}

Field three_wave_profile(const TorusSpec& spec, const ClosingTriple& triple, std::array<double, 3> phases) {
  Field eta(spec.size(), 0.0);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const auto x = spec.point(i);
    for (int j = 0; j < 3; ++j) {
      const auto& k = triple.modes[j].k;
      eta[i] += std::cos(k[0] * x[0] + k[1] * x[1] + phases[j]);
    }
  }
  return eta;
}

ThreeWaveTrial three_wave_trial(const TorusSpec& spec, const PotentialAnalysis& analysis, double eps,
                                std::array<double, 3> phases) {
  if (!(spec == analysis.spec)) throw Error(ErrorCode::SpecMismatch, "analysis was computed on a different torus");
  if (std::abs(eps) >= 1.0 / 3.0) throw Error(ErrorCode::AmplitudeTooLarge, "three-wave amplitude must satisfy |eps| < 1/3");
  ClosingTriple triple = find_closing_triple(analysis);
  Field eta = three_wave_profile(spec, triple, phases);
  const double rho0 = 1.0 / spec.volume();
  for (double& v : eta) v = rho0 * (1.0 + eps * v);
  return {DensityField::normalized(spec, std::move(eta)), triple};
}

DensityField periodic_extension(const DensityField& rho, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "extension factor must be at least 2");
  const TorusSpec& s = rho.spec();
  const TorusSpec big = build_grid(s.d, n * s.L, n * s.N);
  Field v(big.size());
  const double scale = s.d == 1 ? 1.0 / n : 1.0 / (double(n) * n);
  if (s.d == 1) {
    for (int i = 0; i < big.N; ++i) v[i] = scale * rho[i % s.N];
  } else {
    for (int i = 0; i < big.N; ++i) {
      for (int j = 0; j < big.N; ++j) v[std::size_t(i) * big.N + j] = scale * rho[std::size_t(i % s.N) * s.N + (j % s.N)];
    }
  }
  return DensityField::normalized(big, std::move(v));
}

DensityField ball_density(const TorusSpec& spec, double radius, std::array<double, 2> center) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
  if (!(2.0 * radius < spec.L)) throw Error(ErrorCode::BallExceedsTorus, "ball diameter must be below L");
  auto image = [&](double x) {
    x = std::fmod(x, spec.L);
    if (x < 0) x += spec.L;
    return x > 0.5 * spec.L ? x - spec.L : x;
  };
  Field v(spec.size(), 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = spec.point(i);
    const double dx = image(p[0] - center[0]);
    const double dy = spec.d == 2 ? image(p[1] - center[1]) : 0.0;
    if (dx * dx + dy * dy <= radius * radius * (1.0 + 1e-12)) {
      v[i] = 1.0;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "ball contains no grid point");
  return DensityField::normalized(spec, std::move(v));
}

double distance(const DensityField& a, const DensityField& b, Norm norm) {
  if (!(a.spec() == b.spec())) throw Error(ErrorCode::SpecMismatch, "densities live on different tori");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    switch (norm) {
      case Norm::L1: acc += d; break;
      case Norm::L2: acc += d * d; break;
      case Norm::Linf: acc = std::max(acc, d); break;
    }
  }
  if (norm == Norm::L1) return acc * a.spec().cell_volume();
  if (norm == Norm::L2) return std::sqrt(acc * a.spec().cell_volume());
  return acc;
}

}  // namespace mckv
