#include "mckv/potential.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mckv/error.hpp"
#include "mckv/free_energy.hpp"
#include "mckv/solver.hpp"

namespace mckv {

namespace {

constexpr double kPi = std::numbers::pi;

double ball_volume(double r, int d) { return d == 1 ? 2.0 * r : kPi * r * r; }

// \int_{|x| <= r} e^{-ik.x} dx for the d-ball.
double ball_transform(double r, double k, int d) {
  if (r <= 0.0) return 0.0;
  if (k == 0.0) return ball_volume(r, d);
  if (d == 1) return 2.0 * std::sin(k * r) / k;
  return 2.0 * kPi * r * std::cyl_bessel_j(1.0, k * r) / k;
}

// Radial integral of (alpha + beta r) times the d-dimensional plane-wave
// kernel over r0 < |x| <= r1.
double linear_segment_transform(double r0, double r1, double alpha, double beta, double k, int d) {
  if (d == 1) {
    if (k == 0.0) return 2.0 * (alpha * (r1 - r0) + 0.5 * beta * (r1 * r1 - r0 * r0));
    auto prim = [&](double r) {
      return (alpha + beta * r) * std::sin(k * r) / k + beta * std::cos(k * r) / (k * k);
    };
    return 2.0 * (prim(r1) - prim(r0));
  }
  if (k == 0.0) {
    return 2.0 * kPi * (0.5 * alpha * (r1 * r1 - r0 * r0) + beta * (r1 * r1 * r1 - r0 * r0 * r0) / 3.0);
  }
  // Composite Gauss-Legendre with panels short against the oscillation.
  const int panels = std::max(1, int(std::ceil(k * (r1 - r0) / 0.5)));
  const double w = (r1 - r0) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = r0 + p * w;
    acc += boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double r) { return r * (alpha + beta * r) * std::cyl_bessel_j(0.0, k * r); }, a, a + w);
  }
  return 2.0 * kPi * acc;
}

}  // namespace

PotentialSpec PotentialSpec::shells(std::vector<Shell> shells, std::optional<double> range) {
  if (shells.empty()) throw Error(ErrorCode::InvalidPotential, "shell list is empty");
  double prev = 0.0;
  for (const auto& s : shells) {
    if (!(s.radius > prev)) throw Error(ErrorCode::InvalidPotential, "shell radii must be positive and strictly increasing");
    if (!std::isfinite(s.value)) throw Error(ErrorCode::InvalidPotential, "shell values must be finite");
    prev = s.radius;
  }
  PotentialSpec p;
  p.kind_ = Kind::Shells;
  p.shells_ = std::move(shells);
  p.range_ = range.value_or(prev);
  if (p.range_ < prev) throw Error(ErrorCode::InvalidPotential, "range is smaller than the outermost shell");
  return p;
}

PotentialSpec PotentialSpec::table(std::vector<RadialKnot> knots, std::optional<double> range) {
  if (knots.size() < 2) throw Error(ErrorCode::InvalidPotential, "table needs at least two knots");
  if (knots.front().r != 0.0) throw Error(ErrorCode::InvalidPotential, "table must start at r = 0");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].r > knots[i - 1].r)) throw Error(ErrorCode::InvalidPotential, "table radii must increase strictly");
  }
  for (const auto& k : knots) {
    if (!std::isfinite(k.value)) throw Error(ErrorCode::InvalidPotential, "table values must be finite");
  }
  PotentialSpec p;
  p.kind_ = Kind::Table;
  p.knots_ = std::move(knots);
  p.range_ = range.value_or(p.knots_.back().r);
  if (p.range_ < p.knots_.back().r) throw Error(ErrorCode::InvalidPotential, "range is smaller than the last knot");
  return p;
}

PotentialSpec PotentialSpec::zero(double range) { return shells({{range, 0.0}}); }

double PotentialSpec::value(double r) const {
  r = std::abs(r);
  if (kind_ == Kind::Shells) {
    for (const auto& s : shells_) {
      if (r <= s.radius) return s.value;
    }
    return 0.0;
  }
  if (r > knots_.back().r) return 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), r, [](double x, const RadialKnot& k) { return x < k.r; });
  if (it == knots_.end()) return knots_.back().value;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (r - lo.r) / (hi.r - lo.r);
  return lo.value + t * (hi.value - lo.value);
}

double PotentialSpec::transform(double k, int d) const {
  k = std::abs(k);
  double acc = 0.0;
  if (kind_ == Kind::Shells) {
    double prev = 0.0;
    for (const auto& s : shells_) {
      acc += s.value * (ball_transform(s.radius, k, d) - ball_transform(prev, k, d));
      prev = s.radius;
    }
    return acc;
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    const auto& a = knots_[i - 1];
    const auto& b = knots_[i];
    const double beta = (b.value - a.value) / (b.r - a.r);
    const double alpha = a.value - beta * a.r;
    acc += linear_segment_transform(a.r, b.r, alpha, beta, k, d);
  }
  return acc;
}

double PotentialSpec::integral(int d) const { return transform(0.0, d); }

double PotentialSpec::ball_integral(double r, int d) const {
  double acc = 0.0;
  if (kind_ == Kind::Shells) {
    double prev = 0.0;
    for (const auto& s : shells_) {
      if (prev >= r) break;
      const double outer = std::min(s.radius, r);
      acc += s.value * (ball_volume(outer, d) - ball_volume(prev, d));
      prev = s.radius;
    }
    return acc;
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    const auto& a = knots_[i - 1];
    const auto& b = knots_[i];
    if (a.r >= r) break;
    const double beta = (b.value - a.value) / (b.r - a.r);
    const double alpha = a.value - beta * a.r;
    acc += linear_segment_transform(a.r, std::min(b.r, r), alpha, beta, 0.0, d);
  }
  return acc;
}

double PotentialSpec::max_abs() const {
  double m = 0.0;
  if (kind_ == Kind::Shells) {
    for (const auto& s : shells_) m = std::max(m, std::abs(s.value));
  } else {
    for (const auto& k : knots_) m = std::max(m, std::abs(k.value));
  }
  return m;
}

double PotentialSpec::lower_bound_constant() const {
  double lo = 0.0;
  if (kind_ == Kind::Shells) {
    for (const auto& s : shells_) lo = std::min(lo, s.value);
  } else {
    for (const auto& k : knots_) lo = std::min(lo, k.value);
  }
  return -lo;
}

std::vector<double> PotentialSpec::breakpoints() const {
  std::vector<double> out;
  if (kind_ == Kind::Shells) {
    for (const auto& s : shells_) out.push_back(s.radius);
  } else {
    for (const auto& k : knots_) {
      if (k.r > 0.0) out.push_back(k.r);
    }
  }
  if (range_ > out.back()) out.push_back(range_);
  return out;
}

PotentialSpec PotentialSpec::scaled(double c) const {
  PotentialSpec p = *this;
  for (auto& s : p.shells_) s.value *= c;
  for (auto& k : p.knots_) k.value *= c;
  return p;
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::Shells) {
    os << "shells";
    for (const auto& s : shells_) os << ' ' << s.radius << ':' << s.value;
  } else {
    os << "table";
    for (const auto& k : knots_) os << ' ' << k.r << ':' << k.value;
  }
  os << " range " << range_;
  return os.str();
}

Field sample_potential(const TorusSpec& spec, const PotentialSpec& pot) {
  Field out(spec.size());
  auto image = [&](double x) { return x > 0.5 * spec.L ? x - spec.L : x; };
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto p = spec.point(i);
    const double x = image(p[0]);
    const double y = spec.d == 2 ? image(p[1]) : 0.0;
    out[i] = pot.value(std::sqrt(x * x + y * y));
  }
  return out;
}

bool PotentialAnalysis::has_negative_mode() const { return std::isfinite(theta_sharp); }

PotentialAnalysis analyze(const TorusSpec& spec, const PotentialSpec& pot) {
  if (pot.range() >= spec.L)
    throw Error(ErrorCode::RangeExceedsTorus, "range " + std::to_string(pot.range()) + " >= L = " + std::to_string(spec.L));
  PotentialAnalysis a;
  a.spec = spec;
  a.potential = pot;
  a.v = pot.integral(spec.d);
  a.v_max = pot.max_abs();
  a.v0 = pot.lower_bound_constant();
  a.spectrum = SpectralField{spec, ComplexField(spec.size())};
  a.vhat.resize(spec.size());
  a.min_vhat_all = std::numeric_limits<double>::infinity();

  bool have = false;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const WaveVector w = wave_vector(spec, i);
    const double vh = pot.transform(w.norm(), spec.d);
    a.vhat[i] = vh;
    a.spectrum[i] = {vh, 0.0};
    a.min_vhat_all = std::min(a.min_vhat_all, vh);
    if (w.is_zero() || is_nyquist(spec, w)) continue;
    if (!have) {
      a.k_sharp = w;
      a.vhat_sharp = vh;
      have = true;
      continue;
    }
    const double tie = 1e-12 * std::max(1.0, std::abs(a.vhat_sharp));
    const long m2 = long(w.m[0]) * w.m[0] + long(w.m[1]) * w.m[1];
    const long s2 = long(a.k_sharp.m[0]) * a.k_sharp.m[0] + long(a.k_sharp.m[1]) * a.k_sharp.m[1];
    const bool better = vh < a.vhat_sharp - tie ||
                        (std::abs(vh - a.vhat_sharp) <= tie && (m2 < s2 || (m2 == s2 && w.m < a.k_sharp.m)));
    if (better) {
      a.k_sharp = w;
      a.vhat_sharp = vh;
    }
  }
  a.theta_sharp = a.vhat_sharp < 0.0 ? 1.0 / std::abs(a.vhat_sharp) : std::numeric_limits<double>::infinity();
  return a;
}

std::string to_string(StabilityClass::Kind kind) {
  switch (kind) {
    case StabilityClass::Kind::PositiveType: return "PositiveType";
    case StabilityClass::Kind::ConditionKStable: return "ConditionKStable";
    case StabilityClass::Kind::CatastrophicTPZa: return "CatastrophicTPZa";
    case StabilityClass::Kind::CatastrophicTPZb: return "CatastrophicTPZb";
    case StabilityClass::Kind::CatastrophicNumeric: return "CatastrophicNumeric";
    case StabilityClass::Kind::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

std::optional<double> tpz_b_core_radius(const PotentialSpec& pot, int d) {
  // For a ball of radius a0 and a core of radius rc < a0 where V integrates
  // (positive part) to c0, with V <= -v0 on rc < |x| <= 2 a0, the ball
  // self-energy is at most c0 / |B(a0)| - v0 (1 - (rc / a0)^d).
  const auto cuts = pot.breakpoints();
  std::optional<double> best;
  double best_margin = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double rc = cuts[i];
    double c0 = 0.0;
    {
      // positive part of V over the core
      const int samples = 2000;
      double prev = 0.0;
      for (int s = 1; s <= samples; ++s) {
        const double r = rc * s / samples;
        const double vmid = pot.value(0.5 * (prev + r));
        if (vmid > 0) c0 += vmid * ((d == 1 ? 2.0 * r : kPi * r * r) - (d == 1 ? 2.0 * prev : kPi * prev * prev));
        prev = r;
      }
    }
    double vmax_tail = -std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < cuts.size(); ++j) {
      // V on (cuts[j-1], cuts[j]]
      const double lo = cuts[j - 1];
      const double hi = cuts[j];
      vmax_tail = std::max({vmax_tail, pot.value(hi), pot.value(std::nextafter(lo, hi))});
      if (pot.kind() == PotentialSpec::Kind::Table) vmax_tail = std::max(vmax_tail, pot.value(0.5 * (lo + hi)));
      const double v0 = -vmax_tail;
      if (!(v0 > 0.0)) break;
      const double a0 = 0.5 * hi;
      if (!(rc < a0)) continue;
      const double margin = v0 * (1.0 - std::pow(rc / a0, d)) - c0 / ball_volume(a0, d);
      if (margin > best_margin) {
        best_margin = margin;
        best = a0;
      }
    }
  }
  return best;
}

StabilityClass classify_stability(const PotentialAnalysis& analysis, const StabilityOptions& options) {
  StabilityClass out;
  const int d = analysis.spec.d;
  const double tol_spec = options.tol_spec_factor * analysis.v_max;
  if (analysis.min_vhat_all >= -tol_spec) {
    out.kind = StabilityClass::Kind::PositiveType;
    out.detail = "spectrum nonnegative";
    return out;
  }
  if (analysis.v < 0.0) {
    out.kind = StabilityClass::Kind::CatastrophicTPZa;
    out.detail = "negative integral";
    return out;
  }
  if (auto a0 = tpz_b_core_radius(analysis.potential, d)) {
    out.kind = StabilityClass::Kind::CatastrophicTPZb;
    out.detail = "core/ring bound, ball radius " + std::to_string(*a0);
    return out;
  }
  const double a = analysis.potential.range();
  const TorusSpec ck_spec = build_grid(d, 4.0 * a, options.condition_k_points);
  const ConditionKResult ck =
      condition_k_minimize(ck_spec, analysis.potential, options.tol_K, options.condition_k_max_iter);
  out.value = ck.value;
  if (ck.value < -options.tol_K) {
    // A negative value is a certificate whether or not the gap closed.
    out.kind = StabilityClass::Kind::CatastrophicNumeric;
    out.certificate = ck.certificate.values();
    out.certificate_spec = ck_spec;
    out.detail = "numeric quadratic-form minimum " + std::to_string(ck.value);
  } else if (ck.converged) {
    out.kind = StabilityClass::Kind::ConditionKStable;
    out.detail = "numeric quadratic-form minimum " + std::to_string(ck.value);
  } else {
    out.kind = StabilityClass::Kind::Inconclusive;
    out.detail = "quadratic-form minimization did not converge (gap " + std::to_string(ck.gap) + ")";
  }
  return out;
}

CatastrophicDensity catastrophic_density(const TorusSpec& spec, const PotentialSpec& pot) {
  const PotentialAnalysis analysis = analyze(spec, pot);
  const double a = pot.range();
  std::vector<double> radii;
  StabilityClass::Kind criterion;
  if (analysis.min_vhat_all >= -1e-10 * analysis.v_max) {
    throw Error(ErrorCode::NotCatastrophic, "potential is of positive type");
  }
  if (analysis.v < 0.0) {
    criterion = StabilityClass::Kind::CatastrophicTPZa;
    for (double ell : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) radii.push_back(ell * a);
  } else if (auto a0 = tpz_b_core_radius(pot, spec.d)) {
    criterion = StabilityClass::Kind::CatastrophicTPZb;
    radii.push_back(*a0);
  } else {
    throw Error(ErrorCode::NotCatastrophic, "neither the integral nor the core/ring criterion applies");
  }
  for (double r : radii) {
    if (!(2.0 * r < spec.L)) break;
    DensityField rho = ball_density(spec, r);
    const double e = interaction_energy(rho, rho, analysis);
    if (e < 0.0) return CatastrophicDensity{std::move(rho), -e, r, criterion};
  }
  throw Error(ErrorCode::NotCatastrophic, "no ball density with negative self-energy fits on this torus");
}

}  // namespace mckv
