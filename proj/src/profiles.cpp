#include "sheat/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sheat {

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::psi0: return "psi0";
    case ProfileKind::modulated_psi0: return "modulated_psi0";
    case ProfileKind::gaussian_derivative: return "gaussian_derivative";
    case ProfileKind::constant: return "constant";
    case ProfileKind::custom: return "custom";
  }
  return "?";
}

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "psi0") return ProfileKind::psi0;
  if (s == "modulated_psi0") return ProfileKind::modulated_psi0;
  if (s == "gaussian_derivative") return ProfileKind::gaussian_derivative;
  if (s == "constant") return ProfileKind::constant;
  if (s == "custom") return ProfileKind::custom;
  throw std::invalid_argument("unknown profile kind '" + s + "'");
}

std::string to_string(Modulation m) {
  switch (m) {
    case Modulation::none: return "none";
    case Modulation::sin2: return "sin2";
    case Modulation::blocks: return "blocks";
  }
  return "?";
}

Modulation modulation_from_string(const std::string& s) {
  if (s == "none") return Modulation::none;
  if (s == "sin2") return Modulation::sin2;
  if (s == "blocks") return Modulation::blocks;
  throw std::invalid_argument("unknown modulation '" + s + "'");
}

double psi0_constant(int m, double gamma) {
  double c = 1.0;
  for (int i = 0; i < m; ++i) c *= gamma + 2.0 * i;
  return c;
}

namespace {

void check_interior(const SectorSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) < spec.N) throw std::invalid_argument("point has too few coordinates");
  for (int i = 0; i < spec.m; ++i)
    if (!(x[i] > 0.0)) throw std::domain_error("point lies outside the open sector");
  if (norm2(x.first(spec.N)) == 0.0) throw std::domain_error("psi0 is singular at the origin");
}

double wall_product(const SectorSpec& spec, std::span<const double> x) {
  double p = 1.0;
  for (int i = 0; i < spec.m; ++i) p *= x[i];
  return p;
}

// ψ0 with |x| replaced by max(|x|, core).
double psi0_core(const SectorSpec& spec, std::span<const double> x, double core) {
  double r = std::max(norm2(x.first(spec.N)), core);
  return psi0_constant(spec.m, spec.gamma) * wall_product(spec, x) *
         std::pow(r, -spec.gamma - 2.0 * spec.m);
}

// Smooth periodic switch: 0 on even blocks, 1 on odd blocks.
double block_switch(double s, double period, double ramp) {
  double u = s / period;
  u -= 2.0 * std::floor(u / 2.0);
  auto step = [ramp](double v) {
    double z = std::clamp(v / ramp + 0.5, 0.0, 1.0);
    return z * z * (3.0 - 2.0 * z);
  };
  if (u < 0.5) return 1.0 - step(u);
  if (u < 1.5) return step(u - 1.0);
  return 1.0 - step(u - 2.0);
}

}  // namespace

double modulation_value(const ProfileDescriptor& d, double s) {
  switch (d.modulation) {
    case Modulation::none: return 1.0;
    case Modulation::sin2: {
      double v = std::sin(s);
      return v * v + d.epsilon;
    }
    case Modulation::blocks: {
      double w = block_switch(s, d.period, d.ramp);
      return d.c1 + (d.c2 - d.c1) * w;
    }
  }
  return 1.0;
}

double modulation_sup(const ProfileDescriptor& d) {
  switch (d.modulation) {
    case Modulation::none: return 1.0;
    case Modulation::sin2: return 1.0 + d.epsilon;
    case Modulation::blocks: return std::max(std::abs(d.c1), std::abs(d.c2));
  }
  return 1.0;
}

double eval_psi0(const SectorSpec& spec, std::span<const double> x) {
  check_interior(spec, x);
  return psi0_core(spec, x, 0.0);
}

double eval_gaussian_derivative(const SectorSpec& spec, double t, std::span<const double> x) {
  if (!(t > 0.0)) throw std::domain_error("gaussian derivative needs t > 0");
  double r2 = 0.0;
  for (int i = 0; i < spec.N; ++i) r2 += x[i] * x[i];
  double v = std::pow(4.0 * std::numbers::pi * t, -0.5 * spec.N) * std::exp(-r2 / (4.0 * t));
  for (int i = 0; i < spec.m; ++i) v *= x[i] / (2.0 * t);
  return v;
}

double eval_modulated(const SectorSpec& spec, const std::function<double(double)>& g,
                      const PointFn& zeta, std::span<const double> x) {
  check_interior(spec, x);
  double r = norm2(x.first(spec.N));
  double v = psi0_core(spec, x, 0.0) * g(std::log(r));
  if (zeta) {
    Point u{0.0, 0.0, 0.0};
    for (int i = 0; i < spec.N; ++i) u[i] = x[i] / r;
    v *= zeta(std::span<const double>(u.data(), spec.N));
  }
  return v;
}

SingularProfile::SingularProfile(SectorSpec spec, ProfileDescriptor d) : spec_(spec), d_(d) {
  spec_.validate();
  if (d_.kind == ProfileKind::custom && !custom_)
    throw std::invalid_argument("custom profiles are built with SingularProfile::custom");
  if (d_.kind == ProfileKind::psi0) d_.modulation = Modulation::none;
  if (d_.kind == ProfileKind::gaussian_derivative && !(d_.t0 > 0.0))
    throw std::invalid_argument("gaussian_derivative needs t0 > 0");
  if (!(d_.dilation > 0.0)) throw std::invalid_argument("profile dilation must be positive");
  if (d_.core < 0.0) throw std::invalid_argument("core radius must be nonnegative");
  if (d_.modulation == Modulation::sin2 && d_.epsilon < 0.0)
    throw std::invalid_argument("sin2 modulation needs epsilon >= 0");
  bool mod_nonneg = d_.modulation != Modulation::blocks || (d_.c1 >= 0.0 && d_.c2 >= 0.0);
  nonneg_ = d_.amplitude >= 0.0 && mod_nonneg;
}

SingularProfile SingularProfile::custom(SectorSpec spec, PointFn f, double tail_degree,
                                        double x_norm_bound, bool nonnegative, bool singular) {
  ProfileDescriptor d;
  d.kind = ProfileKind::psi0;
  SingularProfile p(spec, d);
  p.d_.kind = ProfileKind::custom;
  p.d_.tail_degree = tail_degree;
  p.custom_ = std::move(f);
  p.custom_bound_ = x_norm_bound;
  p.nonneg_ = nonnegative;
  p.custom_singular_ = singular;
  return p;
}

SingularProfile SingularProfile::compact_bump(SectorSpec spec, double amplitude, double radius) {
  auto f = [spec, radius](std::span<const double> x) {
    double r2 = 0.0;
    for (int i = 0; i < spec.N; ++i) r2 += x[i] * x[i];
    double q = 1.0 - r2 / (radius * radius);
    if (q <= 0.0) return 0.0;
    double p = q * q * q;
    for (int i = 0; i < spec.m; ++i) p *= x[i];
    return p;
  };
  // sup of bump/ψ0 is attained inside the ball; bounded by R^{γ+2m}/c.
  double bound = std::pow(radius, spec.gamma + 2.0 * spec.m) / psi0_constant(spec.m, spec.gamma);
  auto p = custom(spec, f, -std::numeric_limits<double>::infinity(), bound, true, false);
  p.d_.support = radius;
  return p.scaled(amplitude);
}

double SingularProfile::base(std::span<const double> x) const {
  const int N = spec_.N;
  Point y{0.0, 0.0, 0.0};
  for (int i = 0; i < N; ++i) y[i] = d_.dilation * x[i];
  std::span<const double> ys(y.data(), N);
  switch (d_.kind) {
    case ProfileKind::psi0:
      return psi0_core(spec_, ys, d_.core);
    case ProfileKind::modulated_psi0: {
      double r = std::max(norm2(ys), d_.core);
      double v = psi0_core(spec_, ys, d_.core) * modulation_value(d_, std::log(r) + d_.shift);
      if (zeta_) {
        Point u{0.0, 0.0, 0.0};
        double rr = norm2(ys);
        for (int i = 0; i < N; ++i) u[i] = y[i] / rr;
        v *= zeta_(std::span<const double>(u.data(), N));
      }
      return v;
    }
    case ProfileKind::gaussian_derivative:
      return eval_gaussian_derivative(spec_, d_.t0, ys);
    case ProfileKind::constant:
      return 1.0;
    case ProfileKind::custom:
      return custom_(ys);
  }
  return 0.0;
}

double SingularProfile::operator()(std::span<const double> x) const {
  for (int i = 0; i < spec_.m; ++i) {
    if (x[i] < 0.0) throw std::domain_error("point lies outside the sector");
    if (x[i] == 0.0 && d_.kind != ProfileKind::constant) return 0.0;
  }
  if (singular() && norm2(x.first(spec_.N)) == 0.0)
    throw std::domain_error("profile is singular at the origin");
  return d_.amplitude * base(x);
}

double SingularProfile::extended(std::span<const double> x) const {
  Point y{0.0, 0.0, 0.0};
  double sign = 1.0;
  for (int i = 0; i < spec_.N; ++i) {
    y[i] = x[i];
    if (i < spec_.m) {
      if (x[i] == 0.0) return 0.0;
      if (x[i] < 0.0) {
        sign = -sign;
        y[i] = -x[i];
      }
    }
  }
  return sign * (*this)(std::span<const double>(y.data(), spec_.N));
}

bool SingularProfile::singular() const {
  switch (d_.kind) {
    case ProfileKind::psi0:
    case ProfileKind::modulated_psi0: return d_.core == 0.0;
    case ProfileKind::custom: return custom_singular_;
    default: return false;
  }
}

double SingularProfile::x_norm_bound() const {
  const double A = std::abs(d_.amplitude);
  const double deg = spec_.gamma + spec_.m;
  // ψ0(μx) = μ^{−(γ+m)} ψ0(x)
  const double dil = std::pow(d_.dilation, -deg);
  switch (d_.kind) {
    case ProfileKind::psi0: return A * dil;
    case ProfileKind::modulated_psi0: return A * dil * modulation_sup(d_);
    case ProfileKind::gaussian_derivative: {
      const int N = spec_.N;
      const double t = d_.t0, b = spec_.gamma + 2.0 * spec_.m;
      double r2 = 2.0 * t * b;
      double v = std::pow(4.0 * std::numbers::pi * t, -0.5 * N) * std::exp(-r2 / (4.0 * t)) *
                 std::pow(r2, 0.5 * b) / (psi0_constant(spec_.m, spec_.gamma) * std::pow(2.0 * t, spec_.m));
      return A * dil * v;
    }
    case ProfileKind::constant: return std::numeric_limits<double>::infinity();
    case ProfileKind::custom: return A * dil * custom_bound_;
  }
  return std::numeric_limits<double>::infinity();
}

double SingularProfile::tail_degree() const {
  switch (d_.kind) {
    case ProfileKind::psi0:
    case ProfileKind::modulated_psi0: return -(spec_.gamma + spec_.m);
    case ProfileKind::gaussian_derivative: return -std::numeric_limits<double>::infinity();
    case ProfileKind::constant: return 0.0;
    case ProfileKind::custom: return d_.tail_degree;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

SingularProfile SingularProfile::scaled(double factor) const {
  SingularProfile p = *this;
  p.d_.amplitude *= factor;
  p.nonneg_ = nonneg_ && factor >= 0.0;
  return p;
}

SingularProfile SingularProfile::dilated(double mu) const {
  if (!(mu > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  SingularProfile p = *this;
  p.d_.dilation *= mu;
  return p;
}

SingularProfile SingularProfile::rescaled(double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("rescaling time must be positive");
  return dilated(1.0 / std::sqrt(tau)).scaled(std::pow(tau, -0.5 * (spec_.gamma + spec_.m)));
}

SingularProfile SingularProfile::with_zeta(PointFn zeta) const {
  SingularProfile p = *this;
  p.zeta_ = std::move(zeta);
  return p;
}

}  // namespace sheat
