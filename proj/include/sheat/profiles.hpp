#pragma once

#include "sheat/geometry.hpp"

#include <functional>
#include <span>
#include <string>

namespace sheat {

enum class ProfileKind { psi0, modulated_psi0, gaussian_derivative, constant, custom };
enum class Modulation { none, sin2, blocks };

std::string to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);
std::string to_string(Modulation m);
Modulation modulation_from_string(const std::string& s);

/// Serializable part of a profile.
///
/// modulated_psi0 evaluates A·ψ0(μx̃)·g(log|μx| + shift)·ζ(x/|x|) where
/// x̃ replaces |x| by max(|x|, core) in the radial factor. Built-in g:
///   sin2:   sin²(s) + epsilon
///   blocks: c1 on log-blocks [2kP, (2k+1)P), c2 on the others, joined
///           by smooth ramps of width ramp·P.
struct ProfileDescriptor {
  ProfileKind kind = ProfileKind::psi0;
  double amplitude = 1.0;
  Modulation modulation = Modulation::none;
  double epsilon = 0.1;
  double shift = 0.0;
  double c1 = 1.0;
  double c2 = 2.0;
  double period = 3.14159265358979323846;
  double ramp = 0.25;
  double t0 = 1.0;
  double core = 0.0;
  double dilation = 1.0;
  // Degree of homogeneity of the tail; −∞ marks compact support.
  double tail_degree = std::numeric_limits<double>::quiet_NaN();
  // Bump support radius for custom compact data built by compact_bump().
  double support = 0.0;

  bool operator==(const ProfileDescriptor&) const = default;
};

using PointFn = std::function<double(std::span<const double>)>;

class SingularProfile {
 public:
  SingularProfile(SectorSpec spec, ProfileDescriptor d);

  static SingularProfile custom(SectorSpec spec, PointFn f, double tail_degree,
                                double x_norm_bound, bool nonnegative = true, bool singular = true);
  // A·x_1⋯x_m·(1 − |x|²/R²)³ inside the ball of radius R, 0 outside.
  static SingularProfile compact_bump(SectorSpec spec, double amplitude, double radius);

  const SectorSpec& spec() const { return spec_; }
  const ProfileDescriptor& descriptor() const { return d_; }
  ProfileKind kind() const { return d_.kind; }

  /// Value on the closure of Ω; 0 on walls. Throws at the origin for
  /// profiles unbounded there.
  double operator()(std::span<const double> x) const;
  double operator()(const Point& x) const { return (*this)(std::span<const double>(x.data(), spec_.N)); }
  /// Odd extension to all of ℝ^N.
  double extended(std::span<const double> x) const;

  bool singular() const;
  bool nonnegative() const { return nonneg_; }
  /// Analytic bound on sup |f|/ψ0, infinite if f is not in X.
  double x_norm_bound() const;
  double tail_degree() const;

  SingularProfile scaled(double factor) const;
  /// x ↦ f(μx).
  SingularProfile dilated(double mu) const;
  /// τ^{−(γ+m)/2} f(x/√τ).
  SingularProfile rescaled(double tau) const;
  SingularProfile with_zeta(PointFn zeta) const;

 private:
  double base(std::span<const double> x) const;

  SectorSpec spec_;
  ProfileDescriptor d_;
  PointFn custom_;
  PointFn zeta_;
  double custom_bound_ = std::numeric_limits<double>::infinity();
  bool nonneg_ = true;
  bool custom_singular_ = true;
};

double psi0_constant(int m, double gamma);
double eval_psi0(const SectorSpec& spec, std::span<const double> x);
double eval_gaussian_derivative(const SectorSpec& spec, double t, std::span<const double> x);
double eval_modulated(const SectorSpec& spec, const std::function<double(double)>& g,
                      const PointFn& zeta, std::span<const double> x);

double modulation_value(const ProfileDescriptor& d, double s);
double modulation_sup(const ProfileDescriptor& d);

}  // namespace sheat
