#pragma once

#include "sheat/geometry.hpp"
#include "sheat/profiles.hpp"

#include <memory>
#include <string>

namespace sheat {

enum class HeatMethod { quadrature, spectral, dilation_fast_path };

std::string to_string(HeatMethod m);
HeatMethod heat_method_from_string(const std::string& s);

/// Resolution knobs of the profile quadrature. Lengths are in units of √t.
struct QuadratureOptions {
  int dyadic_levels = 80;
  int q_dyadic = 8;
  int q_uniform = 10;
  double cell = 1.0;
  // Target nodes with |x|_∞ ≤ near_radius·√t use the graded tensor rule;
  // the rest use per-node Gauss–Hermite.
  double near_radius = 24.0;
  double window = 12.0;
  int hermite_points = 0;  // 0 picks a per-dimension default
  double tail_tolerance = 1e-8;

  bool operator==(const QuadratureOptions&) const = default;
};

class SpectralPlan;

class KernelPlan {
 public:
  KernelPlan(SectorSpec spec, GridSpec grid, HeatMethod method = HeatMethod::quadrature,
             QuadratureOptions quad = {});

  const SectorSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  HeatMethod method() const { return method_; }
  const QuadratureOptions& quadrature() const { return quad_; }
  const SpectralPlan& spectral() const { return *spectral_; }

 private:
  SectorSpec spec_;
  GridSpec grid_;
  HeatMethod method_;
  QuadratureOptions quad_;
  std::shared_ptr<const SpectralPlan> spectral_;
};

/// One-axis kernel matrix for grid data, with each source value spread
/// over its hat function and integrated exactly against the axis factor.
Eigen::MatrixXd hat_kernel_matrix(const GridSpec& grid, int axis, double t);

/// Largest Gaussian mass that leaves the box from a node at time t.
double truncation_mass(const GridSpec& grid, double t);

/// e^{tΔ_Ω} f by kernel quadrature over grid data.
Field apply_kernel(const KernelPlan& plan, double t, const Field& f);
/// e^{tΔ_Ω} f for a profile given pointwise, integrated over all of Ω.
Field apply_kernel(const KernelPlan& plan, double t, const SingularProfile& f);
/// e^{tΔ_Ω} f at one point.
double heat_at(const SectorSpec& spec, const SingularProfile& f, double t, const Point& x,
               const QuadratureOptions& quad = {});

/// e^{tΔ} with Dirichlet walls at the box, by sine/Fourier transforms.
Field apply_spectral(const KernelPlan& plan, double t, const Field& f);

/// Dispatches on plan.method(); dilation_fast_path falls back to spectral for fields.
Field apply(const KernelPlan& plan, double t, const Field& f);

/// Sup of |f| refined by a per-axis parabola through the largest node.
double refined_sup(const Field& f);
struct RefinedPeak {
  double value;
  Point point;  // parabola vertex
};
RefinedPeak refined_peak(const Field& f);

struct PsiCacheOptions {
  double radius = 12.0;
  double h = 0.04;
  QuadratureOptions quad{};

  bool operator==(const PsiCacheOptions&) const = default;
};

/// E = e^{Δ_Ω}ψ0 on a fine grid plus its sup C_∞.
struct PsiCache {
  SectorSpec spec;
  PsiCacheOptions options;
  GridSpec grid;
  Eigen::ArrayXd E;
  double C_inf = 0.0;

  /// E(y) for any y in Ω: interpolation inside the cache box, the
  /// asymptotic series E ~ Σ Δ^kψ0/k! outside.
  double E_at(const Point& y) const;
  /// Ψ(t, x) = t^{−(γ+m)/2} E(x/√t).
  double psi_at(double t, const Point& x) const;
};

PsiCache build_psi_cache(const SectorSpec& spec, const PsiCacheOptions& options = {});
Field psi_fast(const PsiCache& cache, double t, const GridSpec& grid);

/// ∫_0^T ‖Ψ(s)‖_∞^α ds in closed form.
double alpha_time_integral(const SectorSpec& spec, double C_inf, double T);
double alpha_time_integral(const PsiCache& cache, double T);

/// Ψ's leading tail series at y, used beyond the cache box.
double psi_tail_series(const SectorSpec& spec, const Point& y);

}  // namespace sheat
