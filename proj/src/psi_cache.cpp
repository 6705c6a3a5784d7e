#include "sheat/log.hpp"
#include "sheat/semigroup.hpp"

#include <cmath>
#include <stdexcept>

namespace sheat {

double psi_tail_series(const SectorSpec& spec, const Point& y) {
  const int N = spec.N;
  const double r2 = y[0] * y[0] + (N > 1 ? y[1] * y[1] : 0.0) + (N > 2 ? y[2] * y[2] : 0.0);
  const double base = eval_psi0(spec, std::span<const double>(y.data(), N));
  // Δ^k ψ0 / k! = ψ0 · c_k · r^{−2k}
  double term = 1.0, sum = 1.0, prev = 1.0;
  for (int k = 0; k < 40; ++k) {
    term *= (spec.gamma + 2.0 * spec.m + 2.0 * k) * (spec.gamma + 2.0 * k + 2.0 - N) / ((k + 1) * r2);
    if (std::abs(term) >= std::abs(prev) || std::abs(term) < 1e-17 * std::abs(sum)) {
      if (std::abs(term) < std::abs(prev)) sum += term;
      break;
    }
    sum += term;
    prev = term;
  }
  return base * sum;
}

double PsiCache::E_at(const Point& y) const {
  if (auto v = interpolate(grid, E, y)) return *v;
  return psi_tail_series(spec, y);
}

double PsiCache::psi_at(double t, const Point& x) const {
  const double s = std::sqrt(t);
  Point y{x[0] / s, x[1] / s, x[2] / s};
  return std::pow(t, -0.5 * spec.homogeneity()) * E_at(y);
}

PsiCache build_psi_cache(const SectorSpec& spec, const PsiCacheOptions& options) {
  spec.validate();
  if (!(options.radius > 2.0) || !(options.h > 0.0)) throw std::invalid_argument("bad cache options");
  PsiCache c;
  c.spec = spec;
  c.options = options;
  const bool all_anti = spec.m == spec.N;
  const int n = all_anti ? static_cast<int>(std::lround(options.radius / options.h)) - 1
                         : static_cast<int>(std::lround(2.0 * options.radius / options.h));
  c.grid = GridSpec::for_sector(spec, options.radius, n);
  KernelPlan plan(spec, c.grid, HeatMethod::quadrature, options.quad);
  SingularProfile psi0(spec, ProfileDescriptor{});
  Field E = apply_kernel(plan, 1.0, psi0);
  if (E.values().minCoeff() <= 0.0)
    throw std::runtime_error("psi cache: E is not positive on the sector; quadrature failed");
  c.E = E.values();
  // The vertex is off by O(h²), so the value there is off by O(h⁴).
  c.C_inf = heat_at(spec, psi0, 1.0, refined_peak(E).point, options.quad);
  log().info("psi cache built: N={} m={} gamma={} n={} C_inf={:.10g}", spec.N, spec.m, spec.gamma, n, c.C_inf);
  return c;
}

Field psi_fast(const PsiCache& cache, double t, const GridSpec& grid) {
  if (!(t > 0.0)) throw std::domain_error("psi_fast needs t > 0");
  Eigen::ArrayXd v(grid.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cache.psi_at(t, grid.point(i));
  return Field(cache.spec, grid, std::move(v), t);
}

double alpha_time_integral(const SectorSpec& spec, double C_inf, double T) {
  if (!spec.subcritical())
    throw std::domain_error("the integral of ||Psi(s)||^alpha diverges at s=0 when alpha >= 2/(gamma+m)");
  if (T < 0.0) throw std::domain_error("alpha_time_integral needs T >= 0");
  const double b = spec.beta();
  return std::pow(C_inf, spec.alpha) * std::pow(T, 1.0 - b) / (1.0 - b);
}

double alpha_time_integral(const PsiCache& cache, double T) {
  return alpha_time_integral(cache.spec, cache.C_inf, T);
}

}  // namespace sheat
