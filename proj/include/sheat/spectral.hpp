#pragma once

#include "sheat/geometry.hpp"

#include <memory>
#include <vector>

namespace sheat {

/// Sine transforms on antisymmetric axes (DST-I), on symmetric axes with
/// Dirichlet walls at ±L (DST-II/III), real DFT on periodic axes.
/// Plans are created once; apply() is safe to call concurrently.
class SpectralPlan {
 public:
  explicit SpectralPlan(const GridSpec& grid);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  Eigen::ArrayXd apply(double t, const Eigen::ArrayXd& v) const;
  /// Wavenumbers along one axis in transform order.
  const Eigen::ArrayXd& wavenumbers(int axis) const { return k_[axis]; }

 private:
  struct AxisPlans;
  GridSpec grid_;
  std::vector<Eigen::ArrayXd> k_;
  std::vector<double> norm_;
  std::vector<std::unique_ptr<AxisPlans>> plans_;
};

}  // namespace sheat
