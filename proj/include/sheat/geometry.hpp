#pragma once

#include <Eigen/Core>

#include <array>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sheat {

class SingularProfile;

constexpr int max_dim = 3;
using Point = std::array<double, max_dim>;

/// Standing parameters of u_t = Δu + a|u|^α u on the sector {x_1..x_m > 0}.
struct SectorSpec {
  int N = 1;
  int m = 0;
  double gamma = 0.5;
  double alpha = 1.0;
  int sign_a = 1;

  void validate() const;

  double homogeneity() const { return gamma + m; }
  double critical_alpha() const { return 2.0 / (gamma + m); }
  bool subcritical() const { return alpha < critical_alpha(); }
  bool critical() const;
  // (1/α − (γ+m)/2)^{-1}; infinite at the critical power.
  double sigma() const;
  // α(γ+m)/2, the exponent of the Duhamel time singularity.
  double beta() const { return alpha * (gamma + m) / 2.0; }
  bool type_one_regime() const { return (N - 2) * alpha < 4.0; }

  bool operator==(const SectorSpec&) const = default;
};

enum class AxisKind { antisymmetric, symmetric, periodic };

std::string to_string(AxisKind k);
AxisKind axis_kind_from_string(const std::string& s);

/// Tensor grid over the box (−L, L)^N ∩ Ω. Axis 0 is the slowest index.
struct GridSpec {
  double L = 10.0;
  int n = 128;
  std::vector<AxisKind> axes;

  static GridSpec for_sector(const SectorSpec& spec, double L, int n);

  void validate(const SectorSpec& spec) const;

  int dim() const { return static_cast<int>(axes.size()); }
  Eigen::Index size() const;
  std::vector<Eigen::Index> extents() const;
  double spacing(int axis) const;
  double node(int axis, int k) const;
  Eigen::ArrayXd nodes(int axis) const;
  Point point(Eigen::Index flat) const;
  double min_spacing() const;

  bool operator==(const GridSpec&) const = default;
};

/// Values on a GridSpec. Immutable once built.
class Field {
 public:
  Field(SectorSpec spec, GridSpec grid, Eigen::ArrayXd values,
        std::optional<double> time_tag = std::nullopt,
        std::shared_ptr<const SingularProfile> origin = nullptr);

  const SectorSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  const Eigen::ArrayXd& values() const { return values_; }
  std::optional<double> time_tag() const { return time_tag_; }
  const std::shared_ptr<const SingularProfile>& origin() const { return origin_; }

  double sup_norm() const { return values_.abs().maxCoeff(); }
  bool nonnegative() const;

  Field with_values(Eigen::ArrayXd v, std::optional<double> t = std::nullopt) const;

 private:
  SectorSpec spec_;
  GridSpec grid_;
  Eigen::ArrayXd values_;
  std::optional<double> time_tag_;
  std::shared_ptr<const SingularProfile> origin_;
};

/// Values on an arbitrary tensor product of coordinate vectors.
struct BoxArray {
  std::vector<Eigen::ArrayXd> coords;
  Eigen::ArrayXd values;

  std::vector<Eigen::Index> extents() const;
};

Field sample(const SectorSpec& spec, const GridSpec& grid,
             const std::shared_ptr<const SingularProfile>& profile);

/// Odd reflection across x_i = 0 for i < m. Anti-symmetric axes become
/// 2n-point axes {−x_{n-1}, …, −x_0, x_0, …, x_{n-1}}.
BoxArray extend_antisym(const Field& f);

/// Inverse of extend_antisym on a grid of the matching shape.
Field restrict_to_sector(const BoxArray& full, const SectorSpec& spec, const GridSpec& grid);

/// x ↦ f(λx) by multilinear interpolation. Out-of-box targets use the
/// originating profile if the field carries one, otherwise 0. Logs a
/// warning when more than 10% of targets leave the box.
Field dilate(const Field& f, double lam, double* outside_fraction = nullptr);

/// Multilinear interpolation of grid values at y; nullopt outside the
/// node hull (the wall of an antisymmetric axis counts as a zero node).
std::optional<double> interpolate(const GridSpec& g, const Eigen::ArrayXd& v, const Point& y);

/// max |f|/g over nodes; throws if g has a non-positive node.
double weighted_sup_ratio(const Field& f, const Field& g);

/// Σ |f| · cell volume over nodes with r_in < |x| < r_out.
double grid_l1(const Field& f, double r_in = 0.0,
               double r_out = std::numeric_limits<double>::infinity());

double norm2(std::span<const double> x);

}  // namespace sheat
