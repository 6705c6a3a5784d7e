#include "sheat/geometry.hpp"

#include "sheat/log.hpp"
#include "sheat/profiles.hpp"

#include <cmath>
#include <stdexcept>

namespace sheat {

void SectorSpec::validate() const {
  if (N < 1 || N > max_dim) throw std::invalid_argument("N must be 1, 2 or 3");
  if (m < 0 || m > N) throw std::invalid_argument("m must satisfy 0 <= m <= N");
  if (!(gamma > 0.0 && gamma < N)) throw std::invalid_argument("gamma must lie in (0, N)");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (sign_a != 1 && sign_a != -1) throw std::invalid_argument("sign_a must be +1 or -1");
}

bool SectorSpec::critical() const {
  return std::abs(alpha - critical_alpha()) <= 1e-12 * std::max(1.0, alpha);
}

double SectorSpec::sigma() const {
  if (critical()) return std::numeric_limits<double>::infinity();
  return 1.0 / (1.0 / alpha - (gamma + m) / 2.0);
}

std::string to_string(AxisKind k) {
  switch (k) {
    case AxisKind::antisymmetric: return "antisymmetric";
    case AxisKind::symmetric: return "symmetric";
    case AxisKind::periodic: return "periodic";
  }
  return "?";
}

AxisKind axis_kind_from_string(const std::string& s) {
  if (s == "antisymmetric") return AxisKind::antisymmetric;
  if (s == "symmetric") return AxisKind::symmetric;
  if (s == "periodic") return AxisKind::periodic;
  throw std::invalid_argument("unknown axis kind '" + s + "'");
}

GridSpec GridSpec::for_sector(const SectorSpec& spec, double L, int n) {
  GridSpec g;
  g.L = L;
  g.n = n;
  for (int i = 0; i < spec.N; ++i)
    g.axes.push_back(i < spec.m ? AxisKind::antisymmetric : AxisKind::symmetric);
  return g;
}

void GridSpec::validate(const SectorSpec& spec) const {
  if (!(L > 0.0)) throw std::invalid_argument("grid L must be positive");
  if (n < 2) throw std::invalid_argument("grid n must be at least 2");
  if (dim() != spec.N) throw std::invalid_argument("grid has wrong number of axes");
  for (int i = 0; i < spec.N; ++i) {
    bool anti = axes[i] == AxisKind::antisymmetric;
    if (anti != (i < spec.m))
      throw std::invalid_argument("axes 0..m-1 must be antisymmetric and the rest not");
  }
}

Eigen::Index GridSpec::size() const {
  Eigen::Index s = 1;
  for (int i = 0; i < dim(); ++i) s *= n;
  return s;
}

std::vector<Eigen::Index> GridSpec::extents() const {
  return std::vector<Eigen::Index>(axes.size(), n);
}

double GridSpec::spacing(int axis) const {
  return axes[axis] == AxisKind::antisymmetric ? L / (n + 1) : 2.0 * L / n;
}

double GridSpec::node(int axis, int k) const {
  double h = spacing(axis);
  return axes[axis] == AxisKind::antisymmetric ? (k + 1) * h : -L + (k + 0.5) * h;
}

Eigen::ArrayXd GridSpec::nodes(int axis) const {
  Eigen::ArrayXd x(n);
  for (int k = 0; k < n; ++k) x[k] = node(axis, k);
  return x;
}

Point GridSpec::point(Eigen::Index flat) const {
  Point p{0.0, 0.0, 0.0};
  for (int a = dim() - 1; a >= 0; --a) {
    p[a] = node(a, static_cast<int>(flat % n));
    flat /= n;
  }
  return p;
}

double GridSpec::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim(); ++a) h = std::min(h, spacing(a));
  return h;
}

Field::Field(SectorSpec spec, GridSpec grid, Eigen::ArrayXd values, std::optional<double> time_tag,
             std::shared_ptr<const SingularProfile> origin)
    : spec_(spec), grid_(std::move(grid)), values_(std::move(values)), time_tag_(time_tag),
      origin_(std::move(origin)) {
  spec_.validate();
  grid_.validate(spec_);
  if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
  if (!values_.allFinite()) throw std::domain_error("field has non-finite values");
}

bool Field::nonnegative() const {
  double mx = values_.maxCoeff();
  return values_.minCoeff() >= -1e-12 * std::max(mx, 0.0);
}

Field Field::with_values(Eigen::ArrayXd v, std::optional<double> t) const {
  return Field(spec_, grid_, std::move(v), t, nullptr);
}

std::vector<Eigen::Index> BoxArray::extents() const {
  std::vector<Eigen::Index> e;
  for (const auto& c : coords) e.push_back(c.size());
  return e;
}

Field sample(const SectorSpec& spec, const GridSpec& grid,
             const std::shared_ptr<const SingularProfile>& profile) {
  Eigen::ArrayXd v(grid.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = (*profile)(grid.point(i));
  return Field(spec, grid, std::move(v), std::nullopt, profile);
}

BoxArray extend_antisym(const Field& f) {
  const auto& g = f.grid();
  const int N = g.dim();
  const int n = g.n;
  BoxArray out;
  std::vector<Eigen::Index> ext(N);
  for (int a = 0; a < N; ++a) {
    Eigen::ArrayXd x = g.nodes(a);
    if (g.axes[a] == AxisKind::antisymmetric) {
      Eigen::ArrayXd full(2 * n);
      full.head(n) = -x.reverse();
      full.tail(n) = x;
      out.coords.push_back(full);
    } else {
      out.coords.push_back(x);
    }
    ext[a] = out.coords.back().size();
  }
  Eigen::Index total = 1;
  for (auto e : ext) total *= e;
  out.values.resize(total);
  for (Eigen::Index i = 0; i < total; ++i) {
    Eigen::Index rem = i, src = 0, stride = 1;
    double sign = 1.0;
    for (int a = N - 1; a >= 0; --a) {
      Eigen::Index j = rem % ext[a];
      rem /= ext[a];
      Eigen::Index k = j;
      if (g.axes[a] == AxisKind::antisymmetric) {
        if (j < n) {
          k = n - 1 - j;
          sign = -sign;
        } else {
          k = j - n;
        }
      }
      src += k * stride;
      stride *= n;
    }
    out.values[i] = sign * f.values()[src];
  }
  return out;
}

Field restrict_to_sector(const BoxArray& full, const SectorSpec& spec, const GridSpec& grid) {
  grid.validate(spec);
  const int N = grid.dim();
  const int n = grid.n;
  auto ext = full.extents();
  if (static_cast<int>(ext.size()) != N) throw std::invalid_argument("box has wrong dimension");
  for (int a = 0; a < N; ++a) {
    Eigen::Index want = grid.axes[a] == AxisKind::antisymmetric ? 2 * n : n;
    if (ext[a] != want) throw std::invalid_argument("box shape does not match grid");
  }
  Eigen::ArrayXd v(grid.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Eigen::Index rem = i, src = 0, stride = 1;
    for (int a = N - 1; a >= 0; --a) {
      Eigen::Index k = rem % n;
      rem /= n;
      Eigen::Index j = grid.axes[a] == AxisKind::antisymmetric ? k + n : k;
      src += j * stride;
      stride *= ext[a];
    }
    v[i] = full.values[src];
  }
  return Field(spec, grid, std::move(v));
}

namespace {

// Locates y on one axis: lower node index and weight of the upper node.
// Index −1 stands for the wall of an antisymmetric axis (value 0).
bool locate(const GridSpec& g, int axis, double y, int& lo, double& w) {
  const int n = g.n;
  const double h = g.spacing(axis);
  switch (g.axes[axis]) {
    case AxisKind::antisymmetric: {
      if (y < 0.0 || y > n * h) return false;
      double s = y / h - 1.0;
      lo = std::min(static_cast<int>(std::floor(s)), n - 2);
      lo = std::max(lo, -1);
      w = s - lo;
      return true;
    }
    case AxisKind::symmetric: {
      double s = (y + g.L) / h - 0.5;
      if (s < 0.0 || s > n - 1) return false;
      lo = std::min(static_cast<int>(std::floor(s)), n - 2);
      w = s - lo;
      return true;
    }
    case AxisKind::periodic: {
      double P = 2.0 * g.L;
      double yy = y + g.L - 0.5 * h;
      yy -= P * std::floor(yy / P);
      double s = yy / h;
      lo = std::min(static_cast<int>(std::floor(s)), n - 1);
      w = s - lo;
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<double> interpolate(const GridSpec& g, const Eigen::ArrayXd& v, const Point& y) {
  const int N = g.dim();
  const int n = g.n;
  std::array<int, max_dim> lo{};
  std::array<double, max_dim> w{};
  for (int a = 0; a < N; ++a)
    if (!locate(g, a, y[a], lo[a], w[a])) return std::nullopt;
  double acc = 0.0;
  for (int corner = 0; corner < (1 << N); ++corner) {
    double wt = 1.0;
    Eigen::Index idx = 0;
    bool zero = false;
    for (int a = 0; a < N; ++a) {
      int bit = (corner >> a) & 1;
      int k = lo[a] + bit;
      wt *= bit ? w[a] : 1.0 - w[a];
      if (k < 0) zero = true;
      if (g.axes[a] == AxisKind::periodic) k %= n;
      idx = idx * n + std::max(k, 0);
    }
    if (!zero && wt != 0.0) acc += wt * v[idx];
  }
  return acc;
}

Field dilate(const Field& f, double lam, double* outside_fraction) {
  if (!(lam > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  const auto& g = f.grid();
  const int N = g.dim();
  const auto& prof = f.origin();
  Eigen::ArrayXd out(g.size());
  Eigen::Index outside = 0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    Point x = g.point(i);
    Point y{0.0, 0.0, 0.0};
    for (int a = 0; a < N; ++a) y[a] = lam * x[a];
    if (auto v = interpolate(g, f.values(), y)) {
      out[i] = *v;
    } else {
      ++outside;
      out[i] = prof ? (*prof)(y) : 0.0;
    }
  }
  double frac = static_cast<double>(outside) / static_cast<double>(out.size());
  if (outside_fraction) *outside_fraction = frac;
  if (frac > 0.1)
    log().warn("dilate: {:.1f}% of target nodes fall outside the source box{}", 100.0 * frac,
               prof ? " (profile tail used)" : " (set to 0)");
  std::shared_ptr<const SingularProfile> origin;
  if (prof) origin = std::make_shared<const SingularProfile>(prof->dilated(lam));
  return Field(f.spec(), g, std::move(out), f.time_tag(), origin);
}

double weighted_sup_ratio(const Field& f, const Field& g) {
  if (f.values().size() != g.values().size())
    throw std::invalid_argument("weighted_sup_ratio: fields live on different grids");
  if (g.values().minCoeff() <= 0.0)
    throw std::domain_error("weighted_sup_ratio: weight has a non-positive node");
  return (f.values().abs() / g.values()).maxCoeff();
}

double grid_l1(const Field& f, double r_in, double r_out) {
  const auto& g = f.grid();
  double vol = 1.0;
  for (int a = 0; a < g.dim(); ++a) vol *= g.spacing(a);
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.values().size(); ++i) {
    Point x = g.point(i);
    double r = norm2(std::span<const double>(x.data(), g.dim()));
    if (r > r_in && r < r_out) s += std::abs(f.values()[i]);
  }
  return s * vol;
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace sheat
