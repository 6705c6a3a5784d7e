#include "sheat/log.hpp"
#include "sheat/quadrature.hpp"
#include "sheat/semigroup.hpp"
#include "sheat/spectral.hpp"
#include "sheat/tensor.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace sheat {

std::string to_string(HeatMethod m) {
  switch (m) {
    case HeatMethod::quadrature: return "quadrature";
    case HeatMethod::spectral: return "spectral";
    case HeatMethod::dilation_fast_path: return "dilation_fast_path";
  }
  return "?";
}

HeatMethod heat_method_from_string(const std::string& s) {
  if (s == "quadrature") return HeatMethod::quadrature;
  if (s == "spectral") return HeatMethod::spectral;
  if (s == "dilation_fast_path") return HeatMethod::dilation_fast_path;
  throw std::invalid_argument("unknown heat method '" + s + "'");
}

KernelPlan::KernelPlan(SectorSpec spec, GridSpec grid, HeatMethod method, QuadratureOptions quad)
    : spec_(spec), grid_(std::move(grid)), method_(method), quad_(quad) {
  spec_.validate();
  grid_.validate(spec_);
  spectral_ = std::make_shared<const SpectralPlan>(grid_);
}

namespace {

constexpr double inv_sqrt_pi = 0.56418958354775628695;

struct HatKernel {
  double t, h, rt;
  // Heat kernel on the line integrated against the unit hat of half-width h
  // centred at 0, evaluated at offset c.
  double operator()(double c) const {
    c = -std::abs(c);
    return (G2(c + h) - 2.0 * G2(c) + G2(c - h)) / h;
  }
  double G2(double z) const {
    double G1 = 0.5 * std::erfc(-z / (2.0 * rt));
    double g = std::exp(-z * z / (4.0 * t)) * 0.5 * inv_sqrt_pi / rt;
    return z * G1 + 2.0 * t * g;
  }
};

int default_hermite_points(int N) {
  switch (N) {
    case 1: return 32;
    case 2: return 24;
    default: return 16;
  }
}

}  // namespace

Eigen::MatrixXd hat_kernel_matrix(const GridSpec& grid, int axis, double t) {
  if (!(t > 0.0)) throw std::domain_error("heat kernel needs t > 0");
  const int n = grid.n;
  const double h = grid.spacing(axis);
  const HatKernel H{t, h, std::sqrt(t)};
  Eigen::ArrayXd x = grid.nodes(axis);
  Eigen::MatrixXd M(n, n);
  switch (grid.axes[axis]) {
    case AxisKind::antisymmetric:
      for (int a = 0; a < n; ++a)
        for (int b = 0; b <= a; ++b)
          M(a, b) = M(b, a) = std::max(0.0, H(x[a] - x[b]) - H(x[a] + x[b]));
      break;
    case AxisKind::symmetric:
      for (int a = 0; a < n; ++a)
        for (int b = 0; b <= a; ++b) M(a, b) = M(b, a) = H(x[a] - x[b]);
      break;
    case AxisKind::periodic: {
      const double P = 2.0 * grid.L;
      const int images = static_cast<int>(std::ceil((14.0 * std::sqrt(t) + h) / P)) + 1;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b <= a; ++b) {
          double s = 0.0;
          for (int k = -images; k <= images; ++k) s += H(x[a] - x[b] + k * P);
          M(a, b) = M(b, a) = s;
        }
      break;
    }
  }
  return M;
}

double truncation_mass(const GridSpec& grid, double t) {
  double mass = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    if (grid.axes[a] == AxisKind::periodic) continue;
    double edge = grid.L - std::abs(grid.node(a, grid.n - 1));
    mass += 0.5 * std::erfc(edge / (2.0 * std::sqrt(t)));
  }
  return mass;
}

Field apply_kernel(const KernelPlan& plan, double t, const Field& f) {
  const auto& g = f.grid();
  if (!(g == plan.grid())) throw std::invalid_argument("apply_kernel: field grid differs from plan grid");
  if (!(t > 0.0)) throw std::domain_error("apply_kernel needs t > 0");
  const double sup = f.sup_norm();
  if (sup > 0.0) {
    // Escape mass weighted by how much of the field sits near the box edge.
    double worst = 0.0;
    for (Eigen::Index i = 0; i < f.values().size(); ++i) {
      if (f.values()[i] == 0.0) continue;
      Point x = g.point(i);
      double m = 0.0;
      for (int a = 0; a < g.dim(); ++a)
        if (g.axes[a] != AxisKind::periodic)
          m += 0.5 * std::erfc((g.L - std::abs(x[a])) / (2.0 * std::sqrt(t)));
      worst = std::max(worst, m * std::abs(f.values()[i]) / sup);
    }
    if (worst > plan.quadrature().tail_tolerance)
      log().warn("apply_kernel: box truncation mass {:.2e} exceeds tolerance at t={}", worst, t);
  }
  Eigen::ArrayXd v = f.values();
  auto ext = g.extents();
  for (int a = 0; a < g.dim(); ++a) v = apply_along_axis<double>(hat_kernel_matrix(g, a, t), v, ext, a);
  return Field(f.spec(), g, std::move(v), t);
}

namespace {

struct AxisRule {
  Rule<double> rule;  // physical nodes
  bool antisym;
};

AxisRule near_rule(AxisKind kind, double s, const QuadratureOptions& q) {
  Rule<double> half = graded_half_line<double>(q.near_radius + q.window, q.dyadic_levels, q.cell,
                                               q.q_dyadic, q.q_uniform);
  AxisRule r{kind == AxisKind::antisymmetric ? half : mirrored(half), kind == AxisKind::antisymmetric};
  r.rule.x *= s;
  r.rule.w *= s;
  return r;
}

// Row i: weight_q · axis kernel(x_i, y_q) at time t.
Eigen::MatrixXd point_kernel(const Eigen::ArrayXd& x, const AxisRule& r, double t) {
  const double c = 0.5 * inv_sqrt_pi / std::sqrt(t);
  Eigen::MatrixXd K(x.size(), r.rule.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index q = 0; q < r.rule.size(); ++q) {
      double y = r.rule.x[q];
      double d = x[i] - y;
      double g = c * std::exp(-d * d / (4.0 * t));
      if (r.antisym) g *= -std::expm1(-x[i] * y / t);
      K(i, q) = r.rule.w[q] * g;
    }
  return K;
}

// Σ over the rule tensor of Π_a K_a(·, q_a) f(y_q), for target coordinate
// lists xs (one per axis). Streams the first axis in chunks.
Eigen::ArrayXd contract_profile(const SingularProfile& f, const std::vector<Eigen::ArrayXd>& xs,
                                const std::vector<AxisRule>& rules, double t) {
  const int N = static_cast<int>(xs.size());
  std::vector<Eigen::MatrixXd> K;
  for (int a = 0; a < N; ++a) K.push_back(point_kernel(xs[a], rules[a], t));
  Eigen::Index rest_rule = 1, rest_out = 1;
  for (int a = 1; a < N; ++a) {
    rest_rule *= rules[a].rule.size();
    rest_out *= xs[a].size();
  }
  const Eigen::Index Q0 = rules[0].rule.size();
  const Eigen::Index chunk = std::max<Eigen::Index>(1, std::min<Eigen::Index>(Q0, (1 << 22) / rest_rule));
  RowMajorMatrix<double> out = RowMajorMatrix<double>::Zero(xs[0].size(), rest_out);
  Point y{0.0, 0.0, 0.0};
  for (Eigen::Index c0 = 0; c0 < Q0; c0 += chunk) {
    const Eigen::Index B = std::min(chunk, Q0 - c0);
    Eigen::ArrayXd F(B * rest_rule);
    for (Eigen::Index i = 0; i < F.size(); ++i) {
      Eigen::Index rem = i;
      for (int a = N - 1; a >= 1; --a) {
        Eigen::Index qa = rem % rules[a].rule.size();
        rem /= rules[a].rule.size();
        y[a] = rules[a].rule.x[qa];
      }
      y[0] = rules[0].rule.x[c0 + rem];
      F[i] = f.extended(std::span<const double>(y.data(), N));
    }
    std::vector<Eigen::Index> ext{B};
    for (int a = 1; a < N; ++a) ext.push_back(rules[a].rule.size());
    for (int a = 1; a < N; ++a) {
      F = apply_along_axis<double>(K[a], F, ext, a);
      ext[a] = xs[a].size();
    }
    Eigen::Map<const RowMajorMatrix<double>> Fm(F.data(), B, rest_out);
    out.noalias() += K[0].middleCols(c0, B) * Fm;
  }
  return Eigen::Map<const Eigen::ArrayXd>(out.data(), out.size());
}

double hermite_value(const SingularProfile& f, const Point& x, double t, const Rule<double>& gh, int N) {
  const double s2 = 2.0 * std::sqrt(t);
  const Eigen::Index Q = gh.size();
  Eigen::Index total = 1;
  for (int a = 0; a < N; ++a) total *= Q;
  double acc = 0.0;
  Point y{0.0, 0.0, 0.0};
  for (Eigen::Index i = 0; i < total; ++i) {
    Eigen::Index rem = i;
    double w = 1.0;
    for (int a = N - 1; a >= 0; --a) {
      Eigen::Index q = rem % Q;
      rem /= Q;
      y[a] = x[a] + s2 * gh.x[q];
      w *= gh.w[q];
    }
    acc += w * f.extended(std::span<const double>(y.data(), N));
  }
  return acc * std::pow(std::numbers::pi, -0.5 * N);
}

// Point value for N = 3, where the tensor of graded axis rules is too large.
// Dyadic cube shells [−ρ_k, ρ_k]^N \ [−ρ_k/2, ρ_k/2]^N around the origin plus
// uniform cells of width ρ = cell·√t inside the window around x; cells are
// restricted to y_a > 0 on anti-symmetric axes.
double cube_shell_value(const SectorSpec& spec, const SingularProfile& f, double t, const Point& x,
                        const QuadratureOptions& q) {
  const int N = spec.N;
  const double s = std::sqrt(t);
  const double rho = q.cell * s;
  const double c = 0.5 * inv_sqrt_pi / s;
  auto kernel = [&](int a, double y) {
    double d = x[a] - y;
    double g = c * std::exp(-d * d / (4.0 * t));
    if (a < spec.m) g *= -std::expm1(-x[a] * y / t);
    return g;
  };
  const Rule<double> gd = gauss_legendre<double>(q.q_dyadic);
  const Rule<double> gu = gauss_legendre<double>(q.q_uniform);

  // Σ over the tensor rule of the box with lower corner lo and side w.
  std::array<std::vector<double>, 3> ky, yy;
  auto box = [&](const std::array<double, 3>& lo, double w, const Rule<double>& r) {
    const Eigen::Index Q = r.size();
    for (int a = 0; a < N; ++a) {
      ky[a].resize(Q);
      yy[a].resize(Q);
      for (Eigen::Index i = 0; i < Q; ++i) {
        yy[a][i] = lo[a] + 0.5 * w * (r.x[i] + 1.0);
        ky[a][i] = 0.5 * w * r.w[i] * kernel(a, yy[a][i]);
      }
    }
    Eigen::Index total = 1;
    for (int a = 0; a < N; ++a) total *= Q;
    double acc = 0.0;
    Point y{0.0, 0.0, 0.0};
    for (Eigen::Index i = 0; i < total; ++i) {
      Eigen::Index rem = i;
      double wk = 1.0;
      for (int a = N - 1; a >= 0; --a) {
        Eigen::Index k = rem % Q;
        rem /= Q;
        y[a] = yy[a][k];
        wk *= ky[a][k];
      }
      if (wk != 0.0) acc += wk * f.extended(std::span<const double>(y.data(), N));
    }
    return acc;
  };

  double total = 0.0;
  const double w = q.window * s;
  std::array<int, 3> klo{}, khi{};
  for (int a = 0; a < N; ++a) {
    klo[a] = static_cast<int>(std::floor((x[a] - w) / rho));
    khi[a] = static_cast<int>(std::ceil((x[a] + w) / rho)) - 1;
    if (a < spec.m) klo[a] = std::max(klo[a], 0);
  }
  std::array<int, 3> k{};
  std::function<void(int)> cells = [&](int a) {
    if (a == N) {
      bool inner = true;
      for (int b = 0; b < N; ++b) inner = inner && (k[b] == 0 || k[b] == -1);
      if (inner) return;
      std::array<double, 3> lo{};
      for (int b = 0; b < N; ++b) lo[b] = k[b] * rho;
      total += box(lo, rho, gu);
      return;
    }
    for (k[a] = klo[a]; k[a] <= khi[a]; ++k[a]) cells(a + 1);
  };
  cells(0);

  bool near_origin = true;
  for (int a = 0; a < N; ++a) near_origin = near_origin && std::abs(x[a]) <= w + rho;
  if (!near_origin) return total;
  for (int lev = 0; lev < q.dyadic_levels; ++lev) {
    const double r = rho * std::ldexp(1.0, -lev);
    const double side = 0.5 * r;
    std::array<int, 3> j{};
    std::function<void(int)> shell = [&](int a) {
      if (a == N) {
        bool inner = true;
        for (int b = 0; b < N; ++b) inner = inner && (j[b] == 0 || j[b] == -1);
        if (inner) return;
        std::array<double, 3> lo{};
        for (int b = 0; b < N; ++b) lo[b] = j[b] * side;
        total += box(lo, side, gd);
        return;
      }
      for (j[a] = a < spec.m ? 0 : -2; j[a] <= 1; ++j[a]) shell(a + 1);
    };
    shell(0);
  }
  return total;
}

}  // namespace

Field apply_kernel(const KernelPlan& plan, double t, const SingularProfile& f) {
  if (!(t > 0.0)) throw std::domain_error("apply_kernel needs t > 0");
  const auto& g = plan.grid();
  const auto& q = plan.quadrature();
  const int N = g.dim();
  const int n = g.n;
  for (auto k : g.axes)
    if (k == AxisKind::periodic) throw std::invalid_argument("profiles live on R^N; periodic axes unsupported");
  if (!(f.spec() == plan.spec())) throw std::invalid_argument("apply_kernel: profile spec differs from plan");
  if (N == 3) {
    Eigen::ArrayXd v(g.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = heat_at(plan.spec(), f, t, g.point(i), q);
    return Field(plan.spec(), g, std::move(v), t);
  }
  const double s = std::sqrt(t);
  const double R = q.near_radius * s;

  std::vector<int> lo(N, n), hi(N, -1);
  for (int a = 0; a < N; ++a)
    for (int k = 0; k < n; ++k)
      if (std::abs(g.node(a, k)) <= R) {
        lo[a] = std::min(lo[a], k);
        hi[a] = std::max(hi[a], k);
      }
  bool have_near = true;
  for (int a = 0; a < N; ++a) have_near = have_near && hi[a] >= lo[a];

  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(g.size());
  auto in_near = [&](Eigen::Index flat) {
    if (!have_near) return false;
    for (int a = N - 1; a >= 0; --a) {
      int k = static_cast<int>(flat % n);
      flat /= n;
      if (k < lo[a] || k > hi[a]) return false;
    }
    return true;
  };

  if (have_near) {
    std::vector<Eigen::ArrayXd> xs;
    std::vector<AxisRule> rules;
    for (int a = 0; a < N; ++a) {
      xs.push_back(g.nodes(a).segment(lo[a], hi[a] - lo[a] + 1));
      rules.push_back(near_rule(g.axes[a], s, q));
    }
    Eigen::ArrayXd near = contract_profile(f, xs, rules, t);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (in_near(i)) v[i] = near[k++];
  }
  const int Q = q.hermite_points > 0 ? q.hermite_points : default_hermite_points(N);
  Rule<double> gh = gauss_hermite<double>(Q);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!in_near(i)) v[i] = hermite_value(f, g.point(i), t, gh, N);
  return Field(plan.spec(), g, std::move(v), t);
}

double heat_at(const SectorSpec& spec, const SingularProfile& f, double t, const Point& x,
               const QuadratureOptions& q) {
  if (!(t > 0.0)) throw std::domain_error("heat_at needs t > 0");
  const int N = spec.N;
  const double s = std::sqrt(t);
  double xmax = 0.0;
  for (int a = 0; a < N; ++a) xmax = std::max(xmax, std::abs(x[a]));
  if (xmax > q.near_radius * s) {
    const int Q = q.hermite_points > 0 ? q.hermite_points : default_hermite_points(N);
    return hermite_value(f, x, t, gauss_hermite<double>(Q), N);
  }
  if (N == 3) return cube_shell_value(spec, f, t, x, q);
  std::vector<Eigen::ArrayXd> xs;
  std::vector<AxisRule> rules;
  for (int a = 0; a < N; ++a) {
    xs.push_back(Eigen::ArrayXd::Constant(1, x[a]));
    rules.push_back(near_rule(a < spec.m ? AxisKind::antisymmetric : AxisKind::symmetric, s, q));
  }
  return contract_profile(f, xs, rules, t)[0];
}

Field apply_spectral(const KernelPlan& plan, double t, const Field& f) {
  if (!(f.grid() == plan.grid())) throw std::invalid_argument("apply_spectral: field grid differs from plan grid");
  if (t < 0.0) throw std::domain_error("apply_spectral needs t >= 0");
  return Field(f.spec(), f.grid(), plan.spectral().apply(t, f.values()), t);
}

Field apply(const KernelPlan& plan, double t, const Field& f) {
  return plan.method() == HeatMethod::quadrature ? apply_kernel(plan, t, f) : apply_spectral(plan, t, f);
}

RefinedPeak refined_peak(const Field& f) {
  const auto& g = f.grid();
  const auto& v = f.values();
  Eigen::Index imax = 0;
  v.abs().maxCoeff(&imax);
  const double sgn = v[imax] < 0.0 ? -1.0 : 1.0;
  const double f0 = sgn * v[imax];
  const int N = g.dim();
  const int n = g.n;
  RefinedPeak r{f0, g.point(imax)};
  Eigen::Index stride = 1;
  Eigen::Index rem = imax;
  for (int a = N - 1; a >= 0; --a) {
    const int k = static_cast<int>(rem % n);
    rem /= n;
    bool ok = k < n - 1 && (k > 0 || g.axes[a] == AxisKind::antisymmetric);
    if (ok) {
      const double fm = k == 0 ? 0.0 : sgn * v[imax - stride];
      const double fp = sgn * v[imax + stride];
      const double curv = fm - 2.0 * f0 + fp;
      if (curv < 0.0) {
        r.value -= (fm - fp) * (fm - fp) / (8.0 * curv);
        r.point[a] += g.spacing(a) * (fm - fp) / (2.0 * curv);
      }
    }
    stride *= n;
  }
  return r;
}

double refined_sup(const Field& f) { return refined_peak(f).value; }

}  // namespace sheat
