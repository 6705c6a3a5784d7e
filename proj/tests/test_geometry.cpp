#include "sheat/geometry.hpp"
#include "sheat/profiles.hpp"

#include <doctest.h>

#include <cmath>

using namespace sheat;

TEST_CASE("sector exponents") {
  SectorSpec s{1, 1, 0.5, 0.5, 1};
  CHECK(s.homogeneity() == doctest::Approx(1.5));
  CHECK(s.critical_alpha() == doctest::Approx(4.0 / 3.0));
  CHECK(s.subcritical());
  // 1/α − (γ+m)/2 = 2 − 0.75
  CHECK(s.sigma() == doctest::Approx(0.8));
  CHECK(s.beta() == doctest::Approx(0.375));

  SectorSpec c{1, 0, 0.5, 4.0, 1};
  CHECK(c.critical());
  CHECK(std::isinf(c.sigma()));

  SectorSpec sup{2, 1, 1.0, 2.0, 1};
  CHECK(sup.sigma() == doctest::Approx(-2.0));
  CHECK_FALSE(sup.subcritical());
}

TEST_CASE("sector validation") {
  CHECK_THROWS(SectorSpec{1, 0, 1.5, 1.0, 1}.validate());
  CHECK_THROWS(SectorSpec{2, 3, 0.5, 1.0, 1}.validate());
  CHECK_THROWS(SectorSpec{1, 0, 0.5, -1.0, 1}.validate());
  CHECK_THROWS(SectorSpec{1, 0, 0.5, 1.0, 0}.validate());
  CHECK_NOTHROW(SectorSpec{3, 3, 0.5, 1.0, -1}.validate());
}

TEST_CASE("grid nodes") {
  SectorSpec s{2, 1, 1.0, 0.5, 1};
  GridSpec g = GridSpec::for_sector(s, 4.0, 8);
  CHECK(g.axes[0] == AxisKind::antisymmetric);
  CHECK(g.axes[1] == AxisKind::symmetric);
  CHECK(g.size() == 64);
  // antisymmetric: (k+1)L/(n+1); symmetric: cell centres of (−L, L)
  CHECK(g.node(0, 0) == doctest::Approx(4.0 / 9.0));
  CHECK(g.node(0, 7) == doctest::Approx(32.0 / 9.0));
  CHECK(g.node(1, 0) == doctest::Approx(-3.5));
  CHECK(g.node(1, 7) == doctest::Approx(3.5));
  Point p = g.point(8 * 3 + 5);
  CHECK(p[0] == doctest::Approx(g.node(0, 3)));
  CHECK(p[1] == doctest::Approx(g.node(1, 5)));
  CHECK(g.min_spacing() == doctest::Approx(4.0 / 9.0));
}

TEST_CASE("grid rejects inconsistent axes") {
  SectorSpec s{2, 1, 1.0, 0.5, 1};
  GridSpec g = GridSpec::for_sector(s, 4.0, 8);
  g.axes[1] = AxisKind::antisymmetric;
  CHECK_THROWS(g.validate(s));
  g.axes = {AxisKind::antisymmetric};
  CHECK_THROWS(g.validate(s));
}

TEST_CASE("field rejects non-finite values") {
  SectorSpec s{1, 1, 0.5, 0.5, 1};
  GridSpec g = GridSpec::for_sector(s, 4.0, 4);
  Eigen::ArrayXd v = Eigen::ArrayXd::Ones(4);
  v[2] = std::nan("");
  CHECK_THROWS(Field(s, g, v));
  CHECK_THROWS(Field(s, g, Eigen::ArrayXd::Ones(5)));
}

TEST_CASE("anti-symmetric extension round trip") {
  SectorSpec s{2, 2, 0.5, 0.5, 1};
  GridSpec g = GridSpec::for_sector(s, 3.0, 5);
  Eigen::ArrayXd v(g.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
  Field f(s, g, v);
  BoxArray full = extend_antisym(f);
  REQUIRE(full.coords.size() == 2);
  CHECK(full.coords[0].size() == 10);
  CHECK(full.values.size() == 100);
  // (−x, y) = −(x, y), (−x, −y) = (x, y)
  auto at = [&](int i, int j) { return full.values[i * 10 + j]; };
  CHECK(at(5, 5) == doctest::Approx(v[0]));
  CHECK(at(4, 5) == doctest::Approx(-v[0]));
  CHECK(at(4, 4) == doctest::Approx(v[0]));
  CHECK(at(0, 9) == doctest::Approx(-v[4 * 5 + 4]));
  Field back = restrict_to_sector(full, s, g);
  CHECK((back.values() - v).abs().maxCoeff() == 0.0);
}

TEST_CASE("multilinear interpolation is exact on affine data") {
  SectorSpec s{2, 1, 1.0, 0.5, 1};
  GridSpec g = GridSpec::for_sector(s, 2.0, 6);
  Eigen::ArrayXd v(g.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Point x = g.point(i);
    v[i] = x[0] * (2.0 - 0.5 * x[1]);
  }
  auto y = interpolate(g, v, Point{0.73, -0.41, 0.0});
  REQUIRE(y);
  CHECK(*y == doctest::Approx(0.73 * (2.0 + 0.5 * 0.41)).epsilon(1e-12));
  // Between the wall (value 0) and the first node.
  auto w = interpolate(g, v, Point{0.1, 0.0, 0.0});
  REQUIRE(w);
  CHECK(*w == doctest::Approx(0.1 * 2.0).epsilon(1e-12));
  CHECK_FALSE(interpolate(g, v, Point{1.99, 0.0, 0.0}));
}

TEST_CASE("periodic interpolation wraps") {
  SectorSpec s{1, 0, 0.5, 1.0, 1};
  GridSpec g = GridSpec::for_sector(s, 1.0, 4);
  g.axes[0] = AxisKind::periodic;
  Eigen::ArrayXd v(4);
  v << 1.0, 2.0, 3.0, 4.0;
  // nodes −0.75, −0.25, 0.25, 0.75; halfway between 0.75 and −0.75 + 2
  auto y = interpolate(g, v, Point{1.0, 0.0, 0.0});
  REQUIRE(y);
  CHECK(*y == doctest::Approx(2.5));
}

TEST_CASE("dilation of a linear field") {
  SectorSpec s{1, 1, 0.5, 0.5, 1};
  GridSpec g = GridSpec::for_sector(s, 10.0, 99);
  Eigen::ArrayXd v = g.nodes(0);
  Field f(s, g, v);
  double outside = 0.0;
  Field d = dilate(f, 0.5, &outside);
  CHECK(outside == 0.0);
  CHECK((d.values() - 0.5 * v).abs().maxCoeff() < 1e-12);
  Field e = dilate(f, 2.0, &outside);
  CHECK(outside == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("dilation falls back to the originating profile") {
  SectorSpec s{1, 1, 0.5, 0.5, 1};
  GridSpec g = GridSpec::for_sector(s, 4.0, 63);
  auto psi0 = std::make_shared<const SingularProfile>(s, ProfileDescriptor{});
  Field f = sample(s, g, psi0);
  Field d = dilate(f, 3.0);
  // ψ0(3x) = 3^{−1.5} ψ0(x) wherever the target leaves the box
  Eigen::Index last = g.size() - 1;
  CHECK(d.values()[last] == doctest::Approx(std::pow(3.0, -1.5) * f.values()[last]).epsilon(1e-12));
  REQUIRE(d.origin());
  CHECK(d.origin()->descriptor().dilation == doctest::Approx(3.0));
}

TEST_CASE("weighted sup ratio and grid L1") {
  SectorSpec s{1, 0, 0.5, 1.0, 1};
  GridSpec g = GridSpec::for_sector(s, 2.0, 4);
  Field one(s, g, Eigen::ArrayXd::Ones(4));
  Field two(s, g, Eigen::ArrayXd::Constant(4, 2.0));
  CHECK(weighted_sup_ratio(two, one) == doctest::Approx(2.0));
  CHECK_THROWS(weighted_sup_ratio(one, one.with_values(Eigen::ArrayXd::Zero(4))));
  // 4 cells of width 1
  CHECK(grid_l1(one) == doctest::Approx(4.0));
  // nodes ±0.5, ±1.5; only ±1.5 lie in 1 < |x| < 2
  CHECK(grid_l1(one, 1.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("field immutability helpers") {
  SectorSpec s{1, 0, 0.5, 1.0, 1};
  GridSpec g = GridSpec::for_sector(s, 2.0, 4);
  Field f(s, g, Eigen::ArrayXd::Ones(4), 0.5);
  Field h = f.with_values(Eigen::ArrayXd::Constant(4, -1.0), 1.0);
  CHECK(f.values()[0] == 1.0);
  CHECK(*f.time_tag() == 0.5);
  CHECK(*h.time_tag() == 1.0);
  CHECK(f.nonnegative());
  CHECK_FALSE(h.nonnegative());
  CHECK(h.sup_norm() == 1.0);
}
