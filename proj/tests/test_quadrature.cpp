#include "sheat/quadrature.hpp"
#include "sheat/tensor.hpp"

#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

using namespace sheat;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2q-1") {
  for (int q : {1, 4, 9}) {
    auto r = gauss_legendre(q);
    CHECK(r.w.sum() == doctest::Approx(2.0));
    for (int d = 0; d <= 2 * q - 1; ++d) {
      double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK((r.w * r.x.pow(d)).sum() == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("Gauss-Hermite moments") {
  auto r = gauss_hermite(12);
  // ∫ z^{2k} e^{−z²} = Γ(k + 1/2)
  for (int k = 0; k < 12; ++k)
    CHECK((r.w * r.x.pow(2 * k)).sum() == doctest::Approx(boost::math::tgamma(k + 0.5)).epsilon(1e-12));
  CHECK((r.w * r.x.pow(3)).sum() == doctest::Approx(0.0));
}

TEST_CASE("float rules") {
  auto r = gauss_legendre<float>(5);
  CHECK(r.w.sum() == doctest::Approx(2.0f));
}

TEST_CASE("graded half line handles an integrable singularity") {
  auto r = graded_half_line(5.0, 60, 1.0, 8, 10);
  // ∫_0^5 s^{−1/2} ds = 2√5, less the 2·2^{−30} below the finest level
  CHECK((r.w * r.x.pow(-0.5)).sum() == doctest::Approx(2.0 * std::sqrt(5.0)).epsilon(1e-9));
  CHECK(r.x.minCoeff() > 0.0);
  auto m = mirrored(r);
  CHECK((m.w * m.x.abs().pow(-0.5)).sum() == doctest::Approx(4.0 * std::sqrt(5.0)).epsilon(1e-9));
  CHECK((m.w * m.x).sum() == doctest::Approx(0.0));
}

TEST_CASE("composite rule") {
  auto r = composite<double>({{0.0, 1.0}, {1.0, 3.0}}, gauss_legendre(3));
  CHECK(r.size() == 6);
  CHECK((r.w * r.x.square()).sum() == doctest::Approx(9.0));
}

TEST_CASE("apply along axis matches explicit loops") {
  std::vector<Eigen::Index> ext{2, 3, 4};
  Eigen::ArrayXd v(24);
  for (int i = 0; i < 24; ++i) v[i] = i * 0.5 - 3.0;
  Eigen::MatrixXd op(2, 3);
  op << 1, 2, 3, -1, 0, 4;
  Eigen::ArrayXd out = apply_along_axis<double>(op, v, ext, 1);
  REQUIRE(out.size() == 16);
  for (int a = 0; a < 2; ++a)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 4; ++c) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += op(r, j) * v[(a * 3 + j) * 4 + c];
        CHECK(out[(a * 2 + r) * 4 + c] == doctest::Approx(s));
      }
  CHECK_THROWS(apply_along_axis<double>(op, v, ext, 2));

  Eigen::ArrayXd f(4);
  f << 1, 2, 3, 4;
  Eigen::ArrayXd w = v;
  scale_along_axis<double>(w, ext, 2, f);
  CHECK(w[7] == doctest::Approx(v[7] * 4));
}
