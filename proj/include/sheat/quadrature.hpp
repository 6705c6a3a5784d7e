#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sheat {

template <class Scalar>
struct Rule {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> x;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> w;

  Eigen::Index size() const { return x.size(); }
};

namespace detail {

// Golub–Welsch: nodes and first-component weights of a symmetric Jacobi matrix.
template <class Scalar>
Rule<Scalar> golub_welsch(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& offdiag, Scalar mu0) {
  const Eigen::Index q = offdiag.size() + 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> J =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(q, q);
  for (Eigen::Index i = 0; i + 1 < q; ++i) J(i, i + 1) = J(i + 1, i) = offdiag[i];
  Eigen::SelfAdjointEigenSolver<decltype(J)> es(J);
  Rule<Scalar> r;
  r.x = es.eigenvalues().array();
  r.w = mu0 * es.eigenvectors().row(0).array().square().transpose();
  return r;
}

}  // namespace detail

/// q-point Gauss–Legendre rule on [−1, 1].
template <class Scalar = double>
Rule<Scalar> gauss_legendre(int q) {
  if (q < 1) throw std::invalid_argument("gauss_legendre needs q >= 1");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b(q - 1);
  for (int k = 1; k < q; ++k) b[k - 1] = Scalar(k) / std::sqrt(Scalar(4 * k * k - 1));
  return detail::golub_welsch<Scalar>(b, Scalar(2));
}

/// q-point Gauss–Hermite rule for the weight e^{−z²}.
template <class Scalar = double>
Rule<Scalar> gauss_hermite(int q) {
  if (q < 1) throw std::invalid_argument("gauss_hermite needs q >= 1");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b(q - 1);
  for (int k = 1; k < q; ++k) b[k - 1] = std::sqrt(Scalar(k) / Scalar(2));
  return detail::golub_welsch<Scalar>(b, std::sqrt(std::numbers::pi_v<Scalar>));
}

/// Composite rule: the base rule mapped onto each cell [a, b].
template <class Scalar>
Rule<Scalar> composite(const std::vector<std::pair<Scalar, Scalar>>& cells, const Rule<Scalar>& base) {
  Rule<Scalar> r;
  const Eigen::Index q = base.size();
  r.x.resize(q * static_cast<Eigen::Index>(cells.size()));
  r.w.resize(r.x.size());
  Eigen::Index k = 0;
  for (const auto& [a, b] : cells) {
    const Scalar c = (a + b) / 2, h = (b - a) / 2;
    r.x.segment(k, q) = c + h * base.x;
    r.w.segment(k, q) = h * base.w;
    k += q;
  }
  return r;
}

/// Rule on (0, R]: dyadic cells [2^{−k−1}, 2^{−k}] for k < levels, then
/// cells of width ≤ cell on [1, R].
template <class Scalar = double>
Rule<Scalar> graded_half_line(Scalar R, int levels, Scalar cell, int q_dyadic, int q_uniform) {
  std::vector<std::pair<Scalar, Scalar>> dy, un;
  Scalar a = 1;
  for (int k = 0; k < levels; ++k) {
    dy.emplace_back(a / 2, a);
    a /= 2;
  }
  const int m = std::max(1, static_cast<int>(std::ceil((R - 1) / cell)));
  const Scalar w = (R - 1) / m;
  for (int k = 0; k < m; ++k) un.emplace_back(1 + k * w, 1 + (k + 1) * w);
  Rule<Scalar> r1 = composite(dy, gauss_legendre<Scalar>(q_dyadic));
  Rule<Scalar> r2 = composite(un, gauss_legendre<Scalar>(q_uniform));
  Rule<Scalar> r;
  r.x.resize(r1.size() + r2.size());
  r.w.resize(r.x.size());
  r.x << r1.x, r2.x;
  r.w << r1.w, r2.w;
  return r;
}

/// The half-line rule mirrored onto [−R, R].
template <class Scalar>
Rule<Scalar> mirrored(const Rule<Scalar>& half) {
  Rule<Scalar> r;
  r.x.resize(2 * half.size());
  r.w.resize(r.x.size());
  r.x << -half.x.reverse(), half.x;
  r.w << half.w.reverse(), half.w;
  return r;
}

}  // namespace sheat
