#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace sheat {

template <class Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Index product(const std::vector<Eigen::Index>& e, std::size_t from, std::size_t to) {
  Eigen::Index p = 1;
  for (std::size_t i = from; i < to; ++i) p *= e[i];
  return p;
}

/// Applies op (rows × extents[axis]) along one axis of a row-major tensor.
/// The result has extents[axis] replaced by op.rows().
template <class Scalar, class Derived>
Eigen::Array<Scalar, Eigen::Dynamic, 1> apply_along_axis(const Eigen::MatrixBase<Derived>& op,
                                                         const Eigen::Array<Scalar, Eigen::Dynamic, 1>& in,
                                                         const std::vector<Eigen::Index>& extents, int axis) {
  const Eigen::Index e = extents[axis];
  if (op.cols() != e) throw std::invalid_argument("apply_along_axis: operator width mismatch");
  if (product(extents, 0, extents.size()) != in.size())
    throw std::invalid_argument("apply_along_axis: tensor size mismatch");
  const Eigen::Index outer = product(extents, 0, axis);
  const Eigen::Index inner = product(extents, axis + 1, extents.size());
  const Eigen::Index rows = op.rows();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(outer * rows * inner);
  for (Eigen::Index o = 0; o < outer; ++o) {
    Eigen::Map<const RowMajorMatrix<Scalar>> src(in.data() + o * e * inner, e, inner);
    Eigen::Map<RowMajorMatrix<Scalar>> dst(out.data() + o * rows * inner, rows, inner);
    dst.noalias() = op * src;
  }
  return out;
}

/// Multiplies entry j along the axis by factors[j].
template <class Scalar>
void scale_along_axis(Eigen::Array<Scalar, Eigen::Dynamic, 1>& v, const std::vector<Eigen::Index>& extents,
                      int axis, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& factors) {
  const Eigen::Index e = extents[axis];
  const Eigen::Index outer = product(extents, 0, axis);
  const Eigen::Index inner = product(extents, axis + 1, extents.size());
  for (Eigen::Index o = 0; o < outer; ++o)
    for (Eigen::Index j = 0; j < e; ++j) v.segment((o * e + j) * inner, inner) *= factors[j];
}

}  // namespace sheat
