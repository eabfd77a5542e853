#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>

namespace rtmpc {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Element-wise box [lower, upper] used for input saturation.
template <typename Scalar = double>
struct Box {
  VectorX<Scalar> lower;
  VectorX<Scalar> upper;

  Box() = default;
  Box(VectorX<Scalar> lo, VectorX<Scalar> hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
      throw std::invalid_argument("Box: lower and upper must have the same size");
    }
    if ((lower.array() > upper.array()).any()) {
      throw std::invalid_argument("Box: crossed bounds (lower > upper)");
    }
  }

  /// Uniform box [-bound, +bound] of the given size.
  static Box symmetric(Index size, Scalar bound) {
    return Box(VectorX<Scalar>::Constant(size, -bound), VectorX<Scalar>::Constant(size, bound));
  }

  Index size() const { return lower.size(); }

  VectorX<Scalar> project(const VectorX<Scalar>& v) const {
    return v.cwiseMax(lower).cwiseMin(upper);
  }

  bool contains(const VectorX<Scalar>& v) const {
    return (v.array() >= lower.array()).all() && (v.array() <= upper.array()).all();
  }
};

/// Element-wise clamp of v into [lower, upper].
template <typename Scalar>
VectorX<Scalar> project_box(const VectorX<Scalar>& v, const VectorX<Scalar>& lower,
                            const VectorX<Scalar>& upper) {
  if (v.size() != lower.size() || v.size() != upper.size()) {
    throw std::invalid_argument("project_box: size mismatch");
  }
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("project_box: crossed bounds (lower > upper)");
  }
  return v.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace rtmpc
