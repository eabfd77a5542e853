#pragma once

#include <stdexcept>
#include <utility>

#include "rtmpc/types.hpp"

namespace rtmpc {

/// Decision vector of a receding-horizon problem: the stacked control
/// sequence (u(1), ..., u(N)) of length N*n_u, together with its
/// saturation box.
template <typename Scalar = double>
struct ControlParameter {
  VectorX<Scalar> values;
  Box<Scalar> bounds;

  ControlParameter() = default;
  ControlParameter(VectorX<Scalar> v, Box<Scalar> b) : values(std::move(v)), bounds(std::move(b)) {
    if (values.size() != bounds.size()) {
      throw std::invalid_argument("ControlParameter: values/bounds size mismatch");
    }
  }

  Index size() const { return values.size(); }

  /// Number of control samples for a given input dimension.
  Index samples(Index input_dim) const { return values.size() / input_dim; }

  bool feasible() const { return bounds.contains(values); }

  ControlParameter clamped() const {
    return ControlParameter(bounds.project(values), bounds);
  }
};

/// Shift the stacked sequence forward by q_applied samples and pad the
/// tail by repeating the final sample. The result stays inside the box.
template <typename Scalar>
ControlParameter<Scalar> warm_start_shift(const ControlParameter<Scalar>& p, Index q_applied,
                                          Index input_dim = 1) {
  const Index n = p.samples(input_dim);
  if (q_applied < 1 || q_applied > n) {
    throw std::invalid_argument("warm_start_shift: q_applied out of [1, N]");
  }
  VectorX<Scalar> shifted(p.values.size());
  const Index kept = (n - q_applied) * input_dim;
  shifted.head(kept) = p.values.tail(kept);
  const VectorX<Scalar> last = p.values.tail(input_dim);
  for (Index k = 0; k < q_applied; ++k) {
    shifted.segment(kept + k * input_dim, input_dim) = last;
  }
  return ControlParameter<Scalar>(std::move(shifted), p.bounds);
}

}  // namespace rtmpc
