#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "rtmpc/control_parameter.hpp"
#include "rtmpc/types.hpp"

namespace rtmpc {

/// Discrete-time linear plant x(k+1) = A x(k) + B u(k), y(k) = C x(k),
/// sampled every tau_c seconds.
template <typename Scalar = double>
struct LinearPlant {
  MatrixX<Scalar> A;
  MatrixX<Scalar> B;
  MatrixX<Scalar> C;
  Scalar tau_c{};

  LinearPlant() = default;
  LinearPlant(MatrixX<Scalar> a, MatrixX<Scalar> b, MatrixX<Scalar> c, Scalar tau)
      : A(std::move(a)), B(std::move(b)), C(std::move(c)), tau_c(tau) {
    if (A.rows() != A.cols()) throw std::invalid_argument("LinearPlant: A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("LinearPlant: B row count != state dim");
    if (C.cols() != A.cols()) throw std::invalid_argument("LinearPlant: C col count != state dim");
    if (!(tau_c > Scalar(0))) throw std::invalid_argument("LinearPlant: tau_c must be positive");
  }

  Index state_dim() const { return A.rows(); }
  Index input_dim() const { return B.cols(); }
  Index output_dim() const { return C.rows(); }
};

/// Additive per-period state disturbance w(k). Entries beyond the stored
/// length are zero.
template <typename Scalar = double>
class DisturbanceSequence {
 public:
  DisturbanceSequence() = default;
  explicit DisturbanceSequence(Index state_dim) : state_dim_(state_dim) {}
  DisturbanceSequence(Index state_dim, std::vector<VectorX<Scalar>> samples)
      : state_dim_(state_dim), samples_(std::move(samples)) {
    for (const auto& w : samples_) {
      if (w.size() != state_dim_) {
        throw std::invalid_argument("DisturbanceSequence: sample size != state dim");
      }
    }
  }

  Index state_dim() const { return state_dim_; }
  Index length() const { return static_cast<Index>(samples_.size()); }
  bool empty() const { return samples_.empty(); }

  /// Disturbance entering the state transition over period k -> k+1.
  VectorX<Scalar> at(Index k) const {
    if (k >= 0 && k < length()) return samples_[static_cast<std::size_t>(k)];
    return VectorX<Scalar>::Zero(state_dim_);
  }

  void set(Index k, VectorX<Scalar> w) {
    if (w.size() != state_dim_) {
      throw std::invalid_argument("DisturbanceSequence: sample size != state dim");
    }
    if (k < 0) throw std::invalid_argument("DisturbanceSequence: negative index");
    if (k >= length()) samples_.resize(static_cast<std::size_t>(k) + 1, VectorX<Scalar>::Zero(state_dim_));
    samples_[static_cast<std::size_t>(k)] = std::move(w);
  }

  const std::vector<VectorX<Scalar>>& samples() const { return samples_; }

 private:
  Index state_dim_{0};
  std::vector<VectorX<Scalar>> samples_;
};

/// Exact zero-order-hold discretization of the chain of three integrators
/// d/dt (x1, x2, x3) = (x2, x3, u), output y = x1:
///   A = [[1, t, t^2/2], [0, 1, t], [0, 0, 1]],  B = [t^3/6, t^2/2, t]^T.
template <typename Scalar = double>
LinearPlant<Scalar> discretize_triple_integrator(Scalar tau_c) {
  if (!(tau_c > Scalar(0))) {
    throw std::invalid_argument("discretize_triple_integrator: tau_c must be positive");
  }
  MatrixX<Scalar> A(3, 3);
  A << Scalar(1), tau_c, tau_c * tau_c / Scalar(2),
       Scalar(0), Scalar(1), tau_c,
       Scalar(0), Scalar(0), Scalar(1);
  MatrixX<Scalar> B(3, 1);
  B << tau_c * tau_c * tau_c / Scalar(6), tau_c * tau_c / Scalar(2), tau_c;
  MatrixX<Scalar> C(1, 3);
  C << Scalar(1), Scalar(0), Scalar(0);
  return LinearPlant<Scalar>(std::move(A), std::move(B), std::move(C), tau_c);
}

namespace detail {

template <typename Scalar>
void check_predict_args(const LinearPlant<Scalar>& plant, const VectorX<Scalar>& x,
                        const VectorX<Scalar>& u_stacked, Index j) {
  if (x.size() != plant.state_dim()) {
    throw std::invalid_argument("predict: state size mismatch");
  }
  if (u_stacked.size() % plant.input_dim() != 0) {
    throw std::invalid_argument("predict: control vector not a whole number of samples");
  }
  const Index available = u_stacked.size() / plant.input_dim();
  if (j < 1 || j > available) {
    throw std::invalid_argument("predict: step count out of [1, available samples]");
  }
}

}  // namespace detail

/// Nominal state after j steps under the stacked piecewise-constant
/// control sequence.
template <typename Scalar>
VectorX<Scalar> predict(const LinearPlant<Scalar>& plant, const VectorX<Scalar>& x,
                        const VectorX<Scalar>& u_stacked, Index j) {
  detail::check_predict_args(plant, x, u_stacked, j);
  const Index nu = plant.input_dim();
  VectorX<Scalar> state = x;
  for (Index k = 0; k < j; ++k) {
    state = plant.A * state + plant.B * u_stacked.segment(k * nu, nu);
  }
  return state;
}

template <typename Scalar>
VectorX<Scalar> predict(const LinearPlant<Scalar>& plant, const VectorX<Scalar>& x,
                        const ControlParameter<Scalar>& p, Index j) {
  return predict(plant, x, p.values, j);
}

/// Same recursion as predict with the disturbance w added to the state at
/// each step. w is indexed from w_offset, one sample per basic period.
template <typename Scalar>
VectorX<Scalar> simulate_real(const LinearPlant<Scalar>& plant, const VectorX<Scalar>& x,
                              const VectorX<Scalar>& u_stacked, Index j,
                              const DisturbanceSequence<Scalar>& w, Index w_offset = 0) {
  detail::check_predict_args(plant, x, u_stacked, j);
  if (!w.empty() && w.state_dim() != plant.state_dim()) {
    throw std::invalid_argument("simulate_real: disturbance dimension mismatch");
  }
  const Index nu = plant.input_dim();
  VectorX<Scalar> state = x;
  for (Index k = 0; k < j; ++k) {
    state = plant.A * state + plant.B * u_stacked.segment(k * nu, nu);
    if (!w.empty()) state += w.at(w_offset + k);
  }
  return state;
}

template <typename Scalar>
VectorX<Scalar> simulate_real(const LinearPlant<Scalar>& plant, const VectorX<Scalar>& x,
                              const ControlParameter<Scalar>& p, Index j,
                              const DisturbanceSequence<Scalar>& w, Index w_offset = 0) {
  return simulate_real(plant, x, p.values, j, w, w_offset);
}

}  // namespace rtmpc
