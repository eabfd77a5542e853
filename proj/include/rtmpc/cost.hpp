#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rtmpc/control_parameter.hpp"
#include "rtmpc/plant.hpp"
#include "rtmpc/reference.hpp"
#include "rtmpc/types.hpp"

namespace rtmpc {

namespace detail {

/// Sum of per-block quadratic forms v_k^T W v_k over the stacked vector v.
template <typename Scalar>
Scalar block_quadratic(const MatrixX<Scalar>& W, const VectorX<Scalar>& v) {
  const Index m = W.rows();
  Scalar acc(0);
  for (Index k = 0; k < v.size() / m; ++k) {
    const auto seg = v.segment(k * m, m);
    acc += seg.dot(W * seg);
  }
  return acc;
}

/// Left-multiply every m-row block of M by W (application of I (x) W).
template <typename Scalar>
MatrixX<Scalar> block_apply(const MatrixX<Scalar>& W, const MatrixX<Scalar>& M) {
  const Index m = W.rows();
  MatrixX<Scalar> out(M.rows(), M.cols());
  for (Index k = 0; k < M.rows() / m; ++k) {
    out.middleRows(k * m, m) = W * M.middleRows(k * m, m);
  }
  return out;
}

}  // namespace detail

/// Tracking cost of a linear receding-horizon problem in condensed form,
///
///   J(p, x, k0) = J_floor + sum_{k=1..N} |y(k) - y_ref(k0+k)|_Q^2 + |u(k)|_R^2
///
/// with the states eliminated through the plant model, so that the stacked
/// output trajectory is Y = Phi x + G p. The quadratic is then
/// J = J_floor + (Phi x + G p - Yref)' Qbar (Phi x + G p - Yref) + p' Rbar p,
/// whose p-Hessian H = 2 (G' Qbar G + Rbar) is state independent.
template <typename Scalar = double>
class CondensedCost {
 public:
  CondensedCost(const LinearPlant<Scalar>& plant, Index horizon, MatrixX<Scalar> output_weight,
                MatrixX<Scalar> input_weight, Scalar floor, ReferenceSignal<Scalar> reference)
      : plant_(plant),
        horizon_(horizon),
        Q_(std::move(output_weight)),
        R_(std::move(input_weight)),
        floor_(floor),
        reference_(std::move(reference)) {
    validate();
    build_operators();
  }

  /// Scalar-weight convenience: Q and R as multiples of the identity.
  CondensedCost(const LinearPlant<Scalar>& plant, Index horizon, Scalar output_weight,
                Scalar input_weight, Scalar floor, ReferenceSignal<Scalar> reference)
      : CondensedCost(plant, horizon,
                      MatrixX<Scalar>::Identity(plant.output_dim(), plant.output_dim()) * output_weight,
                      MatrixX<Scalar>::Identity(plant.input_dim(), plant.input_dim()) * input_weight,
                      floor, std::move(reference)) {}

  Index horizon() const { return horizon_; }
  Index parameter_size() const { return horizon_ * plant_.input_dim(); }
  Scalar floor() const { return floor_; }
  const LinearPlant<Scalar>& plant() const { return plant_; }
  const ReferenceSignal<Scalar>& reference() const { return reference_; }
  const MatrixX<Scalar>& output_weight() const { return Q_; }
  const MatrixX<Scalar>& input_weight() const { return R_; }

  /// Stacked free-response operator: Y_free = Phi x.
  const MatrixX<Scalar>& free_response() const { return phi_; }
  /// Stacked input-to-output operator: Y_forced = G p.
  const MatrixX<Scalar>& input_to_output() const { return G_; }
  /// Explicit parameter Hessian H = 2 (G' Qbar G + Rbar).
  const MatrixX<Scalar>& hessian() const { return H_; }

  Scalar value(const VectorX<Scalar>& p, const VectorX<Scalar>& x, Index k0) const {
    check_args(p, x);
    const VectorX<Scalar> err = phi_ * x + G_ * p - reference_.stacked(k0, horizon_);
    return floor_ + detail::block_quadratic(Q_, err) + detail::block_quadratic(R_, p);
  }

  /// Exact gradient H p + g(x, k0) of the condensed quadratic.
  VectorX<Scalar> gradient(const VectorX<Scalar>& p, const VectorX<Scalar>& x, Index k0) const {
    check_args(p, x);
    return H_ * p + gradient_offset(x, k0);
  }

  /// State/reference part of the gradient: g = 2 G' Qbar (Phi x - Yref).
  VectorX<Scalar> gradient_offset(const VectorX<Scalar>& x, Index k0) const {
    const VectorX<Scalar> r = phi_ * x - reference_.stacked(k0, horizon_);
    VectorX<Scalar> qr(r.size());
    const Index ny = plant_.output_dim();
    for (Index k = 0; k < horizon_; ++k) qr.segment(k * ny, ny) = Q_ * r.segment(k * ny, ny);
    return Scalar(2) * (G_.transpose() * qr);
  }

  /// Smallest eigenvalue of the per-sample input weight; 2*this bounds
  /// lambda_min(H) from below.
  Scalar input_weight_floor() const {
    if (R_.rows() == 1) return R_(0, 0);
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(R_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  void validate() const {
    if (horizon_ < 1) throw std::invalid_argument("CondensedCost: horizon must be >= 1");
    if (!(floor_ > Scalar(0))) throw std::invalid_argument("CondensedCost: floor must be positive");
    const Index ny = plant_.output_dim();
    const Index nu = plant_.input_dim();
    if (Q_.rows() != ny || Q_.cols() != ny) {
      throw std::invalid_argument("CondensedCost: output weight must be n_y x n_y");
    }
    if (R_.rows() != nu || R_.cols() != nu) {
      throw std::invalid_argument("CondensedCost: input weight must be n_u x n_u");
    }
    if (!Q_.isApprox(Q_.transpose())) throw std::invalid_argument("CondensedCost: Q not symmetric");
    if (!R_.isApprox(R_.transpose())) throw std::invalid_argument("CondensedCost: R not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> esq(Q_, Eigen::EigenvaluesOnly);
    if (esq.eigenvalues().minCoeff() < -Scalar(1e-12) * (Scalar(1) + Q_.norm())) {
      throw std::invalid_argument("CondensedCost: Q must be positive semidefinite");
    }
    Eigen::LLT<MatrixX<Scalar>> llt(R_);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("CondensedCost: R must be positive definite");
    }
    if (reference_.dim() != ny) {
      throw std::invalid_argument("CondensedCost: reference dimension != output dimension");
    }
  }

  void build_operators() {
    const Index n = plant_.state_dim();
    const Index nu = plant_.input_dim();
    const Index ny = plant_.output_dim();
    const Index N = horizon_;

    phi_.resize(N * ny, n);
    G_.setZero(N * ny, N * nu);

    // Markov blocks C A^m B for m = 0..N-1, accumulated in one pass.
    std::vector<MatrixX<Scalar>> markov(static_cast<std::size_t>(N));
    MatrixX<Scalar> CAm = plant_.C;
    for (Index m = 0; m < N; ++m) {
      markov[static_cast<std::size_t>(m)] = CAm * plant_.B;
      CAm = CAm * plant_.A;
      phi_.middleRows(m * ny, ny) = CAm;  // C A^{m+1}
    }
    for (Index k = 1; k <= N; ++k) {
      for (Index i = 1; i <= k; ++i) {
        G_.block((k - 1) * ny, (i - 1) * nu, ny, nu) = markov[static_cast<std::size_t>(k - i)];
      }
    }

    MatrixX<Scalar> rbar = MatrixX<Scalar>::Zero(N * nu, N * nu);
    for (Index k = 0; k < N; ++k) rbar.block(k * nu, k * nu, nu, nu) = R_;
    H_ = Scalar(2) * (G_.transpose() * detail::block_apply(Q_, G_) + rbar);
    H_ = ((H_ + H_.transpose()) / Scalar(2)).eval();  // keep exactly symmetric
  }

  void check_args(const VectorX<Scalar>& p, const VectorX<Scalar>& x) const {
    if (p.size() != parameter_size()) throw std::invalid_argument("cost: parameter size mismatch");
    if (x.size() != plant_.state_dim()) throw std::invalid_argument("cost: state size mismatch");
  }

  LinearPlant<Scalar> plant_;
  Index horizon_;
  MatrixX<Scalar> Q_, R_;
  Scalar floor_;
  ReferenceSignal<Scalar> reference_;
  MatrixX<Scalar> phi_, G_, H_;
};

/// The cost restricted to one optimization instance (fixed state estimate
/// and reference window): J(p) = J_floor + |e|_Qbar^2 + |p|_Rbar^2 with
/// e = r + G p, and gradient H p + g. The offset vectors are cached so the
/// solver pays one operator product per evaluation.
template <typename Scalar = double>
class CostSlice {
 public:
  using ScalarType = Scalar;

  CostSlice(const CondensedCost<Scalar>& cost, VectorX<Scalar> x, Index k0)
      : cost_(&cost),
        residual_offset_(cost.free_response() * x - cost.reference().stacked(k0, cost.horizon())),
        gradient_offset_(cost.gradient_offset(x, k0)) {}

  Scalar value(const VectorX<Scalar>& p) const {
    const VectorX<Scalar> err = residual_offset_ + cost_->input_to_output() * p;
    return cost_->floor() + detail::block_quadratic(cost_->output_weight(), err) +
           detail::block_quadratic(cost_->input_weight(), p);
  }

  VectorX<Scalar> gradient(const VectorX<Scalar>& p) const {
    return cost_->hessian() * p + gradient_offset_;
  }

  Index size() const { return cost_->parameter_size(); }
  const CondensedCost<Scalar>& cost() const { return *cost_; }

 private:
  const CondensedCost<Scalar>* cost_;
  VectorX<Scalar> residual_offset_;
  VectorX<Scalar> gradient_offset_;
};

template <typename Scalar>
Scalar eval_cost(const CondensedCost<Scalar>& cost, const VectorX<Scalar>& p,
                 const VectorX<Scalar>& x, Index k0) {
  return cost.value(p, x, k0);
}

template <typename Scalar>
Scalar eval_cost(const CondensedCost<Scalar>& cost, const ControlParameter<Scalar>& p,
                 const VectorX<Scalar>& x, Index k0) {
  return cost.value(p.values, x, k0);
}

template <typename Scalar>
VectorX<Scalar> grad_cost(const CondensedCost<Scalar>& cost, const VectorX<Scalar>& p,
                          const VectorX<Scalar>& x, Index k0) {
  return cost.gradient(p, x, k0);
}

template <typename Scalar>
VectorX<Scalar> grad_cost(const CondensedCost<Scalar>& cost, const ControlParameter<Scalar>& p,
                          const VectorX<Scalar>& x, Index k0) {
  return cost.gradient(p.values, x, k0);
}

namespace detail {

template <typename Scalar>
Scalar rayleigh(const MatrixX<Scalar>& H, const VectorX<Scalar>& v) {
  return v.dot(H * v);
}

/// Fixed deterministic start vector; a ramp is never orthogonal to the
/// dominant eigenvector of the operators built here.
template <typename Scalar>
VectorX<Scalar> power_start(Index n) {
  VectorX<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(1) + Scalar(i) / Scalar(n);
  return v / v.norm();
}

/// Plain power iteration; stops when the Rayleigh quotient stalls.
template <typename Scalar>
std::pair<Scalar, VectorX<Scalar>> power_iterate(const MatrixX<Scalar>& M, VectorX<Scalar> v,
                                                 Scalar tol, int max_iter) {
  Scalar rho = rayleigh(M, v);
  int stalled = 0;
  for (int it = 0; it < max_iter; ++it) {
    VectorX<Scalar> w = M * v;
    const Scalar norm = w.norm();
    if (!(norm > Scalar(0))) break;  // v already spans the null space
    v = w / norm;
    const Scalar next = rayleigh(M, v);
    const bool stall = std::abs(next - rho) <= tol * std::max(std::abs(next), Scalar(1));
    rho = next;
    stalled = stall ? stalled + 1 : 0;
    if (stalled >= 2) break;
  }
  return {rho, v};
}

/// Inverse-iteration refinement with a fixed shift strictly outside the
/// spectrum on the side of interest; the Rayleigh quotient of H is returned.
template <typename Scalar>
Scalar inverse_polish(const MatrixX<Scalar>& H, VectorX<Scalar> v, Scalar shift, bool from_above,
                      Scalar tol, int max_iter) {
  const Index n = H.rows();
  MatrixX<Scalar> shifted;
  Eigen::LLT<MatrixX<Scalar>> llt;
  for (int attempt = 0;; ++attempt) {
    shifted = from_above ? MatrixX<Scalar>(shift * MatrixX<Scalar>::Identity(n, n) - H)
                         : MatrixX<Scalar>(H - shift * MatrixX<Scalar>::Identity(n, n));
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) break;
    if (attempt >= 60) return rayleigh(H, v);  // give up on refining
    const Scalar bump = std::max(std::abs(shift), Scalar(1)) * Scalar(1e-3);
    shift = from_above ? shift + bump : shift - bump;
  }
  Scalar rho = rayleigh(H, v);
  int stalled = 0;
  for (int it = 0; it < max_iter; ++it) {
    VectorX<Scalar> w = llt.solve(v);
    const Scalar norm = w.norm();
    if (!(norm > Scalar(0)) || !std::isfinite(norm)) break;
    v = w / norm;
    const Scalar next = rayleigh(H, v);
    const bool stall = std::abs(next - rho) <= tol * std::max(std::abs(next), Scalar(1));
    rho = next;
    stalled = stall ? stalled + 1 : 0;
    if (stalled >= 2) break;
  }
  return rho;
}

}  // namespace detail

/// Extreme eigenvalues (lambda_min, lambda_max) of the parameter Hessian.
/// lambda_max by power iteration on H; lambda_min by power iteration on
/// (sigma I - H) with sigma = lambda_max, each refined by a few inverse
/// iterations with a shift just outside the spectrum (the shifted power
/// phase alone stalls when sigma dwarfs the bottom eigenvalue gap).
template <typename Scalar>
std::pair<Scalar, Scalar> hessian_extremes(const CondensedCost<Scalar>& cost,
                                           Scalar tol = Scalar(1e-10)) {
  const MatrixX<Scalar>& H = cost.hessian();
  const Index n = H.rows();
  const VectorX<Scalar> v0 = detail::power_start<Scalar>(n);

  auto [rho_max, v_max] = detail::power_iterate(H, v0, tol, 5000);
  const Scalar mu_hi = rho_max * (Scalar(1) + Scalar(1e-6)) + Scalar(1e-12);
  const Scalar lambda_max = detail::inverse_polish(H, v_max, mu_hi, /*from_above=*/true, tol, 500);

  const MatrixX<Scalar> flipped = lambda_max * MatrixX<Scalar>::Identity(n, n) - H;
  auto [rho_flip, v_min] = detail::power_iterate(flipped, v0, tol, 1000);
  (void)rho_flip;
  const Scalar lower_bound = Scalar(2) * cost.input_weight_floor();
  const Scalar mu_lo = lower_bound * (Scalar(1) - Scalar(1e-6)) - Scalar(1e-12);
  const Scalar lambda_min = detail::inverse_polish(H, v_min, mu_lo, /*from_above=*/false, tol, 500);

  return {lambda_min, lambda_max};
}

/// Upper bound on the Lipschitz constant of the cost gradient; the tight
/// default is lambda_max(H).
template <typename Scalar>
Scalar lipschitz_bound(const CondensedCost<Scalar>& cost) {
  return hessian_extremes(cost).second;
}

/// Momentum constant (sqrt(l_max) - sqrt(l_min)) / (sqrt(l_max) + sqrt(l_min)),
/// the optimal choice for a quadratic with Hessian extremes (l_min, l_max).
template <typename Scalar>
Scalar momentum_constant(Scalar lambda_min, Scalar lambda_max) {
  if (!(lambda_min > Scalar(0)) || !(lambda_max > Scalar(0))) {
    throw std::invalid_argument("momentum_constant: eigenvalues must be positive");
  }
  if (lambda_min > lambda_max) {
    throw std::invalid_argument("momentum_constant: lambda_min > lambda_max");
  }
  const Scalar a = std::sqrt(lambda_max);
  const Scalar b = std::sqrt(lambda_min);
  return (a - b) / (a + b);
}

}  // namespace rtmpc
