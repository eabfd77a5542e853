#pragma once

#include <cmath>
#include <stdexcept>

#include "rtmpc/solver.hpp"
#include "rtmpc/types.hpp"

namespace rtmpc {

/// Which branch of the updating rule produced Gamma.
enum class MonitorBranch {
  kReduceContraction,  // K >= 1: push the contraction factor down
  kSettlingTime,       // K < 1: descend the settling-time sensitivity
  kGuardHold           // |log K| below the guard: treat as Gamma = 0
};

inline const char* to_string(MonitorBranch b) {
  switch (b) {
    case MonitorBranch::kReduceContraction: return "reduce_K";
    case MonitorBranch::kSettlingTime: return "settling";
    case MonitorBranch::kGuardHold: return "guard_hold";
  }
  return "unknown";
}

/// Everything the updating rule needs about one completed interval: the
/// budget it ran with, the four cost samples, and the ratios/sensitivities
/// estimated from them.
template <typename Scalar = double>
struct MonitorState {
  int q = 0;        // iteration budget of the completed interval
  int delta = 0;    // integer step of the updating rule
  int q_max = 0;    // budget cap

  Scalar J_k{};         // cost at the interval start (true state)
  Scalar J_k_plus{};    // warm-started cost at the predicted state
  Scalar J_hat_next{};  // cost after q iterations at the predicted state
  Scalar J_next{};      // true cost at the measured next state

  Scalar E_k{};      // iteration efficiency J_hat_next / J_k_plus
  Scalar D_k{};      // disturbance/shift factor (J_next J_k_plus)/(J_hat_next J_k)
  Scalar K_k{};      // contraction indicator E_k * D_k = J_next / J_k
  Scalar alpha_D{};  // per-iteration slope of the affine D model
  Scalar dE_dq{};    // efficiency sensitivity from the iteration log
  Scalar dK_dq{};    // contraction sensitivity E dD/dq + D dE/dq

  Scalar gamma{};  // signed sensitivity the rule stepped against
  MonitorBranch branch = MonitorBranch::kGuardHold;

  bool populated() const {
    return q >= 2 && delta >= 1 && q_max >= 2 && J_k > Scalar(0) && J_k_plus > Scalar(0) &&
           J_hat_next > Scalar(0) && J_next > Scalar(0) && std::isfinite(J_k) &&
           std::isfinite(J_k_plus) && std::isfinite(J_hat_next) && std::isfinite(J_next);
  }
};

/// Iteration efficiency over one interval: ratio of the cost after the
/// iteration batch to the cost before it, both at the predicted state.
template <typename Scalar>
Scalar estimate_E(Scalar J_hat_next, Scalar J_k_plus) {
  if (!(J_k_plus > Scalar(0)) || !(J_hat_next > Scalar(0))) {
    throw std::domain_error("estimate_E: costs must be positive");
  }
  return J_hat_next / J_k_plus;
}

/// Efficiency sensitivity from the iteration log: the last cost decrement
/// normalized by the starting cost. Needs at least two iterations.
template <typename Scalar>
Scalar estimate_dE_dq(const IterationLog<Scalar>& log) {
  if (log.costs.size() < 3) {
    throw std::invalid_argument("estimate_dE_dq: need a log with at least 2 iterations");
  }
  const std::size_t n = log.costs.size();
  return (log.costs[n - 1] - log.costs[n - 2]) / log.costs[0];
}

/// Slope of the affine disturbance/shift model D(q) = 1 + alpha_D q fitted
/// through the single measured point at the realized budget.
template <typename Scalar>
Scalar estimate_alpha_D(Scalar J_next, Scalar J_hat_next, Scalar J_k_plus, Scalar J_k, int q) {
  if (q < 1) throw std::invalid_argument("estimate_alpha_D: q must be >= 1");
  if (!(J_next > Scalar(0)) || !(J_hat_next > Scalar(0)) || !(J_k_plus > Scalar(0)) ||
      !(J_k > Scalar(0))) {
    throw std::domain_error("estimate_alpha_D: costs must be positive");
  }
  return ((J_next * J_k_plus) / (J_hat_next * J_k) - Scalar(1)) / Scalar(q);
}

/// Contraction sensitivity by the product rule, with dD/dq = alpha_D.
template <typename Scalar>
Scalar estimate_dK_dq(Scalar E, Scalar D, Scalar dE_dq, Scalar alpha_D) {
  return E * alpha_D + D * dE_dq;
}

/// Sensitivity of the settling-time proxy q / |log K| with respect to q,
/// valid on the contraction branch 0 < K < 1:
///   (-log K + (q / K) dK/dq) / (log K)^2.
template <typename Scalar>
Scalar settling_sensitivity(int q, Scalar K, Scalar dK_dq, Scalar guard = Scalar(1e-9)) {
  if (!(K > Scalar(0)) || K >= Scalar(1)) {
    throw std::invalid_argument("settling_sensitivity: requires 0 < K < 1");
  }
  const Scalar logK = std::log(K);
  if (std::abs(logK) < guard) {
    throw std::domain_error("settling_sensitivity: contraction too close to one");
  }
  return (-logK + (Scalar(q) / K) * dK_dq) / (logK * logK);
}

template <typename Scalar>
int sign_of(Scalar v) {
  if (v > Scalar(0)) return 1;
  if (v < Scalar(0)) return -1;
  return 0;
}

template <typename Scalar = double>
struct UpdateDecision {
  int q_next;
  Scalar gamma;
  MonitorBranch branch;
};

/// The budget updating rule: pick the sensitivity for the branch the
/// measured contraction indicator falls in, then take one quantified step
/// against its sign, clamped into [2, min(q_max, horizon)]. A contraction
/// indistinguishable from one (|log K| below the guard) holds the budget.
template <typename Scalar>
UpdateDecision<Scalar> update_q(const MonitorState<Scalar>& state, Index horizon,
                                Scalar guard = Scalar(1e-9)) {
  if (!state.populated()) {
    throw std::invalid_argument("update_q: monitor state not fully populated");
  }
  UpdateDecision<Scalar> decision{};
  if (state.K_k >= Scalar(1)) {
    decision.branch = MonitorBranch::kReduceContraction;
    decision.gamma = state.dK_dq;
  } else if (std::abs(std::log(state.K_k)) < guard) {
    decision.branch = MonitorBranch::kGuardHold;
    decision.gamma = Scalar(0);
  } else {
    decision.branch = MonitorBranch::kSettlingTime;
    decision.gamma = settling_sensitivity(state.q, state.K_k, state.dK_dq, guard);
  }
  const int cap = static_cast<int>(std::min<Index>(state.q_max, horizon));
  const int stepped = state.q - state.delta * sign_of(decision.gamma);
  decision.q_next = std::max(2, std::min(cap, stepped));
  return decision;
}

/// Objective of the ideal budget feedback, evaluated pointwise for offline
/// sweeps: settling-time proxy q / |log K| where K contracts, K itself
/// otherwise.
template <typename Scalar>
Scalar ideal_objective(int q, Scalar K) {
  if (K > Scalar(0) && K < Scalar(1)) return Scalar(q) / std::abs(std::log(K));
  return K;
}

}  // namespace rtmpc
