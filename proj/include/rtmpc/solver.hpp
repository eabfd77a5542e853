#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtmpc/control_parameter.hpp"
#include "rtmpc/cost.hpp"
#include "rtmpc/types.hpp"

namespace rtmpc {

/// Sentinel for "momentum anchor is never reset".
inline constexpr int kNoRestart = std::numeric_limits<int>::max();

/// Fast-gradient settings: step size 1/L, momentum c in [0,1), restart
/// counter threshold, and the projection box.
template <typename Scalar = double>
struct SolverConfig {
  Scalar lipschitz{};
  Scalar momentum{};
  int restart_threshold = kNoRestart;
  Box<Scalar> bounds;

  void validate(Index parameter_size) const {
    if (!(lipschitz > Scalar(0))) throw std::invalid_argument("SolverConfig: L must be positive");
    if (!(momentum >= Scalar(0)) || momentum >= Scalar(1)) {
      throw std::invalid_argument("SolverConfig: momentum must lie in [0, 1)");
    }
    if (restart_threshold < 1) {
      throw std::invalid_argument("SolverConfig: restart threshold must be >= 1");
    }
    if (bounds.size() != parameter_size) {
      throw std::invalid_argument("SolverConfig: bounds size != parameter size");
    }
  }
};

/// Costs J(p^(0)), ..., J(p^(q)) of one solver run, plus the iteration
/// indices at which the momentum anchor was reset.
template <typename Scalar = double>
struct IterationLog {
  std::vector<Scalar> costs;
  std::vector<int> restart_indices;

  int iterations() const { return static_cast<int>(costs.size()) - 1; }
  Scalar initial_cost() const { return costs.front(); }
  Scalar final_cost() const { return costs.back(); }
};

template <typename Scalar = double>
struct SolveResult {
  VectorX<Scalar> parameter;
  IterationLog<Scalar> log;
  Scalar residual{};
};

/// Tolerance-driven solve ran out of iterations; carries the best iterate
/// seen and its fixed-point residual.
template <typename Scalar = double>
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(std::string what, VectorX<Scalar> best, Scalar residual)
      : std::runtime_error(std::move(what)), best_parameter(std::move(best)), residual(residual) {}

  VectorX<Scalar> best_parameter;
  Scalar residual;
};

/// Projected fast-gradient iterations with the constant restarting
/// strategy. Starting from r = p^(0), each iteration takes the projected
/// gradient step from r, then advances r along the momentum direction
/// p^(i) + c (p^(i) - p^(i-1)); every restart_threshold iterations the
/// anchor r is reset to the current iterate. With c = 0 this is classical
/// projected gradient descent; with the no-restart sentinel it is the
/// plain fast gradient.
///
/// The Problem type provides value(p) and gradient(p).
template <typename Problem, typename Scalar = typename Problem::ScalarType>
std::pair<VectorX<Scalar>, IterationLog<Scalar>> fast_gradient(const Problem& problem,
                                                               const VectorX<Scalar>& p0,
                                                               int iterations,
                                                               const SolverConfig<Scalar>& config) {
  config.validate(p0.size());
  if (iterations < 1) throw std::invalid_argument("fast_gradient: iteration count must be >= 1");

  const Scalar step = Scalar(1) / config.lipschitz;
  VectorX<Scalar> prev = config.bounds.project(p0);
  VectorX<Scalar> anchor = prev;

  IterationLog<Scalar> log;
  log.costs.reserve(static_cast<std::size_t>(iterations) + 1);
  log.costs.push_back(problem.value(prev));
  if (!std::isfinite(log.costs.back())) {
    throw std::runtime_error("fast_gradient: non-finite initial cost");
  }

  int counter = 0;
  VectorX<Scalar> current;
  for (int i = 1; i <= iterations; ++i) {
    ++counter;
    current = config.bounds.project(anchor - step * problem.gradient(anchor));
    anchor = current + config.momentum * (current - prev);
    if (counter == config.restart_threshold) {
      anchor = current;
      counter = 0;
      log.restart_indices.push_back(i);
    }
    const Scalar cost = problem.value(current);
    if (!std::isfinite(cost)) {
      throw std::runtime_error("fast_gradient: non-finite cost at iteration " + std::to_string(i));
    }
    log.costs.push_back(cost);
    prev = current;
  }
  return {std::move(current), std::move(log)};
}

/// Entry point on a condensed cost instance: q iterations from the warm
/// start p0 against the predicted state.
template <typename Scalar>
std::pair<ControlParameter<Scalar>, IterationLog<Scalar>> fast_gradient(
    const CondensedCost<Scalar>& cost, const VectorX<Scalar>& x, Index k0,
    const ControlParameter<Scalar>& p0, int iterations, const SolverConfig<Scalar>& config) {
  CostSlice<Scalar> slice(cost, x, k0);
  auto [p, log] = fast_gradient(slice, p0.values, iterations, config);
  return {ControlParameter<Scalar>(std::move(p), config.bounds), std::move(log)};
}

/// Max-norm fixed-point residual |p - P(p - (1/L) grad J(p))|_inf; zero
/// exactly at a constrained stationary point.
template <typename Problem, typename Scalar = typename Problem::ScalarType>
Scalar fixed_point_residual(const Problem& problem, const VectorX<Scalar>& p,
                            const SolverConfig<Scalar>& config) {
  const Scalar step = Scalar(1) / config.lipschitz;
  return (p - config.bounds.project(p - step * problem.gradient(p))).template lpNorm<Eigen::Infinity>();
}

/// Iterate until the fixed-point residual drops below tol; returns the
/// first iterate satisfying it. Intended for baselines and tests, not the
/// real-time path.
template <typename Problem, typename Scalar = typename Problem::ScalarType>
SolveResult<Scalar> solve_to_tolerance(const Problem& problem, const VectorX<Scalar>& p0,
                                       const SolverConfig<Scalar>& config, Scalar tol,
                                       int max_iter) {
  config.validate(p0.size());
  if (!(tol > Scalar(0))) throw std::invalid_argument("solve_to_tolerance: tol must be positive");

  const Scalar step = Scalar(1) / config.lipschitz;
  VectorX<Scalar> prev = config.bounds.project(p0);
  VectorX<Scalar> anchor = prev;

  SolveResult<Scalar> result;
  result.log.costs.push_back(problem.value(prev));

  VectorX<Scalar> best = prev;
  Scalar best_residual = fixed_point_residual(problem, prev, config);
  if (best_residual <= tol) {
    result.parameter = std::move(best);
    result.residual = best_residual;
    return result;
  }

  int counter = 0;
  for (int i = 1; i <= max_iter; ++i) {
    ++counter;
    VectorX<Scalar> current = config.bounds.project(anchor - step * problem.gradient(anchor));
    anchor = current + config.momentum * (current - prev);
    if (counter == config.restart_threshold) {
      anchor = current;
      counter = 0;
      result.log.restart_indices.push_back(i);
    }
    result.log.costs.push_back(problem.value(current));
    prev = current;

    const Scalar residual = fixed_point_residual(problem, current, config);
    if (residual < best_residual) {
      best_residual = residual;
      best = current;
    }
    if (residual <= tol) {
      result.parameter = std::move(current);
      result.residual = residual;
      return result;
    }
  }
  throw ConvergenceFailure<Scalar>(
      "solve_to_tolerance: residual " + std::to_string(best_residual) + " above tol after " +
          std::to_string(max_iter) + " iterations",
      std::move(best), best_residual);
}

template <typename Scalar>
SolveResult<Scalar> solve_to_tolerance(const CondensedCost<Scalar>& cost, const VectorX<Scalar>& x,
                                       Index k0, const ControlParameter<Scalar>& p0,
                                       const SolverConfig<Scalar>& config, Scalar tol,
                                       int max_iter) {
  CostSlice<Scalar> slice(cost, x, k0);
  return solve_to_tolerance(slice, p0.values, config, tol, max_iter);
}

}  // namespace rtmpc
