#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rtmpc/control_parameter.hpp"
#include "rtmpc/cost.hpp"
#include "rtmpc/monitor.hpp"
#include "rtmpc/plant.hpp"
#include "rtmpc/reference.hpp"
#include "rtmpc/solver.hpp"
#include "rtmpc/types.hpp"

namespace rtmpc {

/// Extended state of the distributed-in-time loop: plant state, current
/// control parameter, iteration budget for the upcoming interval, and the
/// absolute basic-period index of the current updating instant.
template <typename Scalar = double>
struct ExtendedState {
  VectorX<Scalar> x;
  ControlParameter<Scalar> p;
  int q = 0;
  Index t = 0;
};

/// Full description of one closed-loop run.
template <typename Scalar = double>
struct ScenarioConfig {
  // plant
  Scalar tau_c = Scalar(0.02);
  DisturbanceSequence<Scalar> disturbance;

  // cost
  Index horizon = 200;
  Scalar output_weight = Scalar(100);
  Scalar input_weight = Scalar(1);
  Scalar cost_floor = Scalar(1);
  ReferenceSignal<Scalar> reference = ReferenceSignal<Scalar>::constant(Scalar(0));

  // constraints
  Scalar input_bound = Scalar(1);  // |u| <= input_bound

  // solver
  std::optional<Scalar> momentum_override;   // default: optimal c from the Hessian extremes
  std::optional<Scalar> lipschitz_override;  // default: lambda_max(H)
  int restart_threshold = 8;

  // monitor
  int q_init = 2;
  int delta = 10;
  int q_max = 100;
  Scalar guard = Scalar(1e-9);

  // run
  Index duration = 2400;
  VectorX<Scalar> x0;  // empty -> zero state
  VectorX<Scalar> p0;  // empty -> zero sequence
  bool warm_start = true;
  bool adaptive = true;
  int q_constant = 20;

  int initial_budget() const { return adaptive ? q_init : q_constant; }

  void validate() const {
    if (!(tau_c > Scalar(0))) throw std::invalid_argument("ScenarioConfig: tau_c must be positive");
    if (horizon < 1) throw std::invalid_argument("ScenarioConfig: horizon must be >= 1");
    if (!(input_bound > Scalar(0))) {
      throw std::invalid_argument("ScenarioConfig: input bound must be positive");
    }
    if (delta < 1) throw std::invalid_argument("ScenarioConfig: delta must be >= 1");
    if (q_max < 2) throw std::invalid_argument("ScenarioConfig: q_max must be >= 2");
    if (q_max > horizon) throw std::invalid_argument("ScenarioConfig: q_max must not exceed N");
    const int q0 = initial_budget();
    if (q0 < 2) throw std::invalid_argument("ScenarioConfig: initial budget must be >= 2");
    if (q0 > q_max) throw std::invalid_argument("ScenarioConfig: initial budget above q_max");
    if (static_cast<Index>(q0) > horizon) {
      throw std::invalid_argument("ScenarioConfig: initial budget above N");
    }
    if (duration < static_cast<Index>(q0)) {
      throw std::invalid_argument("ScenarioConfig: duration shorter than one interval");
    }
  }
};

/// Everything recorded about one completed updating interval.
template <typename Scalar = double>
struct IntervalRecord {
  Index t_start = 0;  // basic-period index of the updating instant
  int q = 0;          // budget this interval ran with
  int q_next = 0;     // budget decided for the next interval
  int restarts = 0;   // momentum resets inside the solver batch
  MonitorState<Scalar> monitor;
  VectorX<Scalar> applied;  // q * n_u control samples actually applied
  MatrixX<Scalar> states;   // n x q: measured states at t_start+1 .. t_start+q
};

template <typename Scalar = double>
struct Trace {
  ScenarioConfig<Scalar> config;  // resolved configuration echo
  Scalar lambda_min{};            // Hessian extremes behind the solver settings
  Scalar lambda_max{};
  Scalar lipschitz{};
  Scalar momentum{};

  MatrixX<Scalar> states;    // n x (duration + 1), column t = state at period t
  MatrixX<Scalar> controls;  // n_u x duration, column t = control applied on [t, t+1)
  std::vector<int> budget;   // per period: q of the governing interval, 0 in the tail
  std::vector<IntervalRecord<Scalar>> intervals;

  Index duration() const { return controls.cols(); }
};

/// Weighted output tracking error accumulated over every basic period of
/// the run, sum_t |y(t) - y_ref(t)|^2_Q.
template <typename Scalar>
Scalar cumulative_tracking_cost(const Trace<Scalar>& trace, const LinearPlant<Scalar>& plant) {
  const MatrixX<Scalar> Q =
      MatrixX<Scalar>::Identity(plant.output_dim(), plant.output_dim()) * trace.config.output_weight;
  Scalar acc(0);
  for (Index t = 0; t < trace.states.cols(); ++t) {
    const VectorX<Scalar> err = plant.C * trace.states.col(t) - trace.config.reference.at(t);
    acc += err.dot(Q * err);
  }
  return acc;
}

/// The distributed-in-time MPC engine. Construction condenses the cost and
/// fixes the solver settings (Lipschitz bound and momentum from the Hessian
/// extremes unless overridden); stepping is a pure function of the extended
/// state, so alternate budgets can be replayed from any snapshot.
template <typename Scalar = double>
class ClosedLoopEngine {
 public:
  struct StepOutput {
    ExtendedState<Scalar> next;
    IntervalRecord<Scalar> record;
  };

  explicit ClosedLoopEngine(ScenarioConfig<Scalar> config)
      : config_(std::move(config)),
        plant_(discretize_triple_integrator(config_.tau_c)),
        cost_(plant_, config_.horizon, config_.output_weight, config_.input_weight,
              config_.cost_floor, config_.reference) {
    config_.validate();
    auto [lmin, lmax] = hessian_extremes(cost_);
    lambda_min_ = lmin;
    lambda_max_ = lmax;
    solver_.lipschitz = config_.lipschitz_override.value_or(lmax);
    solver_.momentum = config_.momentum_override.value_or(momentum_constant(lmin, lmax));
    solver_.restart_threshold = config_.restart_threshold;
    solver_.bounds = Box<Scalar>::symmetric(cost_.parameter_size(), config_.input_bound);
    solver_.validate(cost_.parameter_size());
  }

  const ScenarioConfig<Scalar>& config() const { return config_; }
  const LinearPlant<Scalar>& plant() const { return plant_; }
  const CondensedCost<Scalar>& cost() const { return cost_; }
  const SolverConfig<Scalar>& solver() const { return solver_; }
  Scalar lambda_min() const { return lambda_min_; }
  Scalar lambda_max() const { return lambda_max_; }

  ExtendedState<Scalar> initial_state() const {
    ExtendedState<Scalar> s;
    s.x = config_.x0.size() ? config_.x0 : VectorX<Scalar>::Zero(plant_.state_dim());
    if (s.x.size() != plant_.state_dim()) {
      throw std::invalid_argument("ScenarioConfig: x0 size != state dimension");
    }
    VectorX<Scalar> p = config_.p0.size() ? config_.p0 : VectorX<Scalar>::Zero(cost_.parameter_size());
    if (p.size() != cost_.parameter_size()) {
      throw std::invalid_argument("ScenarioConfig: p0 size != N * n_u");
    }
    s.p = ControlParameter<Scalar>(solver_.bounds.project(p), solver_.bounds);
    s.q = config_.initial_budget();
    s.t = 0;
    return s;
  }

  /// One full updating interval: shift the warm start, predict ahead over
  /// the interval, run the iteration batch against the predicted state
  /// while the stored controls drive the real plant, then measure, update
  /// the budget, and advance the updating instant.
  StepOutput step_interval(const ExtendedState<Scalar>& state) const {
    const int q = state.q;
    if (q < 2) throw std::invalid_argument("step_interval: budget must be >= 2");
    const Index nu = plant_.input_dim();

    const ControlParameter<Scalar> p_plus =
        config_.warm_start ? warm_start_shift(state.p, q, nu) : state.p;
    const VectorX<Scalar> x_hat = predict(plant_, state.x, state.p, q);

    const Scalar J_k = CostSlice<Scalar>(cost_, state.x, state.t).value(state.p.values);

    CostSlice<Scalar> ahead(cost_, x_hat, state.t + q);
    auto [p_new, log] = fast_gradient(ahead, p_plus.values, q, solver_);

    IntervalRecord<Scalar> rec;
    rec.t_start = state.t;
    rec.q = q;
    rec.restarts = static_cast<int>(log.restart_indices.size());
    rec.applied = state.p.values.head(q * nu);
    rec.states.resize(plant_.state_dim(), q);
    VectorX<Scalar> x_cursor = state.x;
    for (int k = 0; k < q; ++k) {
      const VectorX<Scalar> u = state.p.values.segment(k * nu, nu);
      x_cursor = simulate_real(plant_, x_cursor, u, Index(1), config_.disturbance, state.t + k);
      rec.states.col(k) = x_cursor;
    }
    const VectorX<Scalar>& x_next = x_cursor;
    const Scalar J_next = CostSlice<Scalar>(cost_, x_next, state.t + q).value(p_new);

    MonitorState<Scalar>& m = rec.monitor;
    m.q = q;
    m.delta = config_.delta;
    m.q_max = config_.q_max;
    m.J_k = J_k;
    m.J_k_plus = log.initial_cost();
    m.J_hat_next = log.final_cost();
    m.J_next = J_next;
    m.E_k = estimate_E(m.J_hat_next, m.J_k_plus);
    m.alpha_D = estimate_alpha_D(m.J_next, m.J_hat_next, m.J_k_plus, m.J_k, q);
    m.D_k = Scalar(1) + m.alpha_D * Scalar(q);
    m.K_k = m.E_k * m.D_k;
    m.dE_dq = estimate_dE_dq(log);
    m.dK_dq = estimate_dK_dq(m.E_k, m.D_k, m.dE_dq, m.alpha_D);

    const UpdateDecision<Scalar> decision = update_q(m, cost_.horizon(), config_.guard);
    m.gamma = decision.gamma;
    m.branch = decision.branch;
    rec.q_next = config_.adaptive ? decision.q_next : q;

    StepOutput out;
    out.next.x = x_next;
    out.next.p = ControlParameter<Scalar>(std::move(p_new), solver_.bounds);
    out.next.q = rec.q_next;
    out.next.t = state.t + q;
    out.record = std::move(rec);
    return out;
  }

  /// Run the scenario to the configured duration. A final stretch shorter
  /// than the pending budget is driven by the remaining stored controls
  /// without another solve.
  Trace<Scalar> run() const {
    const Index duration = config_.duration;
    const Index nu = plant_.input_dim();

    Trace<Scalar> trace;
    trace.config = config_;
    trace.lambda_min = lambda_min_;
    trace.lambda_max = lambda_max_;
    trace.lipschitz = solver_.lipschitz;
    trace.momentum = solver_.momentum;
    trace.states.resize(plant_.state_dim(), duration + 1);
    trace.controls.resize(nu, duration);
    trace.budget.assign(static_cast<std::size_t>(duration), 0);

    ExtendedState<Scalar> state = initial_state();
    trace.states.col(0) = state.x;

    while (state.t + state.q <= duration) {
      StepOutput out = step_interval(state);
      const auto& rec = out.record;
      for (int k = 0; k < rec.q; ++k) {
        trace.states.col(rec.t_start + k + 1) = rec.states.col(k);
        trace.controls.col(rec.t_start + k) = rec.applied.segment(k * nu, nu);
        trace.budget[static_cast<std::size_t>(rec.t_start + k)] = rec.q;
      }
      trace.intervals.push_back(std::move(out.record));
      state = std::move(out.next);
    }

    // truncated tail: apply what is stored, no further update
    const Index remaining = duration - state.t;
    VectorX<Scalar> x_cursor = state.x;
    for (Index k = 0; k < remaining; ++k) {
      const VectorX<Scalar> u = state.p.values.segment(k * nu, nu);
      x_cursor = simulate_real(plant_, x_cursor, u, Index(1), config_.disturbance, state.t + k);
      trace.states.col(state.t + k + 1) = x_cursor;
      trace.controls.col(state.t + k) = u;
    }
    return trace;
  }

 private:
  ScenarioConfig<Scalar> config_;
  LinearPlant<Scalar> plant_;
  CondensedCost<Scalar> cost_;
  SolverConfig<Scalar> solver_;
  Scalar lambda_min_{}, lambda_max_{};
};

template <typename Scalar>
Trace<Scalar> run_scenario(const ScenarioConfig<Scalar>& config) {
  return ClosedLoopEngine<Scalar>(config).run();
}

}  // namespace rtmpc
