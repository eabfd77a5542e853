#include "rtmpc/presets.hpp"

#include <fstream>
#include <stdexcept>

#include "rtmpc/config_io.hpp"
#include "rtmpc/trace_io.hpp"

namespace rtmpc {

namespace {

ScenarioConfig<double> benchmark_base(Index horizon) {
  ScenarioConfig<double> c;
  c.tau_c = 0.02;
  c.horizon = horizon;
  c.output_weight = 100.0;
  c.input_weight = 1.0;
  c.cost_floor = 1.0;
  c.input_bound = 1.0;
  c.restart_threshold = 8;
  c.delta = 10;
  c.q_max = 100;
  c.duration = 3200;
  c.reference = ReferenceSignal<double>::alternating(0.6, 600, c.duration + horizon + 1);
  return c;
}

}  // namespace

const std::vector<std::string>& scenario_preset_names() {
  static const std::vector<std::string> names = {"fig2", "fig3", "fig4", "fig5",
                                                 "fig6", "fig7", "fig8"};
  return names;
}

bool is_scenario_preset(const std::string& name) {
  for (const auto& n : scenario_preset_names()) {
    if (n == name) return true;
  }
  return false;
}

ScenarioConfig<double> scenario_preset(const std::string& name) {
  if (name == "fig2") {
    auto c = benchmark_base(200);
    c.adaptive = true;
    c.q_init = 2;
    return c;
  }
  if (name == "fig3") {
    auto c = benchmark_base(200);
    c.adaptive = true;
    c.q_init = 100;
    return c;
  }
  if (name == "fig4") {
    auto c = benchmark_base(200);
    c.adaptive = false;
    c.q_constant = 2;
    return c;
  }
  if (name == "fig5") {
    auto c = benchmark_base(200);
    c.adaptive = false;
    c.q_constant = 100;
    return c;
  }
  if (name == "fig6") {
    auto c = benchmark_base(200);
    c.adaptive = false;
    c.q_constant = 20;
    return c;
  }
  if (name == "fig7") {
    auto c = benchmark_base(100);
    c.adaptive = false;
    c.q_constant = 20;
    return c;
  }
  if (name == "fig8") {
    auto c = benchmark_base(100);
    c.adaptive = true;
    c.q_init = 20;
    return c;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

Fig1Config::Fig1Config() : base(scenario_preset("fig2")) {}

std::vector<double> Fig1Result::relative_decrease(const IterationLog<double>& log) {
  std::vector<double> out;
  out.reserve(log.costs.size());
  const double j0 = std::abs(log.costs.front());
  for (double j : log.costs) out.push_back((j - log.costs.front()) / j0);
  return out;
}

Fig1Result run_fig1(const Fig1Config& config) {
  if (config.iterations < 1) throw std::invalid_argument("fig1: iterations must be >= 1");
  if (config.snapshot_interval < 0) throw std::invalid_argument("fig1: negative snapshot index");

  ClosedLoopEngine<double> engine(config.base);
  ExtendedState<double> state = engine.initial_state();
  for (Index i = 0; i < config.snapshot_interval; ++i) {
    if (state.t + state.q > config.base.duration) {
      throw std::invalid_argument("fig1: snapshot interval beyond the scenario");
    }
    state = engine.step_interval(state).next;
  }

  Fig1Result result;
  result.snapshot_interval = config.snapshot_interval;
  result.t_start = state.t;
  result.snapshot_q = state.q;
  result.k0 = state.t + state.q;
  const ControlParameter<double> p_plus =
      config.base.warm_start ? warm_start_shift(state.p, state.q, engine.plant().input_dim())
                             : state.p;
  result.p_start = p_plus.values;
  result.x_hat = predict(engine.plant(), state.x, state.p, state.q);
  result.lipschitz = engine.solver().lipschitz;
  result.momentum = engine.solver().momentum;

  CostSlice<double> slice(engine.cost(), result.x_hat, result.k0);
  SolverConfig<double> pure = engine.solver();
  pure.momentum = 0.0;
  pure.restart_threshold = kNoRestart;
  SolverConfig<double> no_restart = engine.solver();
  no_restart.restart_threshold = kNoRestart;
  SolverConfig<double> restart5 = engine.solver();
  restart5.restart_threshold = 5;
  SolverConfig<double> restart8 = engine.solver();
  restart8.restart_threshold = 8;

  result.pure_gradient = fast_gradient(slice, result.p_start, config.iterations, pure).second;
  result.fast_no_restart =
      fast_gradient(slice, result.p_start, config.iterations, no_restart).second;
  result.fast_restart_5 = fast_gradient(slice, result.p_start, config.iterations, restart5).second;
  result.fast_restart_8 = fast_gradient(slice, result.p_start, config.iterations, restart8).second;

  const auto solved = solve_to_tolerance(slice, result.p_start, restart8, 1e-9, 500000);
  result.optimal_cost = slice.value(solved.parameter);
  return result;
}

void write_fig1(const Fig1Result& result, const Fig1Config& config,
                const std::filesystem::path& directory, const std::string& prefix) {
  std::filesystem::create_directories(directory);
  const auto path = directory / (prefix + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "q,pure_gradient,fast_no_restart,fast_restart_5,fast_restart_8\n";
  const auto pg = Fig1Result::relative_decrease(result.pure_gradient);
  const auto fn = Fig1Result::relative_decrease(result.fast_no_restart);
  const auto f5 = Fig1Result::relative_decrease(result.fast_restart_5);
  const auto f8 = Fig1Result::relative_decrease(result.fast_restart_8);
  for (std::size_t q = 0; q < pg.size(); ++q) {
    out << q << ',' << format_full(pg[q]) << ',' << format_full(fn[q]) << ','
        << format_full(f5[q]) << ',' << format_full(f8[q]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());

  const auto meta_path = directory / (prefix + kMetaSuffix);
  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open for writing: " + meta_path.string());
  meta << serialize_scenario(config.base);
  meta << "\n[fig1]\n";
  meta << "snapshot_interval = " << result.snapshot_interval << '\n';
  meta << "t_start = " << result.t_start << '\n';
  meta << "k0 = " << result.k0 << '\n';
  meta << "snapshot_q = " << result.snapshot_q << '\n';
  meta << "iterations = " << config.iterations << '\n';
  meta << "initial_cost = " << format_full(result.pure_gradient.initial_cost()) << '\n';
  meta << "optimal_cost = " << format_full(result.optimal_cost) << '\n';
  meta << "lipschitz = " << format_full(result.lipschitz) << '\n';
  meta << "momentum = " << format_full(result.momentum) << '\n';
  if (!meta) throw std::runtime_error("write failed: " + meta_path.string());
}

std::vector<SweepRow> run_sweep(const ScenarioConfig<double>& base,
                                const std::vector<int>& budgets) {
  std::vector<SweepRow> rows;
  const auto plant = discretize_triple_integrator(base.tau_c);
  for (int q : budgets) {
    ScenarioConfig<double> c = base;
    c.adaptive = false;
    c.q_constant = q;
    const Trace<double> trace = run_scenario(c);
    SweepRow row;
    row.q = q;
    row.tracking_cost = cumulative_tracking_cost(trace, plant);
    row.final_cost = trace.intervals.empty() ? 0.0 : trace.intervals.back().monitor.J_next;
    row.intervals = static_cast<Index>(trace.intervals.size());
    rows.push_back(row);
  }
  return rows;
}

void write_sweep(const std::vector<SweepRow>& rows, const ScenarioConfig<double>& base,
                 const std::filesystem::path& directory, const std::string& prefix) {
  std::filesystem::create_directories(directory);
  const auto path = directory / (prefix + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "q,tracking_cost,final_cost,intervals\n";
  for (const auto& row : rows) {
    out << row.q << ',' << format_full(row.tracking_cost) << ',' << format_full(row.final_cost)
        << ',' << row.intervals << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());

  const auto meta_path = directory / (prefix + kMetaSuffix);
  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open for writing: " + meta_path.string());
  meta << serialize_scenario(base);
  if (!meta) throw std::runtime_error("write failed: " + meta_path.string());
}

double mean_budget_final_half(const Trace<double>& trace) {
  double sum = 0;
  Index count = 0;
  for (Index t = trace.duration() / 2; t < trace.duration(); ++t) {
    const int q = trace.budget[static_cast<std::size_t>(t)];
    if (q > 0) {
      sum += q;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace rtmpc
