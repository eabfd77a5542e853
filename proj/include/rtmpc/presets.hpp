#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "rtmpc/closed_loop.hpp"
#include "rtmpc/solver.hpp"

namespace rtmpc {

/// Closed-loop scenario presets fig2..fig8. Shared settings: triple
/// integrator at tau_c = 0.02, N-step horizon, Q = 100, R = 1, |u| <= 1,
/// restart threshold 8, q_max = 100, delta = 10, square-wave reference of
/// amplitude 0.6 toggling every 600 periods, duration 3200.
///
///   fig2: adaptive, N = 200, q_init = 2      fig3: adaptive, N = 200, q_init = 100
///   fig4: constant q = 2,   N = 200          fig5: constant q = 100, N = 200
///   fig6: constant q = 20,  N = 200          fig7: constant q = 20,  N = 100
///   fig8: adaptive, N = 100, q_init = 20
bool is_scenario_preset(const std::string& name);
ScenarioConfig<double> scenario_preset(const std::string& name);
const std::vector<std::string>& scenario_preset_names();

/// Single-instant solver comparison: freeze the optimization instance the
/// engine would hand the solver at one interval of the fig2 scenario, then
/// run four solver configurations from the same warm start.
struct Fig1Config {
  ScenarioConfig<double> base;      // defaults to the fig2 preset
  Index snapshot_interval = 75;     // which updating interval to freeze
  int iterations = 100;

  Fig1Config();
};

struct Fig1Result {
  Index snapshot_interval = 0;
  Index t_start = 0;    // updating instant of the frozen interval
  Index k0 = 0;         // absolute step the frozen cost window starts at
  int snapshot_q = 0;   // budget the engine had decided for that interval
  VectorX<double> x_hat;
  VectorX<double> p_start;
  double optimal_cost = 0;  // high-accuracy solve on the frozen instance
  double lipschitz = 0;
  double momentum = 0;

  // cost logs, each of length iterations + 1
  IterationLog<double> pure_gradient;     // c = 0
  IterationLog<double> fast_no_restart;   // tuned c, no restart
  IterationLog<double> fast_restart_5;    // tuned c, s_max = 5
  IterationLog<double> fast_restart_8;    // tuned c, s_max = 8

  /// (J(p^(q)) - J(p^(0))) / |J(p^(0))| for one log.
  static std::vector<double> relative_decrease(const IterationLog<double>& log);
};

Fig1Result run_fig1(const Fig1Config& config);

/// fig1 CSV: one row per iteration count with the four relative-decrease
/// curves, plus the meta echo of the underlying scenario.
void write_fig1(const Fig1Result& result, const Fig1Config& config,
                const std::filesystem::path& directory, const std::string& prefix);

/// Constant-budget baseline sweep over one scenario.
struct SweepRow {
  int q = 0;
  double tracking_cost = 0;
  double final_cost = 0;  // J at the last completed interval
  Index intervals = 0;
};

std::vector<SweepRow> run_sweep(const ScenarioConfig<double>& base, const std::vector<int>& budgets);

void write_sweep(const std::vector<SweepRow>& rows, const ScenarioConfig<double>& base,
                 const std::filesystem::path& directory, const std::string& prefix);

/// Period-weighted mean of the active budget over the final half of a run.
double mean_budget_final_half(const Trace<double>& trace);

}  // namespace rtmpc
