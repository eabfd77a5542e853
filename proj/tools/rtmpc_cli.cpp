// Scenario runner: executes closed-loop presets or config files and writes
// plot-ready CSV traces.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "rtmpc/config_io.hpp"
#include "rtmpc/presets.hpp"
#include "rtmpc/trace_io.hpp"

namespace {

rtmpc::ScenarioConfig<double> resolve_config(const std::string& source,
                                             const std::vector<std::string>& overrides) {
  rtmpc::ScenarioConfig<double> config;
  if (rtmpc::is_scenario_preset(source)) {
    config = rtmpc::scenario_preset(source);
  } else if (std::filesystem::exists(source)) {
    config = rtmpc::load_scenario_file(source);
  } else {
    throw std::invalid_argument("'" + source +
                                "' is neither a preset (fig1..fig8) nor a config file");
  }
  for (const auto& assignment : overrides) rtmpc::apply_override(config, assignment);
  return config;
}

std::string default_prefix(const std::string& source) {
  if (rtmpc::is_scenario_preset(source)) return source;
  return std::filesystem::path(source).stem().string();
}

int fig1_command(long instant, int iterations, const std::string& out_dir,
                 const std::string& prefix, const std::vector<std::string>& overrides) {
  rtmpc::Fig1Config config;
  for (const auto& assignment : overrides) rtmpc::apply_override(config.base, assignment);
  config.snapshot_interval = instant;
  config.iterations = iterations;
  const auto result = rtmpc::run_fig1(config);
  rtmpc::write_fig1(result, config, out_dir, prefix);
  std::printf("%s: instance at t=%ld (interval %ld, q=%d), J0=%.6g, J*=%.6g\n", prefix.c_str(),
              static_cast<long>(result.t_start), static_cast<long>(result.snapshot_interval),
              result.snapshot_q, result.pure_gradient.initial_cost(), result.optimal_cost);
  return 0;
}

int run_command(const std::string& source, const std::string& out_dir, std::string prefix,
                const std::vector<std::string>& overrides, bool verbose) {
  if (source == "fig1") {  // the solver-sweep figure is runnable as a preset too
    const rtmpc::Fig1Config defaults;
    return fig1_command(defaults.snapshot_interval, defaults.iterations, out_dir,
                        prefix.empty() ? "fig1" : prefix, overrides);
  }
  const auto config = resolve_config(source, overrides);
  if (prefix.empty()) prefix = default_prefix(source);
  const auto trace = rtmpc::run_scenario(config);
  rtmpc::write_trace(trace, out_dir, prefix);
  const auto plant = rtmpc::discretize_triple_integrator(config.tau_c);
  std::printf("%s: %zu intervals over %ld periods, tracking cost %.6g\n", prefix.c_str(),
              trace.intervals.size(), static_cast<long>(trace.duration()),
              rtmpc::cumulative_tracking_cost(trace, plant));
  if (verbose) {
    std::printf("  lambda_min=%.9g lambda_max=%.9g L=%.9g c=%.9g\n", trace.lambda_min,
                trace.lambda_max, trace.lipschitz, trace.momentum);
    std::printf("  mean budget (final half) = %.3f\n", rtmpc::mean_budget_final_half(trace));
    std::printf("  wrote %s/%s{%s,%s,%s}\n", out_dir.c_str(), prefix.c_str(),
                rtmpc::kSignalsSuffix, rtmpc::kIntervalsSuffix, rtmpc::kMetaSuffix);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"real-time MPC closed-loop simulator with adaptive iteration budgeting"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = "out";
  bool verbose = false;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "print resolved solver constants and file names");

  std::string run_source, run_prefix;
  std::vector<std::string> run_overrides;
  auto* run = app.add_subcommand("run", "run a scenario preset (fig2..fig8) or a config file");
  run->add_option("scenario", run_source, "preset name or config file path")->required();
  run->add_option("--prefix", run_prefix, "output file prefix (default: preset/config name)");
  run->add_option("--set", run_overrides, "override, e.g. --set run.duration=1600");

  long fig1_instant = rtmpc::Fig1Config().snapshot_interval;
  int fig1_iterations = 100;
  std::string fig1_prefix = "fig1";
  std::vector<std::string> fig1_overrides;
  auto* fig1 = app.add_subcommand(
      "fig1", "single-instant solver comparison (pure / no-restart / s_max 5 / s_max 8)");
  fig1->add_option("--instant", fig1_instant, "updating interval of the fig2 scenario to freeze")
      ->capture_default_str();
  fig1->add_option("--iterations", fig1_iterations, "iteration count per curve")
      ->capture_default_str();
  fig1->add_option("--prefix", fig1_prefix, "output file prefix")->capture_default_str();
  fig1->add_option("--set", fig1_overrides, "override on the underlying fig2 scenario");

  std::string sweep_source = "fig6", sweep_prefix = "sweep";
  std::vector<std::string> sweep_overrides;
  std::vector<int> sweep_budgets = {2, 5, 10, 20, 30, 50, 100};
  auto* sweep = app.add_subcommand("sweep", "constant-budget baseline sweep");
  sweep->add_option("scenario", sweep_source, "base preset or config file")
      ->capture_default_str();
  sweep->add_option("--budgets", sweep_budgets, "budgets to sweep")->delimiter(',');
  sweep->add_option("--prefix", sweep_prefix, "output file prefix")->capture_default_str();
  sweep->add_option("--set", sweep_overrides, "override on the base scenario");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(run_source, out_dir, run_prefix, run_overrides, verbose);
    }
    if (fig1->parsed()) {
      return fig1_command(fig1_instant, fig1_iterations, out_dir, fig1_prefix, fig1_overrides);
    }
    if (sweep->parsed()) {
      auto config = resolve_config(sweep_source, sweep_overrides);
      const auto rows = rtmpc::run_sweep(config, sweep_budgets);
      rtmpc::write_sweep(rows, config, out_dir, sweep_prefix);
      std::printf("%6s %16s %14s %10s\n", "q", "tracking_cost", "final_cost", "intervals");
      for (const auto& row : rows) {
        std::printf("%6d %16.8g %14.8g %10ld\n", row.q, row.tracking_cost, row.final_cost,
                    static_cast<long>(row.intervals));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
