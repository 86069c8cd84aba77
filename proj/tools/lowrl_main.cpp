#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "lowrl/experiments.hpp"
#include "lowrl/table_io.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string out_override;
  int threads_override = 0;
};

lowrl::ExperimentConfig load(const GlobalArgs& g) {
  lowrl::ExperimentConfig cfg = lowrl::parse_config_file(g.config_path);
  if (g.seed_override) cfg.seeds = {*g.seed_override};
  if (!g.out_override.empty()) cfg.out_dir = g.out_override;
  if (g.threads_override > 0) cfg.threads = g.threads_override;
  return cfg;
}

void print_trace_summary(const lowrl::ExperimentOutput& out) {
  for (const auto& run : out.runs) {
    if (run.trace.empty()) continue;
    const auto& last = run.trace.back();
    std::printf("seed %llu: T=%d samples=%lld linf=%.6g mean=%.6g\n",
                static_cast<unsigned long long>(run.seed), last.t,
                static_cast<long long>(last.cum_samples), last.linf_err,
                last.mean_err);
  }
  for (const auto& f : out.files) std::printf("wrote %s\n", f.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank RL for continuous control: iterative "
               "discretize/explore/matrix-estimate/interpolate"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "experiment config file")
      ->required();
  std::uint64_t seed_val = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_val, "override the master seed list");
  app.add_option("--out", g.out_override, "override the output directory");
  app.add_option("--threads", g.threads_override, "worker thread count");

  auto* cmd_oracle = app.add_subcommand(
      "oracle", "build or refresh the Q* proxy cache for the env");
  bool force = false;
  cmd_oracle->add_flag("--force", force, "rebuild even if cached");

  auto* cmd_run = app.add_subcommand(
      "run", "run the iterative algorithm for every seed and write CSVs");
  auto* cmd_bench = app.add_subcommand(
      "me-bench", "compare ME methods under equal sample budgets");
  auto* cmd_rank = app.add_subcommand(
      "rank", "singular spectrum, effective ranks and rank-r bias tables");
  auto* cmd_rollout =
      app.add_subcommand("rollout", "greedy-policy rollout metrics");
  std::string rollout_source;
  cmd_rollout->add_option("--source", rollout_source,
                          "proxy | learned (default: config)");
  auto* cmd_plot =
      app.add_subcommand("plot", "render SVG figures from emitted CSVs");
  std::string plot_dir;
  cmd_plot->add_option("--dir", plot_dir,
                       "CSV directory (default: config out_dir)");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) g.seed_override = seed_val;

  try {
    const lowrl::ExperimentConfig cfg = load(g);
    if (cmd_oracle->parsed()) {
      const lowrl::MdpSpec env = cfg.build_env();
      const auto proxy = lowrl::get_or_build_proxy(cfg, env, force);
      std::printf("proxy: %lld x %lld, sweeps=%d residual=%.3g%s\n",
                  static_cast<long long>(proxy.s_grid->size()),
                  static_cast<long long>(proxy.a_grid->size()), proxy.sweeps,
                  proxy.residual,
                  proxy.converged ? "" : " (not converged)");
      std::printf("cache: %s\n", lowrl::proxy_cache_path(cfg, env).c_str());
    } else if (cmd_run->parsed()) {
      print_trace_summary(lowrl::run_experiment(cfg));
    } else if (cmd_bench->parsed()) {
      print_trace_summary(lowrl::me_benchmark(cfg));
    } else if (cmd_rank->parsed()) {
      const auto diag = lowrl::rank_diagnostics(cfg);
      std::printf("spectrum size %lld, top sigma %.6g\n",
                  static_cast<long long>(diag.spectrum.size()),
                  diag.spectrum.size() ? diag.spectrum(0) : 0.0);
      for (const auto& [delta, r] : diag.effective_ranks)
        std::printf("r*(%.3g) = %d\n", delta, r);
    } else if (cmd_rollout->parsed()) {
      const std::string source =
          rollout_source.empty() ? cfg.rollout_source : rollout_source;
      const auto rep = lowrl::rollout(cfg, source);
      std::printf("%s (%s): %.4g +/- %.4g over %d episodes (horizon %d)\n",
                  rep.metric.c_str(), source.c_str(), rep.mean, rep.stddev,
                  rep.episodes, rep.horizon);
    } else if (cmd_plot->parsed()) {
      const std::string dir = plot_dir.empty() ? cfg.out_dir : plot_dir;
      const auto files = lowrl::emit_plots(dir);
      if (files.empty())
        std::printf("no plottable CSVs under '%s'; nothing to do\n",
                    dir.c_str());
      for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
    }
  } catch (const lowrl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
