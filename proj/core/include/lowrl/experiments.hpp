#pragma once

#include <string>
#include <vector>

#include "lowrl/config.hpp"
#include "lowrl/oracle.hpp"

namespace lowrl {

// Build the Q* proxy for the configured env, reusing the on-disk cache when
// the key (env hash, grids, gamma, quadrature, tol) matches.
QStarProxy get_or_build_proxy(const ExperimentConfig& cfg, const MdpSpec& env,
                              bool force_rebuild = false);

struct SeedRun {
  std::uint64_t seed = 0;
  MetricsTrace trace;
};

struct ExperimentOutput {
  std::vector<SeedRun> runs;
  std::vector<std::string> files;
};

// Full experiment: per-seed runs, per-seed CSVs, aggregate CSV (mean and
// stddev per iteration), final Q tables and a machine-readable manifest.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// ME method comparison under equal per-iteration sample budgets; baseline
// estimators are swept over their hyperparameter lists and the best run is
// recorded.
ExperimentOutput me_benchmark(const ExperimentConfig& cfg);

struct RolloutReport {
  std::string metric;  // "angular_deviation" | "time_to_goal"
  double mean = 0.0;
  double stddev = 0.0;
  int episodes = 0;
  int horizon = 0;
};

// Greedy-policy rollouts; source is "proxy" (optimal stand-in) or "learned"
// (per-seed final Q tables saved by run_experiment).
RolloutReport rollout(const ExperimentConfig& cfg, const std::string& source);
RolloutReport rollout_oracle(const ExperimentConfig& cfg, const MdpSpec& env,
                             const QOracle& oracle, std::uint64_t seed_base);

struct RankDiagnostics {
  SingularSpectrum spectrum;
  std::vector<std::pair<double, int>> effective_ranks;  // (delta_abs, r*)
  std::vector<double> zetas;                            // zeta_r, r = 1..
};

RankDiagnostics rank_diagnostics(const ExperimentConfig& cfg);

// Render Fig.-style SVG curves from the CSVs in a directory; returns the
// files written (empty when there is nothing to plot).
std::vector<std::string> emit_plots(const std::string& csv_dir);

// Internal helpers exposed for tests.
AnchorSet anchors_for_seed(const ExperimentConfig& cfg, const MdpSpec& env,
                           std::uint64_t seed);
std::vector<int> default_proxy_counts(const BoxSpace& space, bool actions);
std::string proxy_cache_path(const ExperimentConfig& cfg, const MdpSpec& env);

}  // namespace lowrl
