#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lowrl/engine.hpp"

namespace lowrl {

// Parsed experiment configuration. Files are flat `key = value` lines with
// dotted sections and '#' comments; unknown keys are hard errors and every
// validation problem is reported before aborting.
struct ExperimentConfig {
  // env.*
  std::string env_name = "inverted_pendulum";
  std::optional<double> gamma;
  std::optional<double> tau;
  std::optional<double> noise_mu;
  std::optional<double> noise_sigma;
  std::optional<double> lipschitz_l;

  // me.*
  MeMethodChoice me;

  // anchors.*
  int anchors_r = 10;
  std::optional<std::uint64_t> anchors_seed;  // default: derived from seed

  // schedule.*
  std::string schedule_mode = "table";     // "table" | "theory"
  std::string schedule_growth = "halving"; // "halving" | "fixed" (table mode)
  int t_max = 10;
  double delta = 0.1;
  double c_me = 1.0;          // theory mode
  double big_c_me = 1.0;      // theory mode
  int n_samples = 32;         // table mode
  std::vector<int> s_grid;    // table mode per-dim count caps
  std::vector<int> a_grid;

  // proxy.*
  std::vector<int> proxy_s_grid;
  std::vector<int> proxy_a_grid;
  int proxy_noise_draws = 5;
  double proxy_tol = 1e-4;
  int proxy_max_sweeps = 2000;

  // rollout.*
  int rollout_episodes = 20;
  int rollout_horizon = 500;
  std::string rollout_source = "learned";  // "learned" | "proxy"

  // bench.*
  std::vector<std::string> bench_methods = {"rankr", "usvt", "soft_impute"};
  std::vector<double> bench_soft_lambda_sweep = {0.1, 1.0, 10.0};
  std::vector<double> bench_usvt_threshold_sweep = {0.2, 1.0, 5.0};

  // rank.*
  int rank_max_r = 20;
  std::vector<double> rank_deltas = {1e-1, 1e-2, 1e-3, 1e-4};  // relative

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int threads = 1;
  std::string out_dir = "out";

  std::string canonical_text;  // normalized key=value dump
  std::uint64_t config_hash = 0;

  MdpSpec build_env() const;
  Schedule build_schedule(const MdpSpec& env) const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Environment variable naming the proxy cache directory; falls back to
// <out_dir>/cache.
inline constexpr const char* kCacheDirEnvVar = "LOWRL_CACHE_DIR";
std::string cache_dir(const ExperimentConfig& cfg);

}  // namespace lowrl
