#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "lowrl/anchors.hpp"
#include "lowrl/envs.hpp"
#include "lowrl/grid.hpp"
#include "lowrl/me.hpp"
#include "lowrl/schedule.hpp"

namespace lowrl {

// Interpolated Q oracle: 1-nearest-neighbor over both grids. A default
// constructed oracle is Q^(0) == 0.
struct QOracle {
  std::shared_ptr<const GridNet> s_grid;
  std::shared_ptr<const GridNet> a_grid;
  Matrix values;
  Vector v_cache;  // per-state row max

  bool is_zero() const { return !s_grid; }

  static QOracle zero() { return {}; }
  static QOracle interpolate(std::shared_ptr<const GridNet> s,
                             std::shared_ptr<const GridNet> a, Matrix q);

  double q_at(const Vector& s, const Vector& a) const;
  double v_of(const Vector& s) const;
  // argmax over the action grid; ties resolved to the lowest index.
  Index greedy_action(const Vector& s) const;
};

// Per-iteration working table; stages only advance forward.
struct QTable {
  enum class Stage { explored, estimated, interpolated };

  std::shared_ptr<const GridNet> s_grid;
  std::shared_ptr<const GridNet> a_grid;
  ExplorationSet omega;
  MaskedMatrix qhat;  // explored values on omega
  Matrix qbar;        // estimated
  Stage stage = Stage::explored;

  void advance(Stage next);
};

enum class MeVariant { none, rank1, rank2, rankr, usvt, soft_impute };

const char* to_string(MeVariant v);
MeVariant me_variant_from_string(const std::string& name);

struct MeMethodChoice {
  MeVariant variant = MeVariant::rankr;
  double rank_tol = 1e-10;
  double usvt_threshold = 1.0;
  double soft_lambda = 1.0;
  int soft_max_iters = 200;
  double soft_tol = 1e-4;
  bool clip = true;  // clip baseline outputs to [-V_max, V_max]
};

struct IterationStats {
  int t = 0;
  Index n_states = 0;
  Index n_actions = 0;
  std::size_t n_omega = 0;
  int n_per_entry = 0;
  std::int64_t samples = 0;
  double sigma_r = std::numeric_limits<double>::quiet_NaN();
  double beta_s = 0.0;
  double beta_a = 0.0;
  double wall_ms = 0.0;
};

struct MetricsRow {
  int t = 0;
  std::int64_t cum_samples = 0;
  double linf_err = std::numeric_limits<double>::quiet_NaN();
  double mean_err = std::numeric_limits<double>::quiet_NaN();
  Index n_states = 0;
  Index n_actions = 0;
  std::size_t n_omega = 0;
  int n_per_entry = 0;
  double sigma_r = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

using MetricsTrace = std::vector<MetricsRow>;

struct EngineOptions {
  std::uint64_t master_seed = 0;
  int threads = 1;
};

// One-step lookahead (empirical Bellman backup): draws exactly n transition
// samples and returns R(s,a) + gamma * mean of v over the sampled next
// states. Deterministic environments short-circuit the draws but count all
// n samples.
double lookahead(const MdpSpec& env, const Vector& s, const Vector& a,
                 const std::function<double(const Vector&)>& v, int n,
                 RngStream& rng, SampleCounter& counter);

// Alg iteration t: discretize, augment, explore omega, matrix-estimate,
// interpolate. The previous oracle supplies the value function for the
// lookahead.
std::pair<QOracle, IterationStats> run_iteration(
    const MdpSpec& env, const QOracle& q_prev, int t, const Schedule& sched,
    const AnchorSet& anchors, const MeMethodChoice& me,
    const EngineOptions& opts, SampleCounter& counter);

struct RunResult {
  QOracle final_oracle;
  MetricsTrace trace;
  std::int64_t total_samples = 0;
};

// (linf, mean) error of an oracle against some reference.
using ErrorFn = std::function<std::pair<double, double>(const QOracle&)>;

// T iterations from Q^(0) == 0; when error_fn is supplied, per-iteration
// errors are recorded in the trace.
RunResult run_algorithm(const MdpSpec& env, const Schedule& sched,
                        const AnchorSet& anchors, const MeMethodChoice& me,
                        const EngineOptions& opts,
                        const ErrorFn& error_fn = nullptr);

}  // namespace lowrl
