#include "lowrl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "lowrl/csv.hpp"
#include "lowrl/table_io.hpp"

namespace fs = std::filesystem;

namespace lowrl {

namespace {

constexpr std::uint64_t kAnchorTag = 0x616e63ull;
constexpr std::uint64_t kRolloutTag = 0x726f6cull;

std::string seed_csv_name(std::uint64_t seed) {
  return "metrics_seed" + std::to_string(seed) + ".csv";
}

std::string qtable_name(std::uint64_t seed) {
  return "q_final_seed" + std::to_string(seed) + ".bin";
}

const std::vector<std::string> kSeedHeader = {
    "t",        "cum_samples", "linf_err", "mean_err", "n_states",
    "n_actions", "n_omega",    "n_per_entry", "sigma_r"};

CsvTable seed_csv(const MetricsTrace& trace) {
  CsvTable t;
  t.header = kSeedHeader;
  for (const auto& row : trace) {
    t.rows.push_back({std::to_string(row.t), std::to_string(row.cum_samples),
                      format_double(row.linf_err), format_double(row.mean_err),
                      std::to_string(row.n_states),
                      std::to_string(row.n_actions),
                      std::to_string(row.n_omega),
                      std::to_string(row.n_per_entry),
                      format_double(row.sigma_r)});
  }
  return t;
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return m;
}

CsvTable aggregate_csv(const std::vector<SeedRun>& runs) {
  CsvTable t;
  t.header = {"t",         "cum_samples", "linf_mean", "linf_std",
              "mean_mean", "mean_std",    "n"};
  if (runs.empty()) return t;
  const std::size_t T = runs.front().trace.size();
  for (std::size_t k = 0; k < T; ++k) {
    std::vector<double> linf, mean;
    for (const auto& run : runs) {
      linf.push_back(run.trace[k].linf_err);
      mean.push_back(run.trace[k].mean_err);
    }
    const Moments ml = moments(linf), mm = moments(mean);
    t.rows.push_back({std::to_string(runs.front().trace[k].t),
                      std::to_string(runs.front().trace[k].cum_samples),
                      format_double(ml.mean), format_double(ml.stddev),
                      format_double(mm.mean), format_double(mm.stddev),
                      std::to_string(runs.size())});
  }
  return t;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                    std::uint64_t env_hash,
                    const std::vector<std::string>& files,
                    const std::vector<double>& seed_wall_ms) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write manifest '" + path + "'");
  os << "{\n";
  os << "  \"tool\": \"lowrl\",\n";
  os << "  \"version\": \"0.1.0\",\n";
  os << "  \"config_hash\": \"" << std::hex << cfg.config_hash << std::dec
     << "\",\n";
  os << "  \"env_hash\": \"" << std::hex << env_hash << std::dec << "\",\n";
  os << "  \"seeds\": [";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    os << (i ? ", " : "") << cfg.seeds[i];
  os << "],\n";
  os << "  \"files\": [";
  for (std::size_t i = 0; i < files.size(); ++i)
    os << (i ? ", " : "") << '"' << json_escape(files[i]) << '"';
  os << "],\n";
  os << "  \"seed_wall_ms\": [";
  for (std::size_t i = 0; i < seed_wall_ms.size(); ++i)
    os << (i ? ", " : "") << format_double(seed_wall_ms[i]);
  os << "],\n";
  os << "  \"config\": \"" << json_escape(cfg.canonical_text) << "\"\n";
  os << "}\n";
}

std::vector<int> proxy_counts(const std::vector<int>& configured,
                              const BoxSpace& space, bool actions) {
  if (!configured.empty()) {
    if (static_cast<int>(configured.size()) != space.dims())
      throw ConfigError("proxy grid: wrong number of dims");
    return configured;
  }
  return default_proxy_counts(space, actions);
}

struct SeedRunFull {
  SeedRun run;
  QOracle final_oracle;
  double wall_ms = 0.0;
};

SeedRunFull run_one_seed(const ExperimentConfig& cfg, const MdpSpec& env,
                         const Schedule& sched,
                         const std::shared_ptr<const QStarProxy>& proxy,
                         std::uint64_t seed, int threads) {
  const auto start = std::chrono::steady_clock::now();
  SeedRunFull out;
  out.run.seed = seed;
  EngineOptions opts;
  opts.master_seed = seed;
  opts.threads = threads;
  const AnchorSet anchors = anchors_for_seed(cfg, env, seed);
  const ErrorFn err = proxy ? proxy_error_fn(proxy) : ErrorFn{};
  RunResult res = run_algorithm(env, sched, anchors, cfg.me, opts, err);
  out.run.trace = std::move(res.trace);
  out.final_oracle = std::move(res.final_oracle);
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return out;
}

double angle_target(const MdpSpec& env) {
  return env.task == Task::acrobot ? std::numbers::pi : 0.0;
}

double wrap_diff(double a, double b) {
  double d = std::fmod(a - b + std::numbers::pi, 2.0 * std::numbers::pi);
  if (d < 0.0) d += 2.0 * std::numbers::pi;
  return d - std::numbers::pi;
}

Vector rollout_start(const MdpSpec& env, RngStream& rng) {
  Vector s;
  switch (env.task) {
    case Task::inverted_pendulum:
      s = Vector(2);
      s << rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2);
      break;
    case Task::mountain_car:
      s = Vector(2);
      s << rng.uniform(-0.6, -0.4), 0.0;
      break;
    case Task::double_integrator:
      s = Vector(2);
      s << rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 0.5);
      break;
    case Task::cart_pole:
      s = Vector(4);
      s << rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
          rng.uniform(-0.1, 0.1), rng.uniform(-0.05, 0.05);
      break;
    case Task::acrobot:
      s = Vector(4);
      s << std::numbers::pi + rng.uniform(-0.2, 0.2),
          rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
          rng.uniform(-0.2, 0.2);
      break;
    default:
      s = Vector::Constant(env.state_space.dims(), 0.0);
  }
  return env.state_space.clamp(s);
}

bool goal_reached(const MdpSpec& env, const Vector& s) {
  switch (env.task) {
    case Task::mountain_car:
      return s(0) >= 0.5;
    case Task::double_integrator:
      return s.norm() <= 0.05;
    default:
      return false;
  }
}

bool is_angular_task(const MdpSpec& env) {
  return env.task == Task::inverted_pendulum || env.task == Task::cart_pole ||
         env.task == Task::acrobot;
}

}  // namespace

std::vector<int> default_proxy_counts(const BoxSpace& space, bool actions) {
  if (actions)
    return std::vector<int>(static_cast<std::size_t>(space.dims()),
                            space.dims() == 1 ? 1000 : 10);
  return std::vector<int>(static_cast<std::size_t>(space.dims()),
                          space.dims() <= 2 ? 50 : 10);
}

AnchorSet anchors_for_seed(const ExperimentConfig& cfg, const MdpSpec& env,
                           std::uint64_t seed) {
  const std::uint64_t aseed =
      cfg.anchors_seed ? *cfg.anchors_seed : RngStream::mix(seed, kAnchorTag);
  return select_anchors(env.state_space, env.action_space, cfg.anchors_r,
                        aseed);
}

std::string proxy_cache_path(const ExperimentConfig& cfg, const MdpSpec& env) {
  const auto sc = proxy_counts(cfg.proxy_s_grid, env.state_space, false);
  const auto ac = proxy_counts(cfg.proxy_a_grid, env.action_space, true);
  std::ostringstream key;
  key.precision(17);
  key << std::hex << hash_env(env) << std::dec << "_s";
  for (int c : sc) key << c << '.';
  key << "_a";
  for (int c : ac) key << c << '.';
  key << "_k" << cfg.proxy_noise_draws << "_tol" << cfg.proxy_tol;
  return cache_dir(cfg) + "/proxy_" +
         std::to_string(fnv1a(key.str())) + ".bin";
}

QStarProxy get_or_build_proxy(const ExperimentConfig& cfg, const MdpSpec& env,
                              bool force_rebuild) {
  const std::string path = proxy_cache_path(cfg, env);
  if (!force_rebuild && fs::exists(path)) {
    TableFile t = load_table(path);
    if (t.kind == 0 && t.env_hash == hash_env(env)) return table_to_proxy(std::move(t));
  }
  const auto sc = proxy_counts(cfg.proxy_s_grid, env.state_space, false);
  const auto ac = proxy_counts(cfg.proxy_a_grid, env.action_space, true);
  QStarProxy proxy =
      fine_grid_vi(env, sc, ac, cfg.proxy_noise_draws, cfg.proxy_tol,
                   cfg.proxy_max_sweeps, cfg.threads);
  fs::create_directories(fs::path(path).parent_path());
  save_table(path, proxy_to_table(proxy, hash_env(env)));
  return proxy;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  const MdpSpec env = cfg.build_env();
  const Schedule sched = cfg.build_schedule(env);
  const auto proxy = std::make_shared<const QStarProxy>(
      get_or_build_proxy(cfg, env, false));

  fs::create_directories(cfg.out_dir);

  const std::size_t n_seeds = cfg.seeds.size();
  const int pool = static_cast<int>(
      std::min<std::size_t>(n_seeds, static_cast<std::size_t>(cfg.threads)));
  const int inner =
      std::max(1, cfg.threads / std::max(1, pool));

  std::vector<SeedRunFull> fulls(n_seeds);
  if (pool <= 1) {
    for (std::size_t k = 0; k < n_seeds; ++k)
      fulls[k] = run_one_seed(cfg, env, sched, proxy, cfg.seeds[k],
                              cfg.threads);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < pool; ++w)
      workers.emplace_back([&]() {
        for (std::size_t k = next.fetch_add(1); k < n_seeds;
             k = next.fetch_add(1))
          fulls[k] = run_one_seed(cfg, env, sched, proxy, cfg.seeds[k], inner);
      });
    for (auto& th : workers) th.join();
  }

  ExperimentOutput out;
  std::vector<double> walls;
  const std::uint64_t env_hash = hash_env(env);
  for (std::size_t k = 0; k < n_seeds; ++k) {
    auto& full = fulls[k];
    const std::string csv_path =
        cfg.out_dir + "/" + seed_csv_name(full.run.seed);
    write_csv(csv_path, seed_csv(full.run.trace));
    out.files.push_back(csv_path);
    if (!full.final_oracle.is_zero()) {
      const std::string q_path = cfg.out_dir + "/" + qtable_name(full.run.seed);
      save_table(q_path,
                 oracle_to_table(full.final_oracle, env_hash, env.gamma));
      out.files.push_back(q_path);
    }
    walls.push_back(full.wall_ms);
    out.runs.push_back(std::move(full.run));
  }

  const std::string agg_path = cfg.out_dir + "/metrics_aggregate.csv";
  write_csv(agg_path, aggregate_csv(out.runs));
  out.files.push_back(agg_path);

  write_manifest(cfg.out_dir + "/manifest.json", cfg, env_hash, out.files,
                 walls);
  out.files.push_back(cfg.out_dir + "/manifest.json");
  return out;
}

ExperimentOutput me_benchmark(const ExperimentConfig& cfg) {
  const MdpSpec env = cfg.build_env();
  const Schedule sched = cfg.build_schedule(env);
  if (cfg.bench_methods.empty())
    throw ConfigError("me_benchmark: bench.methods must be nonempty");
  for (const auto& m : cfg.bench_methods)
    if (m == "none")
      throw ConfigError(
          "me_benchmark compares ME methods under the cross budget; 'none' "
          "is the full-exploration baseline of `run`");
  const auto proxy = std::make_shared<const QStarProxy>(
      get_or_build_proxy(cfg, env, false));

  fs::create_directories(cfg.out_dir);

  CsvTable table;
  table.header = {"method",    "hyper",    "t",        "cum_samples",
                  "linf_mean", "linf_std", "mean_mean", "mean_std",
                  "n"};

  ExperimentOutput out;
  for (const auto& method : cfg.bench_methods) {
    const MeVariant variant = me_variant_from_string(method);
    // Hyperparameter candidates; anchor methods have none to sweep.
    std::vector<double> hypers = {0.0};
    if (variant == MeVariant::usvt) hypers = cfg.bench_usvt_threshold_sweep;
    if (variant == MeVariant::soft_impute)
      hypers = cfg.bench_soft_lambda_sweep;

    double best_final = std::numeric_limits<double>::infinity();
    std::vector<SeedRun> best_runs;
    double best_hyper = 0.0;
    for (double h : hypers) {
      ExperimentConfig sub = cfg;
      sub.me.variant = variant;
      if (variant == MeVariant::usvt) sub.me.usvt_threshold = h;
      if (variant == MeVariant::soft_impute) sub.me.soft_lambda = h;
      std::vector<SeedRun> runs;
      for (std::uint64_t seed : cfg.seeds) {
        auto full = run_one_seed(sub, env, sched, proxy, seed, cfg.threads);
        runs.push_back(std::move(full.run));
      }
      std::vector<double> finals;
      for (const auto& r : runs) finals.push_back(r.trace.back().mean_err);
      const double final_mean = moments(finals).mean;
      if (final_mean < best_final) {
        best_final = final_mean;
        best_runs = std::move(runs);
        best_hyper = h;
      }
    }

    const CsvTable agg = aggregate_csv(best_runs);
    for (const auto& row : agg.rows) {
      std::vector<std::string> cells = {method, format_double(best_hyper)};
      cells.insert(cells.end(), row.begin(), row.end());
      table.rows.push_back(std::move(cells));
    }
    for (auto& r : best_runs) out.runs.push_back(std::move(r));
  }

  const std::string path = cfg.out_dir + "/me_bench.csv";
  write_csv(path, table);
  out.files.push_back(path);
  return out;
}

namespace {

std::vector<double> rollout_metrics(const ExperimentConfig& cfg,
                                    const MdpSpec& env, const QOracle& oracle,
                                    std::uint64_t seed_base) {
  if (cfg.rollout_horizon < 1)
    throw ConfigError("rollout.horizon must be >= 1");
  const double target = angle_target(env);
  std::vector<double> metrics;
  SampleCounter counter;
  for (int ep = 0; ep < cfg.rollout_episodes; ++ep) {
    RngStream rng(seed_base, {kRolloutTag, static_cast<std::uint64_t>(ep)});
    Vector s = rollout_start(env, rng);
    double angle_acc = 0.0;
    int steps_to_goal = cfg.rollout_horizon;
    bool reached = false;
    for (int step_i = 0; step_i < cfg.rollout_horizon; ++step_i) {
      const Index aj = oracle.greedy_action(s);
      const Vector a = oracle.a_grid->point(aj);
      const Transition tr = sample_transition(env, s, a, rng, counter);
      s = tr.next_state;
      if (is_angular_task(env)) {
        angle_acc += std::abs(wrap_diff(s(0), target));
      } else if (!reached && goal_reached(env, s)) {
        steps_to_goal = step_i + 1;
        reached = true;
      }
    }
    if (is_angular_task(env)) {
      metrics.push_back(angle_acc / cfg.rollout_horizon * 180.0 /
                        std::numbers::pi);
    } else {
      metrics.push_back(static_cast<double>(steps_to_goal));
    }
  }
  return metrics;
}

RolloutReport report_from(const ExperimentConfig& cfg, const MdpSpec& env,
                          const std::vector<double>& metrics) {
  RolloutReport rep;
  rep.metric = is_angular_task(env) ? "angular_deviation" : "time_to_goal";
  rep.horizon = cfg.rollout_horizon;
  const Moments m = moments(metrics);
  rep.mean = m.mean;
  rep.stddev = m.stddev;
  rep.episodes = static_cast<int>(metrics.size());
  return rep;
}

}  // namespace

RolloutReport rollout_oracle(const ExperimentConfig& cfg, const MdpSpec& env,
                             const QOracle& oracle, std::uint64_t seed_base) {
  return report_from(cfg, env, rollout_metrics(cfg, env, oracle, seed_base));
}

RolloutReport rollout(const ExperimentConfig& cfg, const std::string& source) {
  const MdpSpec env = cfg.build_env();
  if (source == "proxy") {
    const QStarProxy proxy = get_or_build_proxy(cfg, env, false);
    const QOracle oracle =
        QOracle::interpolate(proxy.s_grid, proxy.a_grid, proxy.values);
    return rollout_oracle(cfg, env, oracle, cfg.seeds.front());
  }
  if (source != "learned")
    throw ConfigError("rollout source must be 'proxy' or 'learned'");

  // Pool episodes across every per-seed final table written by `run`.
  std::vector<double> all;
  for (std::uint64_t seed : cfg.seeds) {
    const std::string path = cfg.out_dir + "/" + qtable_name(seed);
    if (!fs::exists(path)) continue;
    const QOracle oracle = table_to_oracle(load_table(path));
    const auto metrics = rollout_metrics(cfg, env, oracle, seed);
    all.insert(all.end(), metrics.begin(), metrics.end());
  }
  if (all.empty())
    throw ConfigError("rollout: no learned Q tables found under '" +
                      cfg.out_dir + "'; run the `run` subcommand first");
  return report_from(cfg, env, all);
}

RankDiagnostics rank_diagnostics(const ExperimentConfig& cfg) {
  const MdpSpec env = cfg.build_env();
  const QStarProxy proxy = get_or_build_proxy(cfg, env, false);

  RankDiagnostics diag;
  diag.spectrum = svd_spectrum(proxy.values);
  const double total_energy = diag.spectrum.squaredNorm();
  std::vector<double> deltas_abs;
  for (double rel : cfg.rank_deltas) deltas_abs.push_back(rel * total_energy);
  const RankReport rep = approx_rank_report(proxy, deltas_abs);
  diag.effective_ranks = rep.ranks;
  const int max_r = std::min<int>(
      cfg.rank_max_r,
      static_cast<int>(std::min(proxy.values.rows(), proxy.values.cols())));
  for (int r = 1; r <= max_r; ++r) diag.zetas.push_back(bias_zeta(proxy, r));

  fs::create_directories(cfg.out_dir);
  CsvTable spec_csv;
  spec_csv.header = {"i", "sigma"};
  for (Index i = 0; i < diag.spectrum.size(); ++i)
    spec_csv.rows.push_back(
        {std::to_string(i + 1), format_double(diag.spectrum(i))});
  write_csv(cfg.out_dir + "/rank_spectrum.csv", spec_csv);

  CsvTable rank_csv;
  rank_csv.header = {"delta_rel", "delta_abs", "r_star"};
  for (std::size_t k = 0; k < cfg.rank_deltas.size(); ++k)
    rank_csv.rows.push_back({format_double(cfg.rank_deltas[k]),
                             format_double(deltas_abs[k]),
                             std::to_string(diag.effective_ranks[k].second)});
  write_csv(cfg.out_dir + "/rank_table.csv", rank_csv);

  const double linf = proxy.values.cwiseAbs().maxCoeff();
  CsvTable zeta_csv;
  zeta_csv.header = {"r", "zeta", "zeta_rel"};
  for (std::size_t k = 0; k < diag.zetas.size(); ++k)
    zeta_csv.rows.push_back({std::to_string(k + 1),
                             format_double(diag.zetas[k]),
                             format_double(diag.zetas[k] / linf)});
  write_csv(cfg.out_dir + "/rank_zeta.csv", zeta_csv);
  return diag;
}

}  // namespace lowrl
