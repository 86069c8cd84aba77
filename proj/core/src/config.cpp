#include "lowrl/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "lowrl/table_io.hpp"

namespace lowrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        errors.push_back("line " + std::to_string(lineno) +
                         ": expected 'key = value'");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        errors.push_back("line " + std::to_string(lineno) + ": empty key");
        continue;
      }
      if (kv.count(key))
        errors.push_back("duplicate key '" + key + "'");
      kv[key] = value;
    }
  }

  bool has(const std::string& key) {
    if (kv.count(key)) {
      seen.insert(seen.end(), key);
      return true;
    }
    return false;
  }

  std::string str(const std::string& key, const std::string& dflt) {
    return has(key) ? kv[key] : dflt;
  }

  double num(const std::string& key, double dflt) {
    if (!has(key)) return dflt;
    try {
      std::size_t pos = 0;
      const double v = std::stod(kv[key], &pos);
      if (pos != kv[key].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (...) {
      errors.push_back("key '" + key + "': not a number: '" + kv[key] + "'");
      return dflt;
    }
  }

  int integer(const std::string& key, int dflt) {
    const double v = num(key, static_cast<double>(dflt));
    if (v != static_cast<int>(v)) {
      errors.push_back("key '" + key + "': expected an integer");
      return dflt;
    }
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool dflt) {
    if (!has(key)) return dflt;
    const std::string& v = kv[key];
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    errors.push_back("key '" + key + "': expected true/false");
    return dflt;
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> dflt) {
    if (!has(key)) return dflt;
    std::vector<int> out;
    for (const auto& item : split_list(kv[key])) {
      try {
        out.push_back(std::stoi(item));
      } catch (...) {
        errors.push_back("key '" + key + "': bad integer '" + item + "'");
      }
    }
    return out;
  }

  std::vector<double> num_list(const std::string& key,
                               std::vector<double> dflt) {
    if (!has(key)) return dflt;
    std::vector<double> out;
    for (const auto& item : split_list(kv[key])) {
      try {
        out.push_back(std::stod(item));
      } catch (...) {
        errors.push_back("key '" + key + "': bad number '" + item + "'");
      }
    }
    return out;
  }

  std::vector<std::uint64_t> seed_list(const std::string& key,
                                       std::vector<std::uint64_t> dflt) {
    if (!has(key)) return dflt;
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(kv[key])) {
      try {
        out.push_back(std::stoull(item));
      } catch (...) {
        errors.push_back("key '" + key + "': bad seed '" + item + "'");
      }
    }
    return out;
  }

  void finish() {
    for (const auto& [key, value] : kv)
      if (std::find(seen.begin(), seen.end(), key) == seen.end())
        errors.push_back("unknown key '" + key + "'");
    if (!errors.empty()) {
      std::string msg = "config errors:";
      for (const auto& e : errors) msg += "\n  - " + e;
      throw ConfigError(msg);
    }
  }

  std::string canonical() const {
    std::string out;
    for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
    return out;
  }

  std::map<std::string, std::string> kv;
  std::vector<std::string> seen;
  std::vector<std::string> errors;
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  Parser p(text);
  ExperimentConfig c;

  c.env_name = p.str("env.name", c.env_name);
  if (p.has("env.gamma")) c.gamma = p.num("env.gamma", 0.9);
  if (p.has("env.tau")) c.tau = p.num("env.tau", 0.1);
  if (p.has("env.noise_mu")) c.noise_mu = p.num("env.noise_mu", 0.0);
  if (p.has("env.noise_sigma")) c.noise_sigma = p.num("env.noise_sigma", 0.0);
  if (p.has("env.lipschitz_l")) c.lipschitz_l = p.num("env.lipschitz_l", 1.0);

  c.me.variant = me_variant_from_string(
      p.str("me.method", to_string(c.me.variant)));
  c.me.rank_tol = p.num("me.rank_tol", c.me.rank_tol);
  c.me.usvt_threshold = p.num("me.usvt_threshold", c.me.usvt_threshold);
  c.me.soft_lambda = p.num("me.soft_lambda", c.me.soft_lambda);
  c.me.soft_max_iters = p.integer("me.soft_max_iters", c.me.soft_max_iters);
  c.me.soft_tol = p.num("me.soft_tol", c.me.soft_tol);
  c.me.clip = p.boolean("me.clip", c.me.clip);

  c.anchors_r = p.integer("anchors.r", c.anchors_r);
  if (p.has("anchors.seed"))
    c.anchors_seed = static_cast<std::uint64_t>(
        p.num("anchors.seed", 0.0));

  c.schedule_mode = p.str("schedule.mode", c.schedule_mode);
  c.schedule_growth = p.str("schedule.growth", c.schedule_growth);
  c.t_max = p.integer("schedule.t_max", c.t_max);
  c.delta = p.num("schedule.delta", c.delta);
  c.c_me = p.num("schedule.c_me", c.c_me);
  c.big_c_me = p.num("schedule.big_c_me", c.big_c_me);
  c.n_samples = p.integer("schedule.n_samples", c.n_samples);
  c.s_grid = p.int_list("schedule.s_grid", c.s_grid);
  c.a_grid = p.int_list("schedule.a_grid", c.a_grid);

  c.proxy_s_grid = p.int_list("proxy.s_grid", c.proxy_s_grid);
  c.proxy_a_grid = p.int_list("proxy.a_grid", c.proxy_a_grid);
  c.proxy_noise_draws = p.integer("proxy.noise_draws", c.proxy_noise_draws);
  c.proxy_tol = p.num("proxy.tol", c.proxy_tol);
  c.proxy_max_sweeps = p.integer("proxy.max_sweeps", c.proxy_max_sweeps);

  c.rollout_episodes = p.integer("rollout.episodes", c.rollout_episodes);
  c.rollout_horizon = p.integer("rollout.horizon", c.rollout_horizon);
  c.rollout_source = p.str("rollout.source", c.rollout_source);

  if (p.has("bench.methods"))
    c.bench_methods = split_list(p.kv["bench.methods"]);
  c.bench_soft_lambda_sweep =
      p.num_list("bench.soft_lambda_sweep", c.bench_soft_lambda_sweep);
  c.bench_usvt_threshold_sweep =
      p.num_list("bench.usvt_threshold_sweep", c.bench_usvt_threshold_sweep);

  c.rank_max_r = p.integer("rank.max_r", c.rank_max_r);
  c.rank_deltas = p.num_list("rank.deltas", c.rank_deltas);

  c.seeds = p.seed_list("seeds", c.seeds);
  c.threads = p.integer("threads", c.threads);
  c.out_dir = p.str("out_dir", c.out_dir);

  // Validation beyond parse errors; collect everything before throwing.
  if (c.schedule_mode != "table" && c.schedule_mode != "theory")
    p.errors.push_back("schedule.mode must be 'table' or 'theory'");
  if (c.schedule_growth != "halving" && c.schedule_growth != "fixed")
    p.errors.push_back("schedule.growth must be 'halving' or 'fixed'");
  if (c.t_max < 0) p.errors.push_back("schedule.t_max must be >= 0");
  if (c.anchors_r < 1) p.errors.push_back("anchors.r must be >= 1");
  if (c.me.variant == MeVariant::rank1 && c.anchors_r != 1)
    p.errors.push_back("me.method=rank1 requires anchors.r = 1");
  if (c.me.variant == MeVariant::rank2 && c.anchors_r != 2)
    p.errors.push_back("me.method=rank2 requires anchors.r = 2");
  if (c.rollout_source != "learned" && c.rollout_source != "proxy")
    p.errors.push_back("rollout.source must be 'learned' or 'proxy'");
  if (c.seeds.empty()) p.errors.push_back("seeds must be nonempty");
  if (c.threads < 1) p.errors.push_back("threads must be >= 1");
  for (const auto& m : c.bench_methods) {
    try {
      me_variant_from_string(m);
    } catch (const ConfigError&) {
      p.errors.push_back("bench.methods: unknown method '" + m + "'");
    }
  }
  p.finish();

  c.canonical_text = p.canonical();
  c.config_hash = fnv1a(c.canonical_text);
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

MdpSpec ExperimentConfig::build_env() const {
  MdpSpec env = make_env(env_name);
  if (gamma) env.gamma = *gamma;
  if (tau) env.tau = *tau;
  if (noise_mu) env.noise_mu = *noise_mu;
  if (noise_sigma) env.noise_sigma = *noise_sigma;
  if (lipschitz_l) env.lipschitz_l = *lipschitz_l;
  if (!(env.gamma > 0.0 && env.gamma < 1.0))
    throw ConfigError("env.gamma must lie in (0,1)");
  return env;
}

Schedule ExperimentConfig::build_schedule(const MdpSpec& env) const {
  if (t_max == 0) throw ConfigError("schedule.t_max = 0 is not runnable");
  if (schedule_mode == "theory")
    return default_schedule(env, c_me, big_c_me, t_max, delta);
  std::vector<int> sc = s_grid;
  std::vector<int> ac = a_grid;
  if (sc.empty())
    sc.assign(static_cast<std::size_t>(env.state_space.dims()),
              env.state_space.dims() <= 2 ? 50 : 10);
  if (ac.empty())
    ac.assign(static_cast<std::size_t>(env.action_space.dims()), 100);
  if (static_cast<int>(sc.size()) != env.state_space.dims())
    throw ConfigError("schedule.s_grid: wrong number of dims");
  if (static_cast<int>(ac.size()) != env.action_space.dims())
    throw ConfigError("schedule.a_grid: wrong number of dims");
  return table_schedule(std::move(sc), std::move(ac), t_max, n_samples,
                        schedule_growth == "halving", &env);
}

std::string cache_dir(const ExperimentConfig& cfg) {
  if (const char* dir = std::getenv(kCacheDirEnvVar); dir && *dir)
    return dir;
  return cfg.out_dir + "/cache";
}

}  // namespace lowrl
