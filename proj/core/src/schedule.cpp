#include "lowrl/schedule.hpp"

#include <cmath>

namespace lowrl {

double GridRule::beta_of(int t) const {
  return beta1 * std::pow(decay, t - 1);
}

std::vector<int> GridRule::counts_of(int t, const BoxSpace& space) const {
  if (!growing) return fixed_counts;
  const double beta = beta_of(t);
  const double root_d = std::sqrt(static_cast<double>(space.dims()));
  std::vector<int> counts(fixed_counts.size(), 1);
  for (int i = 0; i < space.dims(); ++i) {
    const int cap = fixed_counts[static_cast<std::size_t>(i)];
    const double needed = space.range(i) * root_d / (2.0 * beta);
    int c = cap;
    if (needed < static_cast<double>(cap))
      c = std::max(1, static_cast<int>(std::ceil(needed - 1e-12)));
    counts[static_cast<std::size_t>(i)] = c;
  }
  return counts;
}

int Schedule::n_of(int t, std::size_t omega_size) const {
  if (!n_table.empty()) {
    const std::size_t idx = std::min(static_cast<std::size_t>(t - 1),
                                     n_table.size() - 1);
    return n_table[idx];
  }
  if (theory_mode) {
    const double rate = std::pow(contraction, 2 * (t - 1));
    const double n =
        8.0 / rate *
        std::log(2.0 * static_cast<double>(omega_size) * t_max / delta);
    return std::max(1, static_cast<int>(std::ceil(n)));
  }
  return n_fixed;
}

Schedule default_schedule(const MdpSpec& env, double c_me, double big_c_me,
                          int t_max, double delta) {
  if (t_max < 1) throw ConfigError("default_schedule: t_max must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("default_schedule: delta must lie in (0,1)");
  if (!(c_me >= 1.0)) throw ConfigError("default_schedule: c_me must be >= 1");

  Schedule s;
  s.t_max = t_max;
  s.delta = delta;
  s.big_c_me = big_c_me;
  s.contraction = 2.0 * env.gamma * c_me;

  if (s.contraction < 1.0) {
    s.theory_mode = true;
    const double scale = env.v_max() / (8.0 * env.lipschitz_l);
    s.state_rule.beta1 = scale * s.contraction;  // beta(1)
    s.state_rule.decay = s.contraction;
    s.action_rule = s.state_rule;
  } else {
    // The geometric rules diverge for 2*gamma*c_me >= 1; fall back to
    // halving resolutions capped at the reference grid sizes (50 per dim
    // up to 2-D, 10 above; 1000 for a 1-D action space) with constant N.
    s.theory_range_exceeded = true;
    auto practical = [](const BoxSpace& space, int cap) {
      GridRule r;
      r.growing = true;
      r.beta1 = space.diameter() / 8.0;
      r.decay = 0.5;
      r.fixed_counts.assign(static_cast<std::size_t>(space.dims()), cap);
      return r;
    };
    const int s_cap = env.state_space.dims() <= 2 ? 50 : 10;
    const int a_cap = env.action_space.dims() == 1 ? 1000 : 10;
    s.state_rule = practical(env.state_space, s_cap);
    s.action_rule = practical(env.action_space, a_cap);
  }
  return s;
}

Schedule table_schedule(std::vector<int> s_counts, std::vector<int> a_counts,
                        int t_max, int n_samples, bool growing,
                        const MdpSpec* env) {
  if (t_max < 1) throw ConfigError("table_schedule: t_max must be >= 1");
  if (n_samples < 1)
    throw ConfigError("table_schedule: n_samples must be >= 1");
  if (growing && !env)
    throw ConfigError("table_schedule: growing mode needs the env spec");
  Schedule s;
  s.t_max = t_max;
  s.state_rule.fixed_counts = std::move(s_counts);
  s.action_rule.fixed_counts = std::move(a_counts);
  if (growing) {
    s.state_rule.growing = true;
    s.state_rule.beta1 = env->state_space.diameter() / 8.0;
    s.action_rule.growing = true;
    s.action_rule.beta1 = env->action_space.diameter() / 8.0;
  }
  s.n_fixed = n_samples;
  return s;
}

}  // namespace lowrl
