#include "lowrl/finite_mdp.hpp"

#include <cmath>

#include "lowrl/rng.hpp"

namespace lowrl {

void FiniteMdp::validate() const {
  if (n_states < 1 || n_actions < 1)
    throw ConfigError("FiniteMdp: sizes must be >= 1");
  if (reward.rows() != n_states || reward.cols() != n_actions)
    throw ConfigError("FiniteMdp: reward shape mismatch");
  if (!reward.allFinite()) throw ConfigError("FiniteMdp: non-finite rewards");
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int k = 0; k < n_states; ++k) {
        const double p = transition_prob(s, a, k);
        if (p < 0.0) throw ConfigError("FiniteMdp: negative probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigError("FiniteMdp: transition row does not sum to 1");
    }
}

FiniteMdp make_finite_mdp(const std::string& kind,
                          const FiniteMdpParams& params) {
  FiniteMdp m;
  m.gamma = params.gamma;
  if (kind == "single_state") {
    m.n_states = 1;
    m.n_actions = 1;
    m.transition.assign(1, 1.0);
    m.reward = Matrix::Constant(1, 1, params.reward_value);
  } else if (kind == "chain") {
    const int n = static_cast<int>(params.chain_rewards.size());
    if (n < 1) throw ConfigError("make_finite_mdp: chain needs rewards");
    m.n_states = n;
    m.n_actions = 1;
    m.transition.assign(static_cast<std::size_t>(n) * n, 0.0);
    m.reward = Matrix::Zero(n, 1);
    for (int s = 0; s < n; ++s) {
      m.reward(s, 0) = params.chain_rewards[static_cast<std::size_t>(s)];
      const int next = std::min(s + 1, n - 1);  // last state absorbs
      m.transition_prob(s, 0, next) = 1.0;
    }
  } else if (kind == "random_stochastic") {
    if (params.n_states < 1 || params.n_actions < 1)
      throw ConfigError("make_finite_mdp: sizes must be >= 1");
    m.n_states = params.n_states;
    m.n_actions = params.n_actions;
    m.transition.assign(
        static_cast<std::size_t>(m.n_states) * m.n_actions * m.n_states, 0.0);
    m.reward = Matrix::Zero(m.n_states, m.n_actions);
    RngStream rng(params.seed, {0x66696e697465ull});
    for (int s = 0; s < m.n_states; ++s)
      for (int a = 0; a < m.n_actions; ++a) {
        double sum = 0.0;
        for (int k = 0; k < m.n_states; ++k) {
          const double w = -std::log(1.0 - rng.uniform01());  // Exp(1)
          m.transition_prob(s, a, k) = w;
          sum += w;
        }
        for (int k = 0; k < m.n_states; ++k) m.transition_prob(s, a, k) /= sum;
        m.reward(s, a) = rng.uniform(-1.0, 1.0);
      }
  } else {
    throw ConfigError("make_finite_mdp: unknown kind '" + kind + "'");
  }
  m.validate();
  return m;
}

}  // namespace lowrl
