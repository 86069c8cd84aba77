#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lowrl/linalg.hpp"

namespace lowrl {

// Tabular MDP with an explicit transition tensor; used for oracle testing
// and the finite-space mode of the engine.
struct FiniteMdp {
  int n_states = 0;
  int n_actions = 0;
  // P(s'|s,a) flattened as [s][a][s'], each slice row-stochastic.
  std::vector<double> transition;
  Matrix reward;  // n_states x n_actions
  double gamma = 0.9;

  double transition_prob(int s, int a, int next) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) *
                          n_states +
                      next];
  }
  double& transition_prob(int s, int a, int next) {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) *
                          n_states +
                      next];
  }
  void validate() const;
};

struct FiniteMdpParams {
  int n_states = 2;
  int n_actions = 2;
  double gamma = 0.5;
  double reward_value = 1.0;              // single_state
  std::vector<double> chain_rewards;      // chain, one per state
  std::uint64_t seed = 0;                 // random_stochastic
};

// kind in {single_state, chain, random_stochastic}.
FiniteMdp make_finite_mdp(const std::string& kind,
                          const FiniteMdpParams& params);

}  // namespace lowrl
