#pragma once

#include <vector>

#include "lowrl/envs.hpp"

namespace lowrl {

// Grid resolution rule for one space. Three shapes:
//   - pure beta sequence beta1 * decay^(t-1) (theory mode),
//   - fixed per-dim counts every iteration,
//   - growing: beta halves from beta1 and the per-dim counts cap at
//     fixed_counts (the final resolution).
struct GridRule {
  std::vector<int> fixed_counts;  // non-empty wins over the beta rule
  bool growing = false;
  double beta1 = 0.0;
  double decay = 0.5;

  double beta_of(int t) const;
  bool uses_counts() const { return !fixed_counts.empty(); }
  std::vector<int> counts_of(int t, const BoxSpace& space) const;
};

// Per-iteration resolutions and exploration sample counts. In theory mode
// these follow the geometric rules
//   beta(t) = V_max/(8L) * (2*gamma*c_me)^t,
//   N(t)    = 8 / (2*gamma*c_me)^(2(t-1)) * log(2*|omega|*T/delta).
// When 2*gamma*c_me >= 1 those rules degenerate; the schedule is flagged
// theory_range_exceeded and falls back to halving betas with a floor and a
// constant N.
struct Schedule {
  int t_max = 1;
  double delta = 0.1;
  double contraction = 0.0;  // 2 * gamma * c_me
  double big_c_me = 1.0;
  bool theory_mode = false;
  bool theory_range_exceeded = false;
  GridRule state_rule;
  GridRule action_rule;
  std::vector<int> n_table;  // optional explicit N per iteration
  int n_fixed = 32;

  int n_of(int t, std::size_t omega_size) const;
};

Schedule default_schedule(const MdpSpec& env, double c_me, double big_c_me,
                          int t_max, double delta);

// Table schedule driven by explicit grid counts (the practical mode used
// for the gamma = 0.9 experiments). growing=true halves beta from
// diameter/8 each iteration with the counts as the resolution cap;
// growing=false holds the counts fixed from t = 1.
Schedule table_schedule(std::vector<int> s_counts, std::vector<int> a_counts,
                        int t_max, int n_samples, bool growing = false,
                        const MdpSpec* env = nullptr);

}  // namespace lowrl
