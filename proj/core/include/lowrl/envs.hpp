#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lowrl/linalg.hpp"
#include "lowrl/rng.hpp"

namespace lowrl {

struct FiniteMdp;

// Compact axis-aligned product space. Dims flagged wrap are angles living on
// [-pi, pi); everything else clips at the bounds.
struct BoxSpace {
  Vector lower;
  Vector upper;
  std::vector<bool> wraps;

  BoxSpace() = default;
  BoxSpace(Vector lo, Vector hi);

  int dims() const { return static_cast<int>(lower.size()); }
  double range(int i) const { return upper(i) - lower(i); }
  double diameter() const;
  bool contains(const Vector& p, double tol = 1e-9) const;
  // Componentwise clip; wrap dims are reduced modulo the period instead.
  Vector clamp(const Vector& p) const;
};

enum class Task {
  inverted_pendulum,
  mountain_car,
  double_integrator,
  cart_pole,
  acrobot,
  rank1_synthetic,
  finite,
};

// Generative model description: spaces, dynamics constants and reward
// bounds. Instances are immutable and freely shareable across threads.
struct MdpSpec {
  std::string name;
  Task task = Task::inverted_pendulum;
  BoxSpace state_space;
  BoxSpace action_space;
  double gamma = 0.9;
  double r_max = 1.0;   // sup of the reward
  double r_min = 0.0;   // inf of the reward (may be <= 0)
  double lipschitz_l = 1.0;
  double tau = 0.1;
  double noise_mu = 0.0;
  double noise_sigma = 0.0;
  int noise_dim = 0;

  // Cart-pole constants.
  double cp_mass_cart = 1.0;
  double cp_mass_pole = 0.1;
  double cp_pole_half_length = 0.5;
  // Acrobot constants.
  double ac_link_length = 1.0;
  double ac_link_com = 0.5;
  double ac_link_mass = 1.0;
  double gravity = 9.8;
  // Synthetic rank-1 task: R(s, a) = syn_g0 + syn_slope * a, transitions are
  // state-independent around syn_center so Q* is exactly rank 1 and positive.
  double syn_g0 = 1.0;
  double syn_slope = 0.1;
  double syn_center = 0.5;

  std::shared_ptr<const FiniteMdp> finite;

  double r_abs_bound() const {
    return std::max(std::abs(r_max), std::abs(r_min));
  }
  double v_max() const { return r_abs_bound() / (1.0 - gamma); }
  // Positive value floor; only meaningful when rewards have a positive floor.
  double v_min() const { return r_min > 0.0 ? r_min / (1.0 - gamma) : 0.0; }
};

// The five control tasks. Unknown names raise ConfigError.
MdpSpec make_env(const std::string& name);

// Exactly rank-1 continuous MDP used to exercise the theory-mode schedule.
MdpSpec make_rank1_env(double gamma, double noise_sigma = 0.1,
                       double g0 = 1.0, double slope = 0.1);

// Wrap a finite MDP as a generative model; states/actions are embedded as
// integer-valued 1-D points.
MdpSpec make_finite_env(std::shared_ptr<const FiniteMdp> mdp);

// One explicit-Euler transition, deterministic given the supplied noise
// value (for finite MDPs the draw is a uniform in [0,1)). The result is
// clamped into the state space.
Vector step(const MdpSpec& env, const Vector& s, const Vector& a,
            double noise);

double reward(const MdpSpec& env, const Vector& s, const Vector& a);

// Per-run generative-model sample counter; incremented once per transition.
class SampleCounter {
 public:
  void add(std::int64_t n) { count_.fetch_add(n, std::memory_order_relaxed); }
  std::int64_t value() const { return count_.load(std::memory_order_relaxed); }
  void reset() { count_.store(0, std::memory_order_relaxed); }

 private:
  std::atomic<std::int64_t> count_{0};
};

struct Transition {
  Vector next_state;
  double reward = 0.0;
};

// Draw one noise value from the stream, advance the dynamics and count the
// sample.
Transition sample_transition(const MdpSpec& env, const Vector& s,
                             const Vector& a, RngStream& rng,
                             SampleCounter& counter);

}  // namespace lowrl
