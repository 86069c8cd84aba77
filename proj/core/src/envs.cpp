#include "lowrl/envs.hpp"

#include <cmath>
#include <numbers>

#include "lowrl/finite_mdp.hpp"

namespace lowrl {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double x) {
  // Reduce into [-pi, pi).
  x = std::fmod(x + kPi, 2.0 * kPi);
  if (x < 0.0) x += 2.0 * kPi;
  return x - kPi;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec4(double a, double b, double c, double d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}

void require_finite(const Vector& s, const Vector& a) {
  if (!s.allFinite() || !a.allFinite())
    throw InputError("step: non-finite state or action");
}

}  // namespace

BoxSpace::BoxSpace(Vector lo, Vector hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() < 1)
    throw InputError("BoxSpace: dimension mismatch");
  for (Index i = 0; i < lower.size(); ++i)
    if (!(lower(i) < upper(i)))
      throw InputError("BoxSpace: lower must be < upper per dim");
  wraps.assign(static_cast<std::size_t>(lower.size()), false);
}

double BoxSpace::diameter() const {
  return (upper - lower).norm();
}

bool BoxSpace::contains(const Vector& p, double tol) const {
  if (p.size() != lower.size()) return false;
  for (Index i = 0; i < p.size(); ++i)
    if (p(i) < lower(i) - tol || p(i) > upper(i) + tol) return false;
  return true;
}

Vector BoxSpace::clamp(const Vector& p) const {
  Vector out = p;
  for (Index i = 0; i < out.size(); ++i) {
    if (wraps[static_cast<std::size_t>(i)]) {
      out(i) = wrap_angle(out(i));
    } else {
      out(i) = std::min(std::max(out(i), lower(i)), upper(i));
    }
  }
  return out;
}

MdpSpec make_env(const std::string& name) {
  MdpSpec e;
  e.name = name;
  e.gamma = 0.9;
  if (name == "inverted_pendulum") {
    e.task = Task::inverted_pendulum;
    e.state_space = BoxSpace(vec2(-kPi, -2.0), vec2(kPi, 2.0));
    e.state_space.wraps[0] = true;
    e.action_space = BoxSpace(Vector::Constant(1, -1.0),
                              Vector::Constant(1, 1.0));
    e.tau = 0.3;
    e.noise_sigma = 0.1;
    e.noise_dim = 1;
    e.r_max = 1.0;                      // exp(0) at theta = 0, u = 0
    e.r_min = -0.1 + std::exp(-2.0);    // max torque, theta = pi
  } else if (name == "mountain_car") {
    e.task = Task::mountain_car;
    e.state_space = BoxSpace(vec2(-1.2, -0.07), vec2(0.6, 0.07));
    e.action_space = BoxSpace(Vector::Constant(1, -1.0),
                              Vector::Constant(1, 1.0));
    e.tau = 1.0;  // unit step in the written dynamics
    e.noise_sigma = 1e-3;
    e.noise_dim = 0;
    e.r_max = 10.0;
    e.r_min = -1.0;
  } else if (name == "double_integrator") {
    e.task = Task::double_integrator;
    e.state_space = BoxSpace(vec2(-3.0, -3.0), vec2(3.0, 3.0));
    e.action_space = BoxSpace(Vector::Constant(1, -1.0),
                              Vector::Constant(1, 1.0));
    e.tau = 0.1;
    e.noise_sigma = 0.1;
    e.noise_dim = 0;
    e.r_max = 0.0;
    e.r_min = -9.0;  // -(3^2 + 3^2)/2
  } else if (name == "cart_pole") {
    e.task = Task::cart_pole;
    e.state_space = BoxSpace(vec4(-kPi / 2, -3.0, -2.4, -3.0),
                             vec4(kPi / 2, 3.0, 2.4, 3.0));
    e.action_space = BoxSpace(Vector::Constant(1, -10.0),
                              Vector::Constant(1, 10.0));
    e.tau = 0.02;
    e.noise_sigma = 0.1;
    e.noise_dim = 1;
    e.r_max = 1.0;
    e.r_min = 0.0;
  } else if (name == "acrobot") {
    e.task = Task::acrobot;
    e.state_space = BoxSpace(vec4(-kPi, -4.0 * kPi, -kPi, -9.0 * kPi),
                             vec4(kPi, 4.0 * kPi, kPi, 9.0 * kPi));
    e.state_space.wraps[0] = true;
    e.state_space.wraps[2] = true;
    e.action_space = BoxSpace(Vector::Constant(1, -10.0),
                              Vector::Constant(1, 10.0));
    e.tau = 0.2;
    e.noise_sigma = 0.1;
    e.noise_dim = 1;
    e.r_max = 2.0;                    // both links down: cos = -1
    e.r_min = 2.0 * std::exp(-2.0);   // both links up
  } else {
    throw ConfigError("make_env: unknown environment '" + name + "'");
  }
  return e;
}

MdpSpec make_rank1_env(double gamma, double noise_sigma, double g0,
                       double slope) {
  MdpSpec e;
  e.name = "rank1_synthetic";
  e.task = Task::rank1_synthetic;
  e.state_space = BoxSpace(Vector::Constant(1, 0.0),
                           Vector::Constant(1, 1.0));
  e.action_space = BoxSpace(Vector::Constant(1, 0.0),
                            Vector::Constant(1, 1.0));
  e.gamma = gamma;
  e.tau = 1.0;
  e.noise_sigma = noise_sigma;
  e.noise_dim = 0;
  e.syn_g0 = g0;
  e.syn_slope = slope;
  e.syn_center = 0.5;
  e.r_min = g0;
  e.r_max = g0 + slope;
  e.lipschitz_l = slope;  // Q* depends on the action only, with slope |g'|
  return e;
}

MdpSpec make_finite_env(std::shared_ptr<const FiniteMdp> mdp) {
  if (!mdp) throw ConfigError("make_finite_env: null mdp");
  MdpSpec e;
  e.name = "finite";
  e.task = Task::finite;
  const double ns = static_cast<double>(mdp->n_states);
  const double na = static_cast<double>(mdp->n_actions);
  e.state_space = BoxSpace(Vector::Constant(1, -0.5),
                           Vector::Constant(1, ns - 0.5));
  e.action_space = BoxSpace(Vector::Constant(1, -0.5),
                            Vector::Constant(1, na - 0.5));
  e.gamma = mdp->gamma;
  e.r_max = mdp->reward.maxCoeff();
  e.r_min = mdp->reward.minCoeff();
  e.noise_sigma = 0.0;
  e.finite = std::move(mdp);
  return e;
}

Vector step(const MdpSpec& env, const Vector& s, const Vector& a,
            double noise) {
  require_finite(s, a);
  Vector out;
  switch (env.task) {
    case Task::inverted_pendulum: {
      const double th = s(0), thd = s(1), u = a(0);
      out = vec2(th + thd * env.tau,
                 thd + (std::sin(th) - thd + u) * env.tau + noise);
      break;
    }
    case Task::mountain_car: {
      const double x = s(0), xd = s(1), u = a(0);
      out = vec2(x + xd + noise,
                 xd - 0.0025 * std::cos(3.0 * x) + 0.001 * u);
      break;
    }
    case Task::double_integrator: {
      const double x = s(0), xd = s(1), u = a(0);
      out = vec2(x + xd * env.tau + noise, xd + u * env.tau);
      break;
    }
    case Task::cart_pole: {
      const double th = s(0), thd = s(1), x = s(2), xd = s(3), u = a(0);
      const double mc = env.cp_mass_cart, m = env.cp_mass_pole;
      const double l = env.cp_pole_half_length, g = env.gravity;
      const double total = mc + m;
      const double thdd =
          (g * std::sin(th) -
           (u + m * l * thd * thd * std::sin(th)) / total * std::cos(th)) /
          (l * (4.0 / 3.0 - m * std::cos(th) * std::cos(th) / total));
      const double xdd =
          (u + m * l * (thd * thd * std::sin(th) - thdd * std::cos(th))) /
          total;
      out = vec4(th + thd * env.tau, thd + thdd * env.tau + noise,
                 x + xd * env.tau, xd + xdd * env.tau);
      break;
    }
    case Task::acrobot: {
      const double th1 = s(0), th1d = s(1), th2 = s(2), th2d = s(3);
      const double u = a(0);
      const double l1 = env.ac_link_length, l2 = env.ac_link_length;
      const double lc2 = env.ac_link_com, lc1 = env.ac_link_com;
      const double m1 = env.ac_link_mass, m2 = env.ac_link_mass;
      const double g = env.gravity;
      const double d1 = m1 * (l1 * l1 + lc1 * lc1) +
                        m2 * (l1 * l1 + l2 * l2 + lc2 * lc2 +
                              2.0 * l1 * lc2 * std::cos(th2));
      const double d2 = m2 * (l2 * l2 + lc2 * lc2 + l1 * lc2 * std::cos(th2));
      const double phi2 = m2 * lc2 * g * std::sin(th1 + th2);
      const double phi1 =
          -m2 * l1 * lc2 * th2d * (th2d + 2.0 * th1d) * std::sin(th2) +
          (m1 * lc1 + m2 * l1) * g * std::sin(th1) + phi2;
      const double th2dd =
          (u + d2 / d1 * phi1 - m2 * l1 * lc2 * th1d * th1d * std::sin(th2) -
           phi2) /
          (m2 * (l2 * l2 + lc2 * lc2) - d2 * d2 / d1);
      const double th1dd = -(d2 * th2dd + phi1) / d1;
      out = vec4(th1 + th1d * env.tau, th1d + th1dd * env.tau + noise,
                 th2 + th2d * env.tau, th2d + th2dd * env.tau);
      break;
    }
    case Task::rank1_synthetic: {
      out = Vector::Constant(1, env.syn_center + noise);
      break;
    }
    case Task::finite: {
      // noise is a uniform draw in [0,1); inverse-CDF over P(.|s,a).
      const auto& mdp = *env.finite;
      const int si = static_cast<int>(std::lround(s(0)));
      const int ai = static_cast<int>(std::lround(a(0)));
      double acc = 0.0;
      int next = mdp.n_states - 1;
      for (int k = 0; k < mdp.n_states; ++k) {
        acc += mdp.transition_prob(si, ai, k);
        if (noise < acc) {
          next = k;
          break;
        }
      }
      return Vector::Constant(1, static_cast<double>(next));
    }
  }
  return env.state_space.clamp(out);
}

double reward(const MdpSpec& env, const Vector& s, const Vector& a) {
  switch (env.task) {
    case Task::inverted_pendulum: {
      const double u = a(0);
      return -0.1 * u * u + std::exp(std::cos(s(0)) - 1.0);
    }
    case Task::mountain_car:
      return s(0) >= 0.5 ? 10.0 : -1.0;
    case Task::double_integrator:
      return -0.5 * (s(0) * s(0) + s(1) * s(1));
    case Task::cart_pole: {
      const double c = std::cos(15.0 * s(0));
      return c * c * c * c;
    }
    case Task::acrobot:
      return std::exp(-std::cos(s(0)) - 1.0) +
             std::exp(-std::cos(s(0) + s(2)) - 1.0);
    case Task::rank1_synthetic:
      return env.syn_g0 + env.syn_slope * a(0);
    case Task::finite: {
      const int si = static_cast<int>(std::lround(s(0)));
      const int ai = static_cast<int>(std::lround(a(0)));
      return env.finite->reward(si, ai);
    }
  }
  return 0.0;
}

Transition sample_transition(const MdpSpec& env, const Vector& s,
                             const Vector& a, RngStream& rng,
                             SampleCounter& counter) {
  double draw;
  if (env.task == Task::finite) {
    draw = rng.uniform01();
  } else if (env.noise_sigma == 0.0) {
    draw = env.noise_mu;
  } else {
    draw = env.noise_mu + env.noise_sigma * rng.normal();
  }
  counter.add(1);
  return Transition{step(env, s, a, draw), reward(env, s, a)};
}

}  // namespace lowrl
