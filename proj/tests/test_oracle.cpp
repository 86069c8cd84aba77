#include <doctest.h>

#include <Eigen/QR>
#include <cmath>
#include <filesystem>

#include "lowrl/oracle.hpp"
#include "lowrl/table_io.hpp"

using namespace lowrl;

namespace {

Matrix random_matrix(Index m, Index n, RngStream& rng) {
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

// Independent Bellman iteration with naive loops; the fixed-point oracle
// the production solver is checked against.
Matrix brute_force_q(const FiniteMdp& mdp, int sweeps) {
  Matrix q = Matrix::Zero(mdp.n_states, mdp.n_actions);
  for (int it = 0; it < sweeps; ++it) {
    std::vector<double> v(static_cast<std::size_t>(mdp.n_states), 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
      double best = q(s, 0);
      for (int a = 1; a < mdp.n_actions; ++a) best = std::max(best, q(s, a));
      v[static_cast<std::size_t>(s)] = best;
    }
    Matrix next(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) {
        double ev = 0.0;
        for (int k = 0; k < mdp.n_states; ++k)
          ev += mdp.transition_prob(s, a, k) * v[static_cast<std::size_t>(k)];
        next(s, a) = mdp.reward(s, a) + mdp.gamma * ev;
      }
    q = next;
  }
  return q;
}

Matrix bellman_apply(const FiniteMdp& mdp, const Matrix& q) {
  Matrix out(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      double ev = 0.0;
      for (int k = 0; k < mdp.n_states; ++k) {
        double vk = q(k, 0);
        for (int b = 1; b < mdp.n_actions; ++b) vk = std::max(vk, q(k, b));
        ev += mdp.transition_prob(s, a, k) * vk;
      }
      out(s, a) = mdp.reward(s, a) + mdp.gamma * ev;
    }
  }
  return out;
}

QStarProxy proxy_from(const Matrix& values) {
  QStarProxy p;
  BoxSpace sbox(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
  p.s_grid = std::make_shared<const GridNet>(
      build_net_from_counts(sbox, {static_cast<int>(values.rows())}));
  p.a_grid = std::make_shared<const GridNet>(
      build_net_from_counts(sbox, {static_cast<int>(values.cols())}));
  p.values = values;
  p.converged = true;
  return p;
}

}  // namespace

TEST_CASE("gauss_hermite integrates gaussian moments") {
  const auto q = gauss_hermite(5, 0.3, 0.7);
  double m0 = 0, m1 = 0, m2 = 0, m4 = 0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const double x = q.nodes[k] - 0.3;
    m0 += q.weights[k];
    m1 += q.weights[k] * x;
    m2 += q.weights[k] * x * x;
    m4 += q.weights[k] * x * x * x * x;
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m1 == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(m2 == doctest::Approx(0.49).epsilon(1e-10));
  CHECK(m4 == doctest::Approx(3 * 0.49 * 0.49).epsilon(1e-10));

  const auto single = gauss_hermite(1, 0.5, 2.0);
  CHECK(single.nodes.size() == 1);
  CHECK(single.nodes[0] == 0.5);

  const auto det = gauss_hermite(7, 0.5, 0.0);
  CHECK(det.nodes.size() == 1);
}

TEST_CASE("finite_vi closed forms") {
  FiniteMdpParams p;
  p.gamma = 0.5;
  p.reward_value = 1.0;
  const Matrix q1 = finite_vi(make_finite_mdp("single_state", p), 1e-12);
  CHECK(q1(0, 0) == doctest::Approx(2.0).epsilon(1e-9));

  FiniteMdpParams pc;
  pc.gamma = 0.5;
  pc.chain_rewards = {0.0, 1.0};
  const Matrix q2 = finite_vi(make_finite_mdp("chain", pc), 1e-12);
  CHECK(q2(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q2(1, 0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("finite_vi matches the brute-force fixed point") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FiniteMdpParams pr;
    pr.n_states = 12;
    pr.n_actions = 4;
    pr.gamma = 0.8;
    pr.seed = seed;
    const FiniteMdp mdp = make_finite_mdp("random_stochastic", pr);
    const Matrix fast = finite_vi(mdp, 1e-12);
    const Matrix slow = brute_force_q(mdp, 400);
    CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("Bellman operator is a gamma-contraction") {
  RngStream rng(41);
  FiniteMdpParams pr;
  pr.n_states = 9;
  pr.n_actions = 3;
  pr.gamma = 0.85;
  pr.seed = 5;
  const FiniteMdp mdp = make_finite_mdp("random_stochastic", pr);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix q1 = random_matrix(9, 3, rng);
    const Matrix q2 = random_matrix(9, 3, rng);
    const double lhs =
        (bellman_apply(mdp, q1) - bellman_apply(mdp, q2)).cwiseAbs().maxCoeff();
    const double rhs = mdp.gamma * (q1 - q2).cwiseAbs().maxCoeff();
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("fine_grid_vi at tiny gamma returns the reward matrix") {
  MdpSpec env = make_env("inverted_pendulum");
  env.gamma = 1e-300;  // the gamma -> 0 limit of the backup
  const QStarProxy proxy = fine_grid_vi(env, {8, 8}, {5}, 3, 1e-9, 10);
  for (Index i = 0; i < proxy.s_grid->size(); ++i)
    for (Index j = 0; j < proxy.a_grid->size(); ++j) {
      const double r =
          reward(env, proxy.s_grid->point(i), proxy.a_grid->point(j));
      CHECK(proxy.values(i, j) == doctest::Approx(r).epsilon(1e-12));
    }
  CHECK(proxy.converged);
}

TEST_CASE("fine_grid_vi residual ratios settle under gamma + 0.01") {
  MdpSpec env = make_env("inverted_pendulum");
  env.gamma = 0.8;
  std::vector<double> residuals;
  for (int sweeps = 1; sweeps <= 14; ++sweeps) {
    const QStarProxy p = fine_grid_vi(env, {10, 10}, {7}, 3, 1e-13, sweeps);
    residuals.push_back(p.residual);
  }
  for (std::size_t k = 5; k + 1 < residuals.size(); ++k) {
    if (residuals[k] <= 1e-12) break;
    CHECK(residuals[k + 1] / residuals[k] <= env.gamma + 0.01);
  }
}

TEST_CASE("fine_grid_vi reports non-convergence without throwing") {
  MdpSpec env = make_env("inverted_pendulum");
  const QStarProxy p = fine_grid_vi(env, {6, 6}, {5}, 3, 1e-12, 2);
  CHECK(!p.converged);
  CHECK(p.sweeps == 2);
  CHECK(p.residual > 1e-12);
}

TEST_CASE("compare basics") {
  RngStream rng(43);
  const Matrix values = random_matrix(6, 5, rng);
  const QStarProxy proxy = proxy_from(values);
  const QOracle same =
      QOracle::interpolate(proxy.s_grid, proxy.a_grid, values);
  const ErrorReport r0 = compare(same, proxy);
  CHECK(r0.linf == 0.0);
  CHECK(r0.mean == 0.0);
  CHECK(r0.grid_points == 30);

  const QOracle shifted = QOracle::interpolate(
      proxy.s_grid, proxy.a_grid, values.array() + 0.5);
  const ErrorReport r1 = compare(shifted, proxy);
  CHECK(r1.linf == doctest::Approx(0.5));
  CHECK(r1.mean == doctest::Approx(0.5));
  CHECK(r1.mean <= r1.linf);

  // sign symmetry: negating both inputs preserves the report
  const QStarProxy neg_proxy = proxy_from(-values);
  const QOracle neg_shift = QOracle::interpolate(
      proxy.s_grid, proxy.a_grid, Matrix((-values).array() + 0.5));
  const ErrorReport r2 = compare(neg_shift, neg_proxy);
  CHECK(r2.linf == doctest::Approx(r1.linf));
  CHECK(r2.mean == doctest::Approx(r1.mean));
}

TEST_CASE("approx_rank_report and Parseval") {
  RngStream rng(47);
  const Matrix rank1 = random_matrix(8, 1, rng) * random_matrix(1, 6, rng);
  const QStarProxy proxy = proxy_from(rank1);
  const RankReport rep = approx_rank_report(proxy, {1e-18, 1e9});
  CHECK(rep.ranks[0].second == 1);
  CHECK(rep.ranks[1].second == 0);
  CHECK(rep.spectrum.squaredNorm() ==
        doctest::Approx(rank1.squaredNorm()).epsilon(1e-8));
}

TEST_CASE("bias_zeta on constructed spectra") {
  RngStream rng(53);
  // orthonormal factors with known singular values
  const Index m = 12, n = 10;
  const int r = 3;
  Eigen::HouseholderQR<Matrix> qrf(random_matrix(m, r + 1, rng));
  Eigen::HouseholderQR<Matrix> qrg(random_matrix(n, r + 1, rng));
  const Matrix f = qrf.householderQ() * Matrix::Identity(m, r + 1);
  const Matrix g = qrg.householderQ() * Matrix::Identity(n, r + 1);
  Vector sigma(r + 1);
  sigma << 9, 7, 5, 2;
  Matrix mat = Matrix::Zero(m, n);
  for (int i = 0; i <= r; ++i)
    mat += sigma(i) * f.col(i) * g.col(i).transpose();
  const QStarProxy proxy = proxy_from(mat);

  // dropping the last component leaves sigma_{r+1} * max |f_i g_j|
  const double expected =
      sigma(r) * (f.col(r) * g.col(r).transpose()).cwiseAbs().maxCoeff();
  CHECK(bias_zeta(proxy, r) == doctest::Approx(expected).epsilon(1e-8));
  CHECK(bias_zeta(proxy, r + 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bias_zeta(proxy, static_cast<int>(std::min(m, n))) == 0.0);

  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 5; ++k) {
    const double z = bias_zeta(proxy, k);
    CHECK(z <= prev + 1e-12);
    prev = z;
  }
  CHECK_THROWS_AS(bias_zeta(proxy, 99), InputError);
}

TEST_CASE("table file round trip is bit exact") {
  MdpSpec env = make_env("mountain_car");
  const QStarProxy proxy = fine_grid_vi(env, {6, 6}, {4}, 3, 1e-6, 50);
  TableFile t = proxy_to_table(proxy, hash_env(env));
  const std::string path = "/tmp/lowrl_test_table.bin";
  save_table(path, t);
  const TableFile back = load_table(path);
  CHECK(back.env_hash == t.env_hash);
  CHECK(back.kind == 0);
  CHECK(back.sweeps == t.sweeps);
  CHECK((back.values - proxy.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.s_grid.size() == proxy.s_grid->size());
  CHECK((back.s_grid.points - proxy.s_grid->points).cwiseAbs().maxCoeff() ==
        0.0);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_table("/tmp/definitely_missing_table.bin"), Error);
}
