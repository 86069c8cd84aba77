#include "lowrl/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

namespace lowrl {

NoiseQuadrature gauss_hermite(int n_points, double mu, double sigma) {
  if (n_points < 1) throw InputError("gauss_hermite: need >= 1 point");
  NoiseQuadrature q;
  if (sigma == 0.0 || n_points == 1) {
    q.nodes = {mu};
    q.weights = {1.0};
    return q;
  }
  // Golub-Welsch on the Hermite Jacobi matrix: off-diagonals sqrt(i/2).
  Matrix jacobi = Matrix::Zero(n_points, n_points);
  for (int i = 1; i < n_points; ++i) {
    const double b = std::sqrt(i / 2.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  const Vector& x = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  double wsum = 0.0;
  for (int i = 0; i < n_points; ++i) wsum += v(0, i) * v(0, i);
  q.nodes.resize(static_cast<std::size_t>(n_points));
  q.weights.resize(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    q.nodes[static_cast<std::size_t>(i)] =
        mu + std::numbers::sqrt2 * sigma * x(i);
    q.weights[static_cast<std::size_t>(i)] = v(0, i) * v(0, i) / wsum;
  }
  return q;
}

QStarProxy fine_grid_vi(const MdpSpec& env, const std::vector<int>& s_counts,
                        const std::vector<int>& a_counts, int noise_draws,
                        double tol, int max_sweeps, int threads) {
  if (!(tol > 0.0)) throw InputError("fine_grid_vi: tol must be > 0");
  auto s_grid = std::make_shared<const GridNet>(
      build_net_from_counts(env.state_space, s_counts));
  auto a_grid = std::make_shared<const GridNet>(
      build_net_from_counts(env.action_space, a_counts));
  const Index ns = s_grid->size(), na = a_grid->size();
  const auto quad = gauss_hermite(noise_draws, env.noise_mu, env.noise_sigma);
  const int nq = env.task == Task::finite
                     ? 0
                     : static_cast<int>(quad.nodes.size());

  QStarProxy proxy;
  proxy.s_grid = s_grid;
  proxy.a_grid = a_grid;
  proxy.tol = tol;

  const int n_threads = std::max(1, threads);
  auto parallel_states = [&](auto&& body) {
    if (n_threads == 1 || ns < 64) {
      body(Index{0}, ns);
      return;
    }
    std::vector<std::thread> pool;
    const Index chunk = (ns + n_threads - 1) / n_threads;
    for (int w = 0; w < n_threads; ++w) {
      const Index lo = std::min<Index>(ns, w * chunk);
      const Index hi = std::min<Index>(ns, lo + chunk);
      if (lo < hi) pool.emplace_back(body, lo, hi);
    }
    for (auto& th : pool) th.join();
  };

  // Rewards and quadrature successor indices, fixed across sweeps.
  Matrix r(ns, na);
  std::vector<std::int32_t> next;  // [s][a][k]
  std::vector<double> probs;       // finite task: [s][a][s'] direct use
  const bool finite = env.task == Task::finite;
  if (!finite)
    next.resize(static_cast<std::size_t>(ns) * static_cast<std::size_t>(na) *
                nq);
  parallel_states([&](Index lo, Index hi) {
    for (Index si = lo; si < hi; ++si) {
      const Vector s = s_grid->point(si);
      for (Index aj = 0; aj < na; ++aj) {
        const Vector a = a_grid->point(aj);
        r(si, aj) = reward(env, s, a);
        if (finite) continue;
        for (int k = 0; k < nq; ++k) {
          const Vector sp =
              step(env, s, a, quad.nodes[static_cast<std::size_t>(k)]);
          next[(static_cast<std::size_t>(si) * na + aj) * nq + k] =
              static_cast<std::int32_t>(nearest_index(*s_grid, sp));
        }
      }
    }
  });

  Matrix q = Matrix::Zero(ns, na);
  Matrix q_new(ns, na);
  Vector v = Vector::Zero(ns);

  proxy.residual = std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    v = q.rowwise().maxCoeff();
    double residual = 0.0;
    std::mutex res_mu;
    parallel_states([&](Index lo, Index hi) {
      double local = 0.0;
      for (Index si = lo; si < hi; ++si) {
        for (Index aj = 0; aj < na; ++aj) {
          double ev = 0.0;
          if (finite) {
            const auto& mdp = *env.finite;
            for (int k = 0; k < mdp.n_states; ++k)
              ev += mdp.transition_prob(static_cast<int>(si),
                                        static_cast<int>(aj), k) *
                    v(k);
          } else {
            for (int k = 0; k < nq; ++k)
              ev += quad.weights[static_cast<std::size_t>(k)] *
                    v(next[(static_cast<std::size_t>(si) * na + aj) * nq +
                           k]);
          }
          const double val = r(si, aj) + env.gamma * ev;
          local = std::max(local, std::abs(val - q(si, aj)));
          q_new(si, aj) = val;
        }
      }
      std::lock_guard<std::mutex> lock(res_mu);
      residual = std::max(residual, local);
    });
    q.swap(q_new);
    proxy.sweeps = sweep;
    proxy.residual = residual;
    if (residual <= tol) {
      proxy.converged = true;
      break;
    }
  }
  proxy.values = std::move(q);
  return proxy;
}

Matrix finite_vi(const FiniteMdp& mdp, double tol, int max_sweeps) {
  if (!(tol > 0.0)) throw InputError("finite_vi: tol must be > 0");
  const int ns = mdp.n_states, na = mdp.n_actions;
  Matrix q = Matrix::Zero(ns, na);
  Matrix q_new(ns, na);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Vector v = q.rowwise().maxCoeff();
    double residual = 0.0;
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < na; ++a) {
        double ev = 0.0;
        for (int k = 0; k < ns; ++k) ev += mdp.transition_prob(s, a, k) * v(k);
        const double val = mdp.reward(s, a) + mdp.gamma * ev;
        residual = std::max(residual, std::abs(val - q(s, a)));
        q_new(s, a) = val;
      }
    q.swap(q_new);
    if (residual <= tol) break;
  }
  return q;
}

ErrorReport compare(const QOracle& q, const QStarProxy& proxy) {
  const Index ns = proxy.s_grid->size(), na = proxy.a_grid->size();
  ErrorReport rep;
  rep.grid_points = ns * na;
  if (q.is_zero()) {
    rep.linf = proxy.values.cwiseAbs().maxCoeff();
    rep.mean = proxy.values.cwiseAbs().mean();
    return rep;
  }
  std::vector<Index> s_map(static_cast<std::size_t>(ns));
  for (Index i = 0; i < ns; ++i)
    s_map[static_cast<std::size_t>(i)] =
        nearest_index(*q.s_grid, proxy.s_grid->point(i));
  std::vector<Index> a_map(static_cast<std::size_t>(na));
  for (Index j = 0; j < na; ++j)
    a_map[static_cast<std::size_t>(j)] =
        nearest_index(*q.a_grid, proxy.a_grid->point(j));
  double acc = 0.0;
  for (Index i = 0; i < ns; ++i)
    for (Index j = 0; j < na; ++j) {
      const double diff =
          std::abs(q.values(s_map[static_cast<std::size_t>(i)],
                            a_map[static_cast<std::size_t>(j)]) -
                   proxy.values(i, j));
      rep.linf = std::max(rep.linf, diff);
      acc += diff;
    }
  rep.mean = acc / static_cast<double>(ns * na);
  return rep;
}

RankReport approx_rank_report(const QStarProxy& proxy,
                              const std::vector<double>& deltas) {
  RankReport rep;
  rep.spectrum = svd_spectrum(proxy.values);
  rep.ranks.reserve(deltas.size());
  for (double d : deltas)
    rep.ranks.emplace_back(d, effective_rank(rep.spectrum, d));
  return rep;
}

double bias_zeta(const QStarProxy& proxy, int r) {
  const Index maxr = std::min(proxy.values.rows(), proxy.values.cols());
  if (r < 0 || r > maxr) throw InputError("bias_zeta: r out of range");
  if (r == maxr) return 0.0;
  Eigen::BDCSVD<Matrix> svd(proxy.values,
                            Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix trunc =
      svd.matrixU().leftCols(r) *
      svd.singularValues().head(r).asDiagonal() *
      svd.matrixV().leftCols(r).transpose();
  return (proxy.values - trunc).cwiseAbs().maxCoeff();
}

ErrorFn proxy_error_fn(std::shared_ptr<const QStarProxy> proxy) {
  return [proxy = std::move(proxy)](const QOracle& q) {
    const ErrorReport rep = compare(q, *proxy);
    return std::make_pair(rep.linf, rep.mean);
  };
}

}  // namespace lowrl
