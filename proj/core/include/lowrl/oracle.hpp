#pragma once

#include <memory>
#include <vector>

#include "lowrl/engine.hpp"
#include "lowrl/finite_mdp.hpp"

namespace lowrl {

// Fine-grid value-iteration solution standing in for the true Q*.
struct QStarProxy {
  std::shared_ptr<const GridNet> s_grid;
  std::shared_ptr<const GridNet> a_grid;
  Matrix values;
  double residual = 0.0;
  int sweeps = 0;
  bool converged = false;
  double tol = 0.0;
};

// Deterministic sigma points for E[f(mu + sigma Z)], Z standard normal:
// Gauss-Hermite nodes/weights computed from the Jacobi matrix. A single
// draw or sigma == 0 collapses to the mean.
struct NoiseQuadrature {
  std::vector<double> nodes;    // noise values mu + sqrt(2) sigma x_i
  std::vector<double> weights;  // sum to 1
};
NoiseQuadrature gauss_hermite(int n_points, double mu, double sigma);

// Synchronous Bellman sweeps over a fine grid with the noise expectation
// taken by fixed quadrature; stops at sup-norm residual <= tol or
// max_sweeps (recorded, not an error).
QStarProxy fine_grid_vi(const MdpSpec& env, const std::vector<int>& s_counts,
                        const std::vector<int>& a_counts, int noise_draws,
                        double tol, int max_sweeps, int threads = 1);

// Exact expected Bellman iteration for tabular MDPs.
Matrix finite_vi(const FiniteMdp& mdp, double tol, int max_sweeps = 1000000);

struct ErrorReport {
  double linf = 0.0;
  double mean = 0.0;
  Index grid_points = 0;
};

// l_inf and mean absolute error of the oracle against the proxy over the
// proxy's full grid.
ErrorReport compare(const QOracle& q, const QStarProxy& proxy);

struct RankReport {
  SingularSpectrum spectrum;
  std::vector<std::pair<double, int>> ranks;  // (delta, r*(delta))
};

// Spectrum of the proxy matrix plus the effective rank at each delta
// (absolute tail-energy thresholds).
RankReport approx_rank_report(const QStarProxy& proxy,
                              const std::vector<double>& deltas);

// zeta_r: l_inf gap between the proxy and its best rank-r SVD truncation.
double bias_zeta(const QStarProxy& proxy, int r);

// Error function adapter for run_algorithm.
ErrorFn proxy_error_fn(std::shared_ptr<const QStarProxy> proxy);

}  // namespace lowrl
