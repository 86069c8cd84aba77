#pragma once

#include <optional>
#include <vector>

#include "lowrl/linalg.hpp"

namespace lowrl {

// Entrywise guarantee carried by an anchor-based estimator: the l_inf input
// error is amplified by at most c_me, using an exploration set of size at
// most big_c_me * (|S| + |A|), valid for input error up to eps_validity.
struct MEGuarantee {
  double c_me = 1.0;
  double big_c_me = 1.0;
  double eps_validity = 0.0;
};

struct MeOptions {
  // Scale for pivot/degeneracy thresholds and output clipping. When absent,
  // the max-abs observed entry is used as the scale and no clipping happens.
  std::optional<double> v_max;
  double pivot_rel_tol = 1e-8;
  double rank_tol = 1e-10;
};

// Rank-1 anchor estimator: every entry is the cross ratio
// q(i, ac) * q(ar, j) / q(ar, ac). The anchor row and column must be fully
// observed and the pivot |q(ar, ac)| must clear the threshold.
Matrix me_rank1(const MaskedMatrix& qhat, Index anchor_row, Index anchor_col,
                const MeOptions& opts = {});

// Rank-2 closed form: [q(i,ac1) q(i,ac2)] adj(B) [q(ar1,j); q(ar2,j)] / det(B)
// with B the 2x2 anchor block.
Matrix me_rank2_explicit(const MaskedMatrix& qhat, Index anchor_row1,
                         Index anchor_row2, Index anchor_col1,
                         Index anchor_col2, const MeOptions& opts = {});

// General anchor estimator Qbar = C * pinv(A) * B where A is the anchor
// block, C the anchor columns and B the anchor rows. required_rank (default
// min(#rows, #cols)) must be certified by the block spectrum or a
// DegenerateAnchorError is raised.
Matrix me_rankr_anchor(const MaskedMatrix& qhat,
                       const std::vector<Index>& anchor_rows,
                       const std::vector<Index>& anchor_cols,
                       double rank_tol = 1e-10,
                       std::optional<int> required_rank = std::nullopt,
                       std::optional<double> sigma_floor = std::nullopt);

// Smallest singular value of the anchor block that the estimator relies on;
// the rank certificate logged per iteration.
double anchor_rank_certificate(const MaskedMatrix& qhat,
                               const std::vector<Index>& anchor_rows,
                               const std::vector<Index>& anchor_cols);

// Spectral thresholding baseline: zero-fill, rescale by 1/p, keep singular
// values above threshold_mult * sqrt(max(m, n)).
Matrix me_usvt(const MaskedMatrix& qhat, double sample_prob,
               double threshold_mult, std::optional<double> v_max = {});

struct SoftImputeResult {
  Matrix estimate;
  bool converged = false;
  int iterations = 0;
};

// Iterative impute-then-soft-threshold baseline, warm started from zero.
SoftImputeResult me_soft_impute(const MaskedMatrix& qhat, double lambda,
                                int max_iters, double tol,
                                std::optional<double> v_max = {});

// Amplification constant phi_c(r; S#, A#) =
//   (6*sqrt(2) * x + 2*(1+sqrt(5)) * x^2) * v_max,  x = sqrt(ns*na)/sigma_r.
// Reduces to the square-anchor constant c(r; .) when ns == na == r.
double me_error_constant(int r, double sigma_r, double v_max, int n_anchor_s,
                         int n_anchor_a);
double me_error_constant(int r, double sigma_r, double v_max);

}  // namespace lowrl
