#include "lowrl/me.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace lowrl {

namespace {

double observed_scale(const MaskedMatrix& q) {
  double s = 0.0;
  for (Index j = 0; j < q.cols(); ++j)
    for (Index i = 0; i < q.rows(); ++i)
      if (q.observed(i, j)) s = std::max(s, std::abs(q.values(i, j)));
  return s;
}

void require_cross_observed(const MaskedMatrix& q,
                            const std::vector<Index>& rows,
                            const std::vector<Index>& cols) {
  for (Index i : rows) {
    if (i < 0 || i >= q.rows())
      throw InputError("anchor row index out of range");
    if (!q.row_observed(i)) throw InputError("anchor row not fully observed");
  }
  for (Index j : cols) {
    if (j < 0 || j >= q.cols())
      throw InputError("anchor col index out of range");
    if (!q.col_observed(j)) throw InputError("anchor col not fully observed");
  }
}

void clip_to(Matrix& m, std::optional<double> v_max) {
  if (!v_max) return;
  m = m.cwiseMax(-*v_max).cwiseMin(*v_max);
}

Matrix submatrix(const Matrix& m, const std::vector<Index>& rows,
                 const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out(static_cast<Index>(a), static_cast<Index>(b)) = m(rows[a], cols[b]);
  return out;
}

}  // namespace

Matrix me_rank1(const MaskedMatrix& qhat, Index anchor_row, Index anchor_col,
                const MeOptions& opts) {
  require_cross_observed(qhat, {anchor_row}, {anchor_col});
  const double pivot = qhat.values(anchor_row, anchor_col);
  const double scale = opts.v_max ? *opts.v_max : observed_scale(qhat);
  if (std::abs(pivot) < opts.pivot_rel_tol * scale)
    throw SingularPivotError("me_rank1: anchor pivot below threshold");
  const Vector col = qhat.values.col(anchor_col);  // q(., a#)
  const Vector row = qhat.values.row(anchor_row);  // q(s#, .)
  Matrix out = col * row.transpose() / pivot;
  return out;
}

Matrix me_rank2_explicit(const MaskedMatrix& qhat, Index anchor_row1,
                         Index anchor_row2, Index anchor_col1,
                         Index anchor_col2, const MeOptions& opts) {
  require_cross_observed(qhat, {anchor_row1, anchor_row2},
                         {anchor_col1, anchor_col2});
  const Matrix& q = qhat.values;
  const double b11 = q(anchor_row1, anchor_col1);
  const double b12 = q(anchor_row1, anchor_col2);
  const double b21 = q(anchor_row2, anchor_col1);
  const double b22 = q(anchor_row2, anchor_col2);
  const double det = b11 * b22 - b12 * b21;
  const double scale = opts.v_max ? *opts.v_max : observed_scale(qhat);
  if (std::abs(det) < opts.pivot_rel_tol * scale * scale)
    throw DegenerateAnchorError("me_rank2: anchor block determinant ~ 0");

  const Vector c1 = q.col(anchor_col1), c2 = q.col(anchor_col2);
  const Vector r1 = q.row(anchor_row1), r2 = q.row(anchor_row2);
  // [c1 c2] * adj(B) * [r1; r2] / det, expanded column-wise.
  Matrix out = (c1 * (b22 * r1 - b12 * r2).transpose() +
                c2 * (b11 * r2 - b21 * r1).transpose()) /
               det;
  return out;
}

Matrix me_rankr_anchor(const MaskedMatrix& qhat,
                       const std::vector<Index>& anchor_rows,
                       const std::vector<Index>& anchor_cols,
                       double rank_tol, std::optional<int> required_rank,
                       std::optional<double> sigma_floor) {
  if (anchor_rows.empty() || anchor_cols.empty())
    throw InputError("me_rankr_anchor: empty anchor set");
  require_cross_observed(qhat, anchor_rows, anchor_cols);

  const Matrix block = submatrix(qhat.values, anchor_rows, anchor_cols);
  const int max_rank =
      static_cast<int>(std::min(block.rows(), block.cols()));
  const int want = required_rank ? *required_rank : max_rank;
  if (want < 1 || want > max_rank)
    throw InputError("me_rankr_anchor: required_rank out of range");

  Eigen::BDCSVD<Matrix> svd(block);
  const auto& sv = svd.singularValues();
  const double sigma_want = sv(want - 1);
  const double floor = sigma_floor ? *sigma_floor : 0.0;
  if (sigma_want <= std::max(rank_tol * sv(0), floor))
    throw DegenerateAnchorError(
        "me_rankr_anchor: anchor block rank-deficient for requested rank");

  Matrix c(qhat.rows(), static_cast<Index>(anchor_cols.size()));
  for (std::size_t b = 0; b < anchor_cols.size(); ++b)
    c.col(static_cast<Index>(b)) = qhat.values.col(anchor_cols[b]);
  Matrix brows(static_cast<Index>(anchor_rows.size()), qhat.cols());
  for (std::size_t a = 0; a < anchor_rows.size(); ++a)
    brows.row(static_cast<Index>(a)) = qhat.values.row(anchor_rows[a]);

  return c * pseudoinverse(block, rank_tol) * brows;
}

double anchor_rank_certificate(const MaskedMatrix& qhat,
                               const std::vector<Index>& anchor_rows,
                               const std::vector<Index>& anchor_cols) {
  require_cross_observed(qhat, anchor_rows, anchor_cols);
  const Matrix block = submatrix(qhat.values, anchor_rows, anchor_cols);
  const auto sv = svd_spectrum(block);
  return sv(sv.size() - 1);
}

Matrix me_usvt(const MaskedMatrix& qhat, double sample_prob,
               double threshold_mult, std::optional<double> v_max) {
  if (!(sample_prob > 0.0 && sample_prob <= 1.0))
    throw InputError("me_usvt: sample_prob must lie in (0,1]");
  if (threshold_mult < 0.0)
    throw InputError("me_usvt: threshold_mult must be >= 0");
  Matrix y = qhat.filled(0.0) / sample_prob;
  Eigen::BDCSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double thr =
      threshold_mult * std::sqrt(static_cast<double>(
                           std::max(qhat.rows(), qhat.cols())));
  Vector kept = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) kept(i) = sv(i);
  Matrix out = svd.matrixU() * kept.asDiagonal() * svd.matrixV().transpose();
  clip_to(out, v_max);
  return out;
}

SoftImputeResult me_soft_impute(const MaskedMatrix& qhat, double lambda,
                                int max_iters, double tol,
                                std::optional<double> v_max) {
  if (lambda < 0.0) throw InputError("me_soft_impute: lambda must be >= 0");
  if (max_iters < 1) throw InputError("me_soft_impute: max_iters must be >= 1");

  SoftImputeResult res;
  Matrix x = qhat.filled(0.0);
  Matrix z = Matrix::Zero(qhat.rows(), qhat.cols());
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector sv = svd.singularValues();
    for (Index i = 0; i < sv.size(); ++i)
      sv(i) = std::max(sv(i) - lambda, 0.0);
    Matrix z_new = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
    const double delta = (z_new - z).norm();
    const double base = std::max(1.0, z.norm());
    z = std::move(z_new);
    res.iterations = it;
    if (it > 1 && delta <= tol * base) {
      res.converged = true;
      break;
    }
    // Re-impute: observed entries stay fixed, the rest come from z.
    for (Index j = 0; j < x.cols(); ++j)
      for (Index i = 0; i < x.rows(); ++i)
        if (!qhat.observed(i, j)) x(i, j) = z(i, j);
  }
  clip_to(z, v_max);
  res.estimate = std::move(z);
  return res;
}

double me_error_constant(int r, double sigma_r, double v_max, int n_anchor_s,
                         int n_anchor_a) {
  if (r < 1 || n_anchor_s < 1 || n_anchor_a < 1)
    throw InputError("me_error_constant: counts must be >= 1");
  if (!(sigma_r > 0.0))
    throw InputError("me_error_constant: sigma_r must be > 0");
  const double x =
      std::sqrt(static_cast<double>(n_anchor_s) * n_anchor_a) / sigma_r;
  return (6.0 * std::numbers::sqrt2 * x +
          2.0 * (1.0 + std::sqrt(5.0)) * x * x) *
         v_max;
}

double me_error_constant(int r, double sigma_r, double v_max) {
  return me_error_constant(r, sigma_r, v_max, r, r);
}

}  // namespace lowrl
