#include "lowrl/linalg.hpp"

#include <Eigen/SVD>

namespace lowrl {

MaskedMatrix::MaskedMatrix(Matrix v, BoolMatrix obs)
    : values(std::move(v)), observed(std::move(obs)) {
  if (values.rows() != observed.rows() || values.cols() != observed.cols())
    throw InputError("MaskedMatrix: value/mask shape mismatch");
}

MaskedMatrix MaskedMatrix::full(Matrix v) {
  MaskedMatrix m;
  m.observed = BoolMatrix::Constant(v.rows(), v.cols(), true);
  m.values = std::move(v);
  return m;
}

Index MaskedMatrix::observed_count() const {
  return observed.cast<Index>().sum();
}

bool MaskedMatrix::row_observed(Index i) const {
  return observed.row(i).all();
}

bool MaskedMatrix::col_observed(Index j) const {
  return observed.col(j).all();
}

Matrix MaskedMatrix::filled(double fill) const {
  Matrix out = Matrix::Constant(rows(), cols(), fill);
  for (Index j = 0; j < cols(); ++j)
    for (Index i = 0; i < rows(); ++i)
      if (observed(i, j)) out(i, j) = values(i, j);
  return out;
}

SingularSpectrum svd_spectrum(const Matrix& m) {
  if (!all_finite(m)) throw InputError("svd_spectrum: non-finite entries");
  if (m.rows() == 0 || m.cols() == 0) return SingularSpectrum(0);
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

Matrix pseudoinverse(const Matrix& m, double rank_tol) {
  if (!all_finite(m)) throw InputError("pseudoinverse: non-finite entries");
  if (rank_tol <= 0.0 || rank_tol >= 1.0)
    throw InputError("pseudoinverse: rank_tol must lie in (0,1)");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return Matrix::Zero(m.cols(), m.rows());
  const double cutoff = rank_tol * sv(0);
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) >= cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

int effective_rank(const SingularSpectrum& spectrum, double delta) {
  if (delta < 0.0) throw InputError("effective_rank: delta must be >= 0");
  const Index n = spectrum.size();
  // tail(r) = sum_{i > r} sigma_i^2, evaluated from the smallest values up.
  double tail = 0.0;
  int r = static_cast<int>(n);
  while (r > 0) {
    const double next = tail + spectrum(r - 1) * spectrum(r - 1);
    if (next > delta) break;
    tail = next;
    --r;
  }
  return r;
}

}  // namespace lowrl
