#pragma once

#include <Eigen/Dense>

#include "lowrl/errors.hpp"

namespace lowrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Nonincreasing list of nonnegative singular values.
using SingularSpectrum = Eigen::VectorXd;

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Dense matrix with an observation mask. Unobserved entries are ignored by
// every estimator; fill_value() materializes them for methods that need a
// complete matrix.
struct MaskedMatrix {
  Matrix values;
  BoolMatrix observed;

  MaskedMatrix() = default;
  MaskedMatrix(Matrix v, BoolMatrix obs);

  // Fully observed matrix.
  static MaskedMatrix full(Matrix v);

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  Index observed_count() const;
  bool row_observed(Index i) const;
  bool col_observed(Index j) const;
  Matrix filled(double fill) const;
};

// Full singular value spectrum, nonincreasing.
SingularSpectrum svd_spectrum(const Matrix& m);

// Moore-Penrose pseudoinverse with relative truncation: singular values
// below rank_tol * sigma_1 are treated as zero.
Matrix pseudoinverse(const Matrix& m, double rank_tol = 1e-10);

// Smallest r such that the tail energy sum_{i>r} sigma_i^2 is at most delta.
int effective_rank(const SingularSpectrum& spectrum, double delta);

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace lowrl
