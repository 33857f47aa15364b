#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dhash {

// Column-major dense storage: column i of a D x m data matrix is sample i.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

struct EigenPairs {
  Matrix vectors;  // p x k, orthonormal columns
  Vector values;   // k, descending
};

// Top-k eigenpairs of a symmetric matrix, sorted by eigenvalue descending.
// Ties keep the solver's index order; each eigenvector is signed so that its
// largest-magnitude entry is positive.
EigenPairs top_eigenpairs(const Matrix& a, Eigen::Index k);

inline Matrix top_eigvecs(const Matrix& a, Eigen::Index k) {
  return top_eigenpairs(a, k).vectors;
}

// Orthogonal R maximizing trace(R^T M): R = U V^T for M = U S V^T.
Matrix procrustes_rotation(const Matrix& m);

double frobenius_sq(const Matrix& a);

// Sample covariance with mean subtraction and 1/(m-1) normalization.
// Columns are samples. For m == 1 the normalization falls back to 1.
Matrix covariance(const Matrix& x);

Vector column_mean(const Matrix& x);

bool all_finite(const Matrix& a);

}  // namespace dhash
