#include "dhash/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace dhash {

EigenPairs top_eigenpairs(const Matrix& a, Eigen::Index k) {
  if (a.rows() != a.cols()) {
    throw NumericsError("top_eigvecs: matrix is not square");
  }
  const Eigen::Index p = a.rows();
  if (k < 1 || k > p) {
    throw NumericsError("top_eigvecs: k = " + std::to_string(k) +
                        " out of range [1, " + std::to_string(p) + "]");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw NumericsError("top_eigvecs: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericsError("top_eigvecs: eigensolver did not converge");
  }
  const Vector& values = solver.eigenvalues();  // ascending
  const Matrix& vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return values(i) > values(j);
  });

  EigenPairs out{Matrix(p, k), Vector(k)};
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    Vector v = vectors.col(src);
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < p; ++r) {
      if (std::abs(v(r)) > std::abs(v(arg))) arg = r;
    }
    if (v(arg) < 0) v = -v;
    out.vectors.col(c) = v;
    out.values(c) = values(src);
  }
  return out;
}

Matrix procrustes_rotation(const Matrix& m) {
  if (!all_finite(m)) {
    throw NumericsError("procrustes_rotation: non-finite input");
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw NumericsError("procrustes_rotation: SVD did not converge");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

double frobenius_sq(const Matrix& a) { return a.squaredNorm(); }

Vector column_mean(const Matrix& x) {
  if (x.cols() == 0) return Vector::Zero(x.rows());
  return x.rowwise().mean();
}

Matrix covariance(const Matrix& x) {
  const Matrix centered = x.colwise() - column_mean(x);
  const double denom = x.cols() > 1 ? static_cast<double>(x.cols() - 1) : 1.0;
  Matrix cov = (centered * centered.transpose()) / denom;
  // Symmetrize exactly; the product is symmetric only up to rounding.
  return 0.5 * (cov + cov.transpose());
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace dhash
