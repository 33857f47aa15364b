#include "dhash/objective.hpp"

#include <cmath>
#include <string>

namespace dhash {

void HashPenalties::validate() const {
  for (double v : {lambda1, lambda2, lambda3, lambda4}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("penalty weights must be finite and non-negative");
    }
  }
}

namespace detail {

double code_penalty_loss(const Matrix& h, const Matrix& b, const HashPenalties& pen) {
  const double m = static_cast<double>(h.cols());
  double loss = 0.0;
  if (pen.lambda2 != 0.0) loss += pen.lambda2 / (2.0 * m) * (h - b).squaredNorm();
  if (pen.lambda3 != 0.0) {
    const Matrix gram = (h * h.transpose()) / m - Matrix::Identity(h.rows(), h.rows());
    loss += pen.lambda3 / 2.0 * gram.squaredNorm();
  }
  if (pen.lambda4 != 0.0) loss += pen.lambda4 / (2.0 * m) * h.rowwise().sum().squaredNorm();
  return loss;
}

Matrix code_penalty_grad(const Matrix& h, const Matrix& b, const HashPenalties& pen) {
  const double m = static_cast<double>(h.cols());
  Matrix g = Matrix::Zero(h.rows(), h.cols());
  if (pen.lambda2 != 0.0) g += (pen.lambda2 / m) * (h - b);
  if (pen.lambda3 != 0.0) {
    const Matrix gram = (h * h.transpose()) / m - Matrix::Identity(h.rows(), h.rows());
    g += (2.0 * pen.lambda3 / m) * (gram * h);
  }
  if (pen.lambda4 != 0.0) {
    // H 1_{m x m} == (H 1_{m x 1}) 1_{1 x m}
    const Vector row_sums = h.rowwise().sum();
    g.colwise() += (pen.lambda4 / m) * row_sums;
  }
  return g;
}

double weight_decay_loss(const NetworkParams& params, double lambda1) {
  if (lambda1 == 0.0) return 0.0;
  double s = 0.0;
  for (const Matrix& w : params.weights) s += w.squaredNorm();
  return lambda1 / 2.0 * s;
}

void backprop_encoder(const NetworkParams& params, const ForwardTrace& trace, Matrix delta,
                      std::size_t top, double lambda1, GradientSet& grad) {
  for (std::size_t j = top; j >= 1; --j) {
    grad.d_weights[j - 1] = delta * trace.h[j - 1].transpose();
    if (lambda1 != 0.0) grad.d_weights[j - 1] += lambda1 * params.weights[j - 1];
    grad.d_biases[j - 1] = delta.rowwise().sum();
    if (j == 1) break;
    Matrix back = params.weights[j - 1].transpose() * delta;
    delta = back.cwiseProduct(
        activation_derivative(params.activations[j - 2], trace.z[j - 1], trace.h[j - 1]));
  }
}

void check_codes(const Matrix& b, Eigen::Index rows, Eigen::Index cols, const char* who) {
  if (b.rows() != rows || b.cols() != cols) {
    throw ShapeError(std::string(who) + ": code matrix is " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ", expected " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      if (b(i, j) != 1.0 && b(i, j) != -1.0) {
        throw ShapeError(std::string(who) + ": code entries must be -1 or +1");
      }
    }
  }
}

}  // namespace detail
}  // namespace dhash
