#pragma once

#include <vector>

#include "dhash/network.hpp"
#include "dhash/numerics.hpp"

namespace dhash {

// Penalty weights shared by the unsupervised and supervised objectives:
// lambda1 weight decay, lambda2 discretization (H vs B), lambda3 bit
// independence, lambda4 bit balance.
struct HashPenalties {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double lambda4 = 0.0;

  void validate() const;
  friend bool operator==(const HashPenalties&, const HashPenalties&) = default;
};

// Per-parameter gradients with the same shapes as NetworkParams.
struct GradientSet {
  std::vector<Matrix> d_weights;
  std::vector<Vector> d_biases;
};

struct LossAndGradient {
  double loss = 0.0;
  GradientSet gradient;
};

namespace detail {

// (lambda2/2m)|H - B|^2 + (lambda3/2)|(1/m) H H^T - I|^2 + (lambda4/2m)|H 1|^2
double code_penalty_loss(const Matrix& h, const Matrix& b, const HashPenalties& pen);

// Derivative of code_penalty_loss w.r.t. H.
Matrix code_penalty_grad(const Matrix& h, const Matrix& b, const HashPenalties& pen);

// (lambda1/2) * sum_l |W_l|^2 over every weight matrix.
double weight_decay_loss(const NetworkParams& params, double lambda1);

// Backpropagates `delta` (already multiplied by the activation derivative of
// layer `top`) down to the input and fills dW/dc for weights[0..top-1],
// adding lambda1 * W to each weight gradient.
void backprop_encoder(const NetworkParams& params, const ForwardTrace& trace, Matrix delta,
                      std::size_t top, double lambda1, GradientSet& grad);

void check_codes(const Matrix& b, Eigen::Index rows, Eigen::Index cols, const char* who);

}  // namespace detail

}  // namespace dhash
