#pragma once

#include <cstdint>
#include <vector>

#include "dhash/objective.hpp"

namespace dhash {

struct PairwiseLabels {
  Matrix s;                                // m x m, +1 same class, -1 otherwise
  std::vector<std::size_t> sample_indices;  // rows of the full training set
};

// Selects n_s samples per class uniformly at random (seeded) and builds the
// pairwise label matrix over the selection. Classes are visited in ascending
// label order; indices within a class are kept in ascending order.
PairwiseLabels build_pairwise(const std::vector<int>& labels, std::size_t n_s, std::uint64_t seed);

// Pairwise label matrix over the given labels as-is (no selection).
Matrix pairwise_matrix(const std::vector<int>& labels);

// Supervised objective on an n-layer encoder whose last layer is the code:
//
//   J = (1/2m)|(1/L) H^T H - S|^2 + (lambda1/2) sum |W_l|^2
//     + (lambda2/2m)|H - B|^2 + (lambda3/2)|(1/m) H H^T - I|^2
//     + (lambda4/2m)|H 1|^2
double sup_loss(const NetworkParams& params, const Matrix& x, const Matrix& b, const Matrix& s,
                const HashPenalties& pen);

GradientSet sup_grad(const NetworkParams& params, const Matrix& x, const Matrix& b,
                     const Matrix& s, const HashPenalties& pen);

LossAndGradient sup_loss_and_grad(const NetworkParams& params, const Matrix& x, const Matrix& b,
                                  const Matrix& s, const HashPenalties& pen);

// (1/2m)|(1/L) H^T H - S|^2 alone.
double pairwise_fit_term(const Matrix& h, const Matrix& s);

Matrix sup_code_activations(const NetworkParams& params, const Matrix& x);

// argmin_B |H - B|^2 over {-1,+1}: B = sgn(H), sgn(0) = +1.
Matrix sup_b_step(const Matrix& h_code);

}  // namespace dhash
