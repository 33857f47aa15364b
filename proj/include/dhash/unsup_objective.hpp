#pragma once

#include <vector>

#include "dhash/objective.hpp"

namespace dhash {

// Unsupervised objective for an n-layer autoencoder whose layer n-1 is the
// L-bit code layer and whose last weight (W^(n-1), c^(n-1)) is a linear
// decoder applied to the binary codes B:
//
//   J = (1/2m)|X - W B - c 1^T|^2 + (lambda1/2) sum |W_l|^2
//     + (lambda2/2m)|H - B|^2 + (lambda3/2)|(1/m) H H^T - I|^2
//     + (lambda4/2m)|H 1|^2
//
// where H is the code-layer activation.
double unsup_loss(const NetworkParams& params, const Matrix& x, const Matrix& b,
                  const HashPenalties& pen);

GradientSet unsup_grad(const NetworkParams& params, const Matrix& x, const Matrix& b,
                       const HashPenalties& pen);

// Loss and gradient from a single forward pass.
LossAndGradient unsup_loss_and_grad(const NetworkParams& params, const Matrix& x,
                                    const Matrix& b, const HashPenalties& pen);

// Code-layer activations H^(n-1) for the unsupervised network.
Matrix unsup_code_activations(const NetworkParams& params, const Matrix& x);

struct DccOptions {
  int max_sweeps = 10;
  // Record the B-step objective after every row update (diagnostics/tests).
  bool record_trace = false;
};

struct DccResult {
  Matrix b;
  int sweeps = 0;
  std::size_t flips = 0;
  bool converged = false;  // last sweep changed no row
  std::vector<double> objective_trace;  // initial value, then one per row update
};

// |X - W B - c 1^T|^2 + lambda2 |H - B|^2 with (W, c) the decoder.
double dcc_objective(const NetworkParams& params, const Matrix& x, const Matrix& h_code,
                     const Matrix& b, double lambda2);

// Discrete cyclic coordinate descent on B with the decoder and H fixed. Each
// row b_k^T is set to sgn(q_k^T - w_k^T W_1 B_1); full sweeps repeat until
// no row changes or max_sweeps is reached.
DccResult dcc_b_step(const NetworkParams& params, const Matrix& x, const Matrix& h_code,
                     const Matrix& b_init, double lambda2, const DccOptions& opts = {});

}  // namespace dhash
