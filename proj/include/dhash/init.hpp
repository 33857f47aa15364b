#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dhash/network.hpp"
#include "dhash/numerics.hpp"

namespace dhash {

enum class Mode { unsupervised, supervised };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

struct ItqOptions {
  int iterations = 50;
  std::uint64_t seed = 0;
  // Start from R = I instead of a random orthogonal matrix.
  bool identity_start = false;
};

struct ItqResult {
  Matrix b;         // L x m over {-1, +1}
  Matrix rotation;  // final R, L x L
  Matrix projection;  // D x L principal directions
  Vector mean;
  // |B - R^T P|^2 for the starting rotation, then after each iteration.
  std::vector<double> quantization_loss;
  // |R^T R - I|_F for the starting rotation, then after each iteration.
  std::vector<double> orthogonality_error;
  std::vector<std::string> warnings;
};

// Iterative quantization: PCA to L dims on centered data, then alternate
// B = sgn(R^T P) and R = procrustes(P B^T). Returns B = sgn(R^T P) for the
// final rotation.
ItqResult itq(const Matrix& x, Eigen::Index bits, const ItqOptions& opts);

inline Matrix itq_init(const Matrix& x, Eigen::Index bits, int iterations, std::uint64_t seed) {
  return itq(x, bits, ItqOptions{iterations, seed, false}).b;
}

// Haar-ish random orthogonal matrix from the QR factorization of a seeded
// Gaussian matrix (column signs fixed so that diag(R_qr) > 0).
Matrix random_orthogonal(Eigen::Index n, std::uint64_t seed);

// Network initialization:
//  - all biases zero;
//  - W^(1) = top-s_2 eigenvectors of cov(X), one per row;
//  - each further encoder weight = top eigenvectors of cov(H^(l)) computed by
//    forwarding X through the already initialized prefix;
//  - unsupervised only: decoder W^(n-1) = rectangular identity I_{D x L}.
// Throws std::invalid_argument when a layer would need more eigenvectors than
// its input dimension.
NetworkParams init_network(const Matrix& x, const std::vector<Eigen::Index>& layer_sizes,
                           const std::vector<Activation>& activations, Mode mode);

// Small random Gaussian weights; a test utility, not used in training.
NetworkParams random_network(const std::vector<Eigen::Index>& layer_sizes,
                             const std::vector<Activation>& activations, double scale,
                             std::uint64_t seed);

}  // namespace dhash
