#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dhash/numerics.hpp"

namespace dhash {

class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

enum class Activation { sigmoid, linear };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

// Elementwise activation and its derivative expressed through the activation
// value (sigmoid: h(1-h)) or pre-activation (linear: 1).
Matrix apply_activation(Activation a, const Matrix& z);
Matrix activation_derivative(Activation a, const Matrix& z, const Matrix& h);

// A feed-forward network with n = layer_sizes.size() layers. Layer indices in
// this struct are zero-based: weights[i] maps layer i (size s_i) to layer i+1
// and activations[i] is the activation of layer i+1. Layer 0 is the input.
struct NetworkParams {
  std::vector<Eigen::Index> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::vector<Activation> activations;

  std::size_t num_layers() const { return layer_sizes.size(); }

  // Throws ShapeError if shapes disagree with layer_sizes.
  void validate() const;

  static NetworkParams zeros(std::vector<Eigen::Index> sizes, std::vector<Activation> acts);

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// H[0] = X; for l >= 1, Z[l] = W[l-1] H[l-1] + c[l-1] 1^T and H[l] = f_l(Z[l]).
// Z[0] is left empty.
struct ForwardTrace {
  std::vector<Matrix> h;
  std::vector<Matrix> z;
};

// Runs the first `upto` layers (1 <= upto <= n). The trace holds `upto`
// activation matrices.
ForwardTrace forward(const NetworkParams& params, const Matrix& x, std::size_t upto);

// Entrywise sign with sgn(0) = +1.
Matrix sgn(const Matrix& a);

}  // namespace dhash
