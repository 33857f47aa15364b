#include "dhash/network.hpp"

#include <cmath>

namespace dhash {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::linear:
      return "linear";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view s) {
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "linear") return Activation::linear;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

Matrix apply_activation(Activation a, const Matrix& z) {
  if (a == Activation::linear) return z;
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Matrix activation_derivative(Activation a, const Matrix& z, const Matrix& h) {
  if (a == Activation::linear) return Matrix::Ones(z.rows(), z.cols());
  return h.array() * (1.0 - h.array());
}

void NetworkParams::validate() const {
  const std::size_t n = layer_sizes.size();
  if (n < 2) throw ShapeError("network needs at least 2 layers");
  if (weights.size() != n - 1 || biases.size() != n - 1 || activations.size() != n - 1) {
    throw ShapeError("network: expected " + std::to_string(n - 1) +
                     " weight/bias/activation entries");
  }
  for (std::size_t l = 0; l + 1 < n; ++l) {
    if (layer_sizes[l] < 1 || layer_sizes[l + 1] < 1) {
      throw ShapeError("network: layer sizes must be positive");
    }
    if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l]) {
      throw ShapeError("network: weight " + std::to_string(l + 1) + " has shape " +
                       std::to_string(weights[l].rows()) + "x" +
                       std::to_string(weights[l].cols()) + ", expected " +
                       std::to_string(layer_sizes[l + 1]) + "x" +
                       std::to_string(layer_sizes[l]));
    }
    if (biases[l].size() != layer_sizes[l + 1]) {
      throw ShapeError("network: bias " + std::to_string(l + 1) + " has wrong length");
    }
  }
}

NetworkParams NetworkParams::zeros(std::vector<Eigen::Index> sizes,
                                   std::vector<Activation> acts) {
  NetworkParams p;
  p.layer_sizes = std::move(sizes);
  p.activations = std::move(acts);
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    p.weights.push_back(Matrix::Zero(p.layer_sizes[l + 1], p.layer_sizes[l]));
    p.biases.push_back(Vector::Zero(p.layer_sizes[l + 1]));
  }
  p.validate();
  return p;
}

ForwardTrace forward(const NetworkParams& params, const Matrix& x, std::size_t upto) {
  params.validate();
  if (upto < 1 || upto > params.num_layers()) {
    throw ShapeError("forward: layer count " + std::to_string(upto) + " out of range");
  }
  if (x.rows() != params.layer_sizes[0]) {
    throw ShapeError("forward: input has " + std::to_string(x.rows()) +
                     " rows, network expects " + std::to_string(params.layer_sizes[0]));
  }
  ForwardTrace trace;
  trace.h.reserve(upto);
  trace.z.reserve(upto);
  trace.h.push_back(x);
  trace.z.emplace_back();
  for (std::size_t l = 1; l < upto; ++l) {
    Matrix z = params.weights[l - 1] * trace.h[l - 1];
    z.colwise() += params.biases[l - 1];
    Matrix h = apply_activation(params.activations[l - 1], z);
    if (!h.allFinite()) {
      throw NumericsError("forward: non-finite activations at layer " + std::to_string(l + 1));
    }
    trace.z.push_back(std::move(z));
    trace.h.push_back(std::move(h));
  }
  return trace;
}

Matrix sgn(const Matrix& a) {
  return a.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
}

}  // namespace dhash
