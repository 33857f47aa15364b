#include "dhash/init.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dhash {

std::string_view to_string(Mode m) {
  return m == Mode::unsupervised ? "unsup" : "sup";
}

Mode mode_from_string(std::string_view s) {
  if (s == "unsup" || s == "unsupervised") return Mode::unsupervised;
  if (s == "sup" || s == "supervised") return Mode::supervised;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "' (expected unsup or sup)");
}

Matrix random_orthogonal(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

ItqResult itq(const Matrix& x, Eigen::Index bits, const ItqOptions& opts) {
  if (bits < 1) throw std::invalid_argument("itq: code length must be >= 1");
  if (bits > x.rows()) {
    throw std::invalid_argument("itq: code length " + std::to_string(bits) +
                                " exceeds data dimension " + std::to_string(x.rows()));
  }
  if (x.cols() <= bits) {
    throw std::invalid_argument("itq: need more samples than bits");
  }
  if (!x.allFinite()) throw NumericsError("itq: non-finite data");
  if (opts.iterations < 0) throw std::invalid_argument("itq: iterations must be >= 0");

  ItqResult out;
  out.mean = column_mean(x);
  const Matrix cov = covariance(x);
  EigenPairs eig = top_eigenpairs(cov, bits);
  const double tiny = 1e-12 * std::max(1.0, std::abs(eig.values(0)));
  for (Eigen::Index k = 0; k < bits; ++k) {
    if (eig.values(k) <= tiny) {
      out.warnings.push_back("itq: covariance has fewer than " + std::to_string(bits) +
                             " non-zero eigenvalues; using null-space directions");
      break;
    }
  }
  out.projection = eig.vectors;

  Matrix centered = x.colwise() - out.mean;
  const Matrix p = out.projection.transpose() * centered;  // L x m

  const Matrix eye = Matrix::Identity(bits, bits);
  Matrix r = opts.identity_start ? eye : random_orthogonal(bits, opts.seed);
  auto record = [&](const Matrix& rot) {
    const Matrix rp = rot.transpose() * p;
    out.quantization_loss.push_back((sgn(rp) - rp).squaredNorm());
    out.orthogonality_error.push_back((rot.transpose() * rot - eye).norm());
  };
  record(r);
  for (int it = 0; it < opts.iterations; ++it) {
    const Matrix b = sgn(r.transpose() * p);
    r = procrustes_rotation(p * b.transpose());
    record(r);
  }
  out.rotation = r;
  out.b = sgn(r.transpose() * p);
  return out;
}

NetworkParams init_network(const Matrix& x, const std::vector<Eigen::Index>& layer_sizes,
                           const std::vector<Activation>& activations, Mode mode) {
  NetworkParams params = NetworkParams::zeros(layer_sizes, activations);
  const std::size_t n = params.num_layers();
  if (x.rows() != layer_sizes.front()) {
    throw ShapeError("init_network: data dimension does not match the input layer");
  }
  std::size_t eig_layers = n - 1;
  if (mode == Mode::unsupervised) {
    if (n < 3) throw std::invalid_argument("init_network: unsupervised network needs >= 3 layers");
    if (layer_sizes.back() != layer_sizes.front()) {
      throw std::invalid_argument("init_network: unsupervised output size must equal input size");
    }
    if (layer_sizes[n - 2] > layer_sizes.back()) {
      throw std::invalid_argument("init_network: code length exceeds the output dimension");
    }
    eig_layers = n - 2;
  }
  for (std::size_t l = 0; l < eig_layers; ++l) {
    if (layer_sizes[l + 1] > layer_sizes[l]) {
      throw std::invalid_argument("init_network: layer " + std::to_string(l + 2) + " has " +
                                  std::to_string(layer_sizes[l + 1]) +
                                  " units but its input has only " +
                                  std::to_string(layer_sizes[l]) + " dimensions");
    }
  }

  Matrix h = x;
  for (std::size_t l = 0; l < eig_layers; ++l) {
    params.weights[l] = top_eigvecs(covariance(h), layer_sizes[l + 1]).transpose();
    if (l + 1 < eig_layers) {
      Matrix z = params.weights[l] * h;  // biases are zero
      h = apply_activation(params.activations[l], z);
    }
  }
  if (mode == Mode::unsupervised) {
    params.weights[n - 2] = Matrix::Identity(layer_sizes.back(), layer_sizes[n - 2]);
  }
  return params;
}

NetworkParams random_network(const std::vector<Eigen::Index>& layer_sizes,
                             const std::vector<Activation>& activations, double scale,
                             std::uint64_t seed) {
  NetworkParams params = NetworkParams::zeros(layer_sizes, activations);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < params.weights[l].size(); ++i) {
      params.weights[l].data()[i] = normal(rng);
    }
    for (Eigen::Index i = 0; i < params.biases[l].size(); ++i) params.biases[l](i) = normal(rng);
  }
  return params;
}

}  // namespace dhash
