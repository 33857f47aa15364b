#include "dhash/sup_objective.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace dhash {
namespace {

void check_sup_shapes(const NetworkParams& params, const Matrix& x, const char* who) {
  params.validate();
  if (x.rows() != params.layer_sizes.front()) {
    throw ShapeError(std::string(who) + ": data dimension does not match network input");
  }
  if (x.cols() < 1) throw ShapeError(std::string(who) + ": need at least one sample");
}

}  // namespace

Matrix pairwise_matrix(const std::vector<int>& labels) {
  const auto m = static_cast<Eigen::Index>(labels.size());
  Matrix s(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      s(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : -1.0;
    }
  }
  return s;
}

PairwiseLabels build_pairwise(const std::vector<int>& labels, std::size_t n_s, std::uint64_t seed) {
  if (n_s < 1) throw std::invalid_argument("build_pairwise: n_s must be >= 1");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  PairwiseLabels out;
  std::vector<int> picked_labels;
  for (auto& [label, members] : by_class) {
    if (members.size() < n_s) {
      throw std::invalid_argument("build_pairwise: class " + std::to_string(label) + " has " +
                                  std::to_string(members.size()) + " samples, need " +
                                  std::to_string(n_s));
    }
    // Partial Fisher-Yates: the first n_s slots become a uniform sample.
    for (std::size_t i = 0; i < n_s; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
      std::swap(members[i], members[pick(rng)]);
    }
    std::sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_s));
    for (std::size_t i = 0; i < n_s; ++i) {
      out.sample_indices.push_back(members[i]);
      picked_labels.push_back(label);
    }
  }
  out.s = pairwise_matrix(picked_labels);
  return out;
}

double pairwise_fit_term(const Matrix& h, const Matrix& s) {
  const double m = static_cast<double>(h.cols());
  const double bits = static_cast<double>(h.rows());
  const Matrix v = (h.transpose() * h) / bits - s;
  return v.squaredNorm() / (2.0 * m);
}

Matrix sup_code_activations(const NetworkParams& params, const Matrix& x) {
  check_sup_shapes(params, x, "sup_code_activations");
  ForwardTrace trace = forward(params, x, params.num_layers());
  return std::move(trace.h.back());
}

LossAndGradient sup_loss_and_grad(const NetworkParams& params, const Matrix& x, const Matrix& b,
                                  const Matrix& s, const HashPenalties& pen) {
  check_sup_shapes(params, x, "sup_loss");
  const std::size_t n = params.num_layers();
  const std::size_t code = n - 1;
  const Eigen::Index bits = params.layer_sizes[code];
  detail::check_codes(b, bits, x.cols(), "sup_loss");
  if (s.rows() != x.cols() || s.cols() != x.cols()) {
    throw ShapeError("sup_loss: pairwise matrix must be m x m");
  }

  const double m = static_cast<double>(x.cols());
  const double l = static_cast<double>(bits);
  const ForwardTrace trace = forward(params, x, n);
  const Matrix& h = trace.h[code];

  Matrix v = (h.transpose() * h) / l - s;
  LossAndGradient out;
  out.loss = v.squaredNorm() / (2.0 * m) + detail::weight_decay_loss(params, pen.lambda1) +
             detail::code_penalty_loss(h, b, pen);
  if (!std::isfinite(out.loss)) throw NumericsError("sup_loss: non-finite loss");

  // V + V^T, as written, rather than 2V.
  v += Matrix(v.transpose());
  Matrix grad_h = (h * v) / (m * l) + detail::code_penalty_grad(h, b, pen);

  GradientSet& g = out.gradient;
  g.d_weights.resize(n - 1);
  g.d_biases.resize(n - 1);
  Matrix delta = grad_h.cwiseProduct(
      activation_derivative(params.activations[code - 1], trace.z[code], h));
  detail::backprop_encoder(params, trace, std::move(delta), code, pen.lambda1, g);
  return out;
}

double sup_loss(const NetworkParams& params, const Matrix& x, const Matrix& b, const Matrix& s,
                const HashPenalties& pen) {
  return sup_loss_and_grad(params, x, b, s, pen).loss;
}

GradientSet sup_grad(const NetworkParams& params, const Matrix& x, const Matrix& b,
                     const Matrix& s, const HashPenalties& pen) {
  return sup_loss_and_grad(params, x, b, s, pen).gradient;
}

Matrix sup_b_step(const Matrix& h_code) { return sgn(h_code); }

}  // namespace dhash
