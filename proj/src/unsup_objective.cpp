#include "dhash/unsup_objective.hpp"

#include <cmath>

namespace dhash {
namespace {

void check_unsup_shapes(const NetworkParams& params, const Matrix& x, const char* who) {
  params.validate();
  const std::size_t n = params.num_layers();
  if (n < 3) throw ShapeError(std::string(who) + ": unsupervised network needs >= 3 layers");
  if (params.layer_sizes.back() != params.layer_sizes.front()) {
    throw ShapeError(std::string(who) + ": decoder output size must equal input size");
  }
  if (x.rows() != params.layer_sizes.front()) {
    throw ShapeError(std::string(who) + ": data dimension does not match network input");
  }
  if (x.cols() < 1) throw ShapeError(std::string(who) + ": need at least one sample");
}

}  // namespace

Matrix unsup_code_activations(const NetworkParams& params, const Matrix& x) {
  check_unsup_shapes(params, x, "unsup_code_activations");
  ForwardTrace trace = forward(params, x, params.num_layers() - 1);
  return std::move(trace.h.back());
}

LossAndGradient unsup_loss_and_grad(const NetworkParams& params, const Matrix& x,
                                    const Matrix& b, const HashPenalties& pen) {
  check_unsup_shapes(params, x, "unsup_loss");
  const std::size_t n = params.num_layers();
  const std::size_t code = n - 2;  // zero-based index of layer n-1
  detail::check_codes(b, params.layer_sizes[code], x.cols(), "unsup_loss");

  const double m = static_cast<double>(x.cols());
  const ForwardTrace trace = forward(params, x, n - 1);
  const Matrix& h = trace.h[code];
  const Matrix& w_dec = params.weights[code];
  const Vector& c_dec = params.biases[code];

  Matrix resid = x - w_dec * b;
  resid.colwise() -= c_dec;

  LossAndGradient out;
  out.loss = resid.squaredNorm() / (2.0 * m) + detail::weight_decay_loss(params, pen.lambda1) +
             detail::code_penalty_loss(h, b, pen);
  if (!std::isfinite(out.loss)) throw NumericsError("unsup_loss: non-finite loss");

  GradientSet& g = out.gradient;
  g.d_weights.resize(n - 1);
  g.d_biases.resize(n - 1);
  g.d_weights[code] = (-1.0 / m) * (resid * b.transpose()) + pen.lambda1 * w_dec;
  g.d_biases[code] = (-1.0 / m) * resid.rowwise().sum();

  Matrix delta = detail::code_penalty_grad(h, b, pen)
                     .cwiseProduct(activation_derivative(params.activations[code - 1],
                                                         trace.z[code], h));
  detail::backprop_encoder(params, trace, std::move(delta), code, pen.lambda1, g);
  return out;
}

double unsup_loss(const NetworkParams& params, const Matrix& x, const Matrix& b,
                  const HashPenalties& pen) {
  return unsup_loss_and_grad(params, x, b, pen).loss;
}

GradientSet unsup_grad(const NetworkParams& params, const Matrix& x, const Matrix& b,
                       const HashPenalties& pen) {
  return unsup_loss_and_grad(params, x, b, pen).gradient;
}

double dcc_objective(const NetworkParams& params, const Matrix& x, const Matrix& h_code,
                     const Matrix& b, double lambda2) {
  const std::size_t code = params.num_layers() - 2;
  Matrix resid = x - params.weights[code] * b;
  resid.colwise() -= params.biases[code];
  return resid.squaredNorm() + lambda2 * (h_code - b).squaredNorm();
}

DccResult dcc_b_step(const NetworkParams& params, const Matrix& x, const Matrix& h_code,
                     const Matrix& b_init, double lambda2, const DccOptions& opts) {
  check_unsup_shapes(params, x, "dcc_b_step");
  const std::size_t code = params.num_layers() - 2;
  const Eigen::Index bits = params.layer_sizes[code];
  detail::check_codes(b_init, bits, x.cols(), "dcc_b_step");
  if (h_code.rows() != bits || h_code.cols() != x.cols()) {
    throw ShapeError("dcc_b_step: code activations have the wrong shape");
  }

  const Matrix& w = params.weights[code];
  Matrix v = x;
  v.colwise() -= params.biases[code];
  const Matrix q = w.transpose() * v + lambda2 * h_code;
  const Matrix gram = w.transpose() * w;

  DccResult out;
  out.b = b_init;
  if (opts.record_trace) out.objective_trace.push_back(dcc_objective(params, x, h_code, out.b, lambda2));

  Eigen::RowVectorXd row(x.cols());
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    ++out.sweeps;
    bool changed = false;
    for (Eigen::Index k = 0; k < bits; ++k) {
      // q_k^T - w_k^T W_1 B_1, with the k-th term of G_k B removed.
      row = q.row(k) - gram.row(k) * out.b + gram(k, k) * out.b.row(k);
      for (Eigen::Index j = 0; j < row.size(); ++j) {
        const double s = row(j) >= 0.0 ? 1.0 : -1.0;
        if (s != out.b(k, j)) {
          out.b(k, j) = s;
          ++out.flips;
          changed = true;
        }
      }
      if (opts.record_trace) {
        out.objective_trace.push_back(dcc_objective(params, x, h_code, out.b, lambda2));
      }
    }
    if (!changed) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace dhash
