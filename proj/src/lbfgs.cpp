#include "dhash/lbfgs.hpp"

#include <cmath>
#include <stdexcept>

namespace dhash {

void LbfgsConfig::validate() const {
  if (memory < 1) throw std::invalid_argument("lbfgs: memory must be >= 1");
  if (max_iters < 0) throw std::invalid_argument("lbfgs: max_iters must be >= 0");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) {
    throw std::invalid_argument("lbfgs: need 0 < c1 < c2 < 1");
  }
  if (max_backtracks < 1) throw std::invalid_argument("lbfgs: max_backtracks must be >= 1");
  if (!(0.0 < backtrack_factor && backtrack_factor < 1.0)) {
    throw std::invalid_argument("lbfgs: backtrack_factor must be in (0, 1)");
  }
}

std::string_view to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::converged:
      return "converged";
    case LbfgsStatus::max_iters:
      return "max_iters";
    case LbfgsStatus::line_search_failed:
      return "line_search_failed";
  }
  return "unknown";
}

Vector two_loop_direction(const Vector& grad, const std::deque<std::pair<Vector, Vector>>& pairs,
                          double gamma) {
  Vector q = grad;
  std::vector<double> alpha(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    const auto& [s, y] = pairs[i];
    const double rho = 1.0 / y.dot(s);
    alpha[i] = rho * s.dot(q);
    q -= alpha[i] * y;
  }
  Vector r = gamma * q;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [s, y] = pairs[i];
    const double rho = 1.0 / y.dot(s);
    const double beta = rho * y.dot(r);
    r += (alpha[i] - beta) * s;
  }
  return -r;
}

LbfgsResult minimize(const Objective& f, const Vector& x0, const LbfgsConfig& cfg) {
  cfg.validate();
  LbfgsResult out;
  out.x = x0;

  auto [fx, g] = f(out.x);
  ++out.evaluations;
  if (!std::isfinite(fx) || !g.allFinite()) {
    throw NumericsError("lbfgs: objective is not finite at the starting point");
  }
  if (g.size() != x0.size()) throw ShapeError("lbfgs: gradient size differs from x");
  out.history.push_back(fx);

  std::deque<std::pair<Vector, Vector>> pairs;
  double gamma = 1.0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double gnorm = g.norm();
    if (gnorm < cfg.grad_tol) {
      out.status = LbfgsStatus::converged;
      return out;
    }

    Vector d = two_loop_direction(g, pairs, gamma);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      pairs.clear();
      d = -g;
      slope = -gnorm * gnorm;
    }
    // First step (no curvature information yet) is scaled to unit length.
    double step = pairs.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;

    bool accepted = false;
    Vector x_new;
    double f_new = 0.0;
    Vector g_new;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      x_new = out.x + step * d;
      auto [ft, gt] = f(x_new);
      ++out.evaluations;
      if (std::isfinite(ft) && gt.allFinite() && ft <= fx + cfg.c1 * step * slope) {
        f_new = ft;
        g_new = std::move(gt);
        accepted = true;
        break;
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) {
      out.status = LbfgsStatus::line_search_failed;
      return out;
    }

    Vector s = x_new - out.x;
    Vector y = g_new - g;
    const double sy = s.dot(y);
    // Store the pair only on positive curvature; with curvature_check also
    // require y^T d >= (c2 - 1) g^T d along the accepted step.
    const bool curvature_ok = !cfg.curvature_check || y.dot(d) >= (cfg.c2 - 1.0) * slope;
    if (sy > 1e-12 * s.norm() * y.norm() && curvature_ok) {
      gamma = sy / y.squaredNorm();
      pairs.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(pairs.size()) > cfg.memory) pairs.pop_front();
      ++out.stored_pairs;
    }

    out.x = std::move(x_new);
    g = std::move(g_new);
    fx = f_new;
    out.history.push_back(fx);
    ++out.iterations;
  }
  out.status = g.norm() < cfg.grad_tol ? LbfgsStatus::converged : LbfgsStatus::max_iters;
  return out;
}

Eigen::Index flat_size(const NetworkParams& params) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    n += params.weights[l].size() + params.biases[l].size();
  }
  return n;
}

namespace {

template <typename Mats, typename Vecs>
Vector flatten_blocks(const Mats& ws, const Vecs& cs) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < ws.size(); ++l) n += ws[l].size() + cs[l].size();
  Vector out(n);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < ws.size(); ++l) {
    out.segment(at, ws[l].size()) = ws[l].reshaped();
    at += ws[l].size();
    out.segment(at, cs[l].size()) = cs[l];
    at += cs[l].size();
  }
  return out;
}

}  // namespace

Vector flatten(const NetworkParams& params) { return flatten_blocks(params.weights, params.biases); }

Vector flatten(const GradientSet& grad) { return flatten_blocks(grad.d_weights, grad.d_biases); }

NetworkParams unflatten(const Vector& flat, const NetworkParams& like) {
  if (flat.size() != flat_size(like)) {
    throw ShapeError("unflatten: vector length " + std::to_string(flat.size()) +
                     " does not match parameter count " + std::to_string(flat_size(like)));
  }
  NetworkParams out = like;
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    Matrix& w = out.weights[l];
    w = flat.segment(at, w.size()).reshaped(w.rows(), w.cols());
    at += w.size();
    out.biases[l] = flat.segment(at, out.biases[l].size());
    at += out.biases[l].size();
  }
  return out;
}

}  // namespace dhash
