#pragma once

// Independent reference implementations used to check the library. Nothing
// here calls into the objective or network code under test; the loss oracles
// run their own per-sample forward pass with scalar loops.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

#include "dhash/lbfgs.hpp"
#include "dhash/network.hpp"
#include "dhash/objective.hpp"

namespace dhash::testing {

// Network parameters held in an arbitrary floating type, so the loss oracles
// can run in extended precision.
template <class T>
struct ParamsT {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  std::vector<Mat> weights;
  std::vector<Vec> biases;
  std::vector<Activation> activations;
};

template <class T>
ParamsT<T> convert_params(const NetworkParams& p) {
  ParamsT<T> q;
  for (const Matrix& w : p.weights) q.weights.push_back(w.cast<T>());
  for (const Vector& c : p.biases) q.biases.push_back(c.cast<T>());
  q.activations = p.activations;
  return q;
}

// Same layout as flatten(): W then c, layer by layer, column-major.
template <class T>
std::vector<T> flatten_params(const ParamsT<T>& p) {
  std::vector<T> v;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    v.insert(v.end(), p.weights[l].data(), p.weights[l].data() + p.weights[l].size());
    v.insert(v.end(), p.biases[l].data(), p.biases[l].data() + p.biases[l].size());
  }
  return v;
}

template <class T>
ParamsT<T> unflatten_params(const std::vector<T>& v, ParamsT<T> shape) {
  std::size_t at = 0;
  for (std::size_t l = 0; l < shape.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < shape.weights[l].size(); ++i) shape.weights[l].data()[i] = v[at++];
    for (Eigen::Index i = 0; i < shape.biases[l].size(); ++i) shape.biases[l].data()[i] = v[at++];
  }
  return shape;
}

template <class T>
T sigmoid(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

// Activations of every layer for one input column, computed with scalar loops.
template <class T>
std::vector<std::vector<T>> naive_forward_column(const ParamsT<T>& p, const Matrix& x,
                                                 Eigen::Index col, std::size_t upto) {
  std::vector<std::vector<T>> acts;
  std::vector<T> h(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) h[static_cast<std::size_t>(i)] = x(i, col);
  acts.push_back(h);
  for (std::size_t l = 1; l < upto; ++l) {
    const auto& w = p.weights[l - 1];
    std::vector<T> next(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      T z = p.biases[l - 1](r);
      for (Eigen::Index c = 0; c < w.cols(); ++c) z += w(r, c) * acts.back()[static_cast<std::size_t>(c)];
      next[static_cast<std::size_t>(r)] =
          p.activations[l - 1] == Activation::sigmoid ? sigmoid(z) : z;
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

inline std::vector<std::vector<double>> naive_forward_column(const NetworkParams& p,
                                                             const Matrix& x, Eigen::Index col,
                                                             std::size_t upto) {
  return naive_forward_column(convert_params<double>(p), x, col, upto);
}

// Code-layer activations as an L x m matrix via per-column scalar forward.
template <class T>
typename ParamsT<T>::Mat naive_code_matrix(const ParamsT<T>& p, const Matrix& x,
                                           std::size_t code_layers) {
  const Eigen::Index bits = code_layers == 1 ? x.rows() : p.weights[code_layers - 2].rows();
  typename ParamsT<T>::Mat h(bits, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto acts = naive_forward_column(p, x, j, code_layers);
    for (Eigen::Index i = 0; i < bits; ++i) h(i, j) = acts.back()[static_cast<std::size_t>(i)];
  }
  return h;
}

inline Matrix naive_code_matrix(const NetworkParams& p, const Matrix& x, std::size_t code_layers) {
  return naive_code_matrix(convert_params<double>(p), x, code_layers);
}

template <class T>
T naive_penalties(const ParamsT<T>& p, const typename ParamsT<T>::Mat& h, const Matrix& b,
                  const HashPenalties& pen) {
  const Eigen::Index L = h.rows();
  const Eigen::Index m = h.cols();
  const T md = static_cast<T>(m);
  T decay = 0;
  for (const auto& w : p.weights) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) decay += w(i, j) * w(i, j);
    }
  }
  T disc = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < L; ++i) disc += (h(i, j) - b(i, j)) * (h(i, j) - b(i, j));
  }
  T indep = 0;
  for (Eigen::Index a = 0; a < L; ++a) {
    for (Eigen::Index c = 0; c < L; ++c) {
      T g = 0;
      for (Eigen::Index j = 0; j < m; ++j) g += h(a, j) * h(c, j);
      g = g / md - (a == c ? T(1) : T(0));
      indep += g * g;
    }
  }
  T bal = 0;
  for (Eigen::Index a = 0; a < L; ++a) {
    T s = 0;
    for (Eigen::Index j = 0; j < m; ++j) s += h(a, j);
    bal += s * s;
  }
  return T(pen.lambda1) / 2 * decay + T(pen.lambda2) / (2 * md) * disc +
         T(pen.lambda3) / 2 * indep + T(pen.lambda4) / (2 * md) * bal;
}

inline double naive_penalties(const NetworkParams& p, const Matrix& h, const Matrix& b,
                              const HashPenalties& pen) {
  return naive_penalties(convert_params<double>(p), h, b, pen);
}

template <class T>
T naive_reconstruction(const ParamsT<T>& p, const Matrix& x, const Matrix& b) {
  const auto& w = p.weights.back();
  const auto& c = p.biases.back();
  T sum = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      T r = x(i, j) - c(i);
      for (Eigen::Index k = 0; k < b.rows(); ++k) r -= w(i, k) * b(k, j);
      sum += r * r;
    }
  }
  return sum;
}

inline double naive_reconstruction(const NetworkParams& p, const Matrix& x, const Matrix& b) {
  return naive_reconstruction(convert_params<double>(p), x, b);
}

template <class T>
T naive_unsup_loss(const ParamsT<T>& p, const Matrix& x, const Matrix& b,
                   const HashPenalties& pen) {
  const auto h = naive_code_matrix(p, x, p.weights.size());
  return naive_reconstruction(p, x, b) / (2 * static_cast<T>(x.cols())) +
         naive_penalties(p, h, b, pen);
}

inline double naive_unsup_loss(const NetworkParams& p, const Matrix& x, const Matrix& b,
                               const HashPenalties& pen) {
  return naive_unsup_loss(convert_params<double>(p), x, b, pen);
}

template <class T>
T naive_sup_loss(const ParamsT<T>& p, const Matrix& x, const Matrix& b, const Matrix& s,
                 const HashPenalties& pen) {
  const auto h = naive_code_matrix(p, x, p.weights.size() + 1);
  const Eigen::Index L = h.rows();
  const Eigen::Index m = h.cols();
  T fit = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      T ip = 0;
      for (Eigen::Index k = 0; k < L; ++k) ip += h(k, i) * h(k, j);
      const T v = ip / static_cast<T>(L) - s(i, j);
      fit += v * v;
    }
  }
  return fit / (2 * static_cast<T>(m)) + naive_penalties(p, h, b, pen);
}

inline double naive_sup_loss(const NetworkParams& p, const Matrix& x, const Matrix& b,
                             const Matrix& s, const HashPenalties& pen) {
  return naive_sup_loss(convert_params<double>(p), x, b, s, pen);
}

// |X - W B - c 1^T|^2 + lambda2 |H - B|^2 with scalar loops.
inline double naive_dcc_objective(const Matrix& w, const Vector& c, const Matrix& x,
                                  const Matrix& h, const Matrix& b, double lambda2) {
  double recon = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double r = x(i, j) - c(i);
      for (Eigen::Index k = 0; k < b.rows(); ++k) r -= w(i, k) * b(k, j);
      recon += r * r;
    }
  }
  double disc = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    disc += (h.data()[i] - b.data()[i]) * (h.data()[i] - b.data()[i]);
  }
  return recon + lambda2 * disc;
}

// Sets row k of b to the bit pattern `mask` (bit j -> column j, 1 means +1).
inline void assign_row(Matrix& b, Eigen::Index k, unsigned long mask) {
  for (Eigen::Index j = 0; j < b.cols(); ++j) b(k, j) = (mask >> j) & 1UL ? 1.0 : -1.0;
}

// Central differences of f at x with step h.
inline Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                         const Vector& x, double h) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = xp(i);
    xp(i) = orig + h;
    const double fp = f(xp);
    xp(i) = orig - h;
    const double fm = f(xp);
    xp(i) = orig;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Entrywise relative error |a - n| / max(|a|, |n|, floor), maximized.
inline double max_relative_error(const Vector& analytic, const Vector& numeric, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic(i)), std::abs(numeric(i)), floor});
    worst = std::max(worst, std::abs(analytic(i) - numeric(i)) / denom);
  }
  return worst;
}

// Hamming distance between sign columns, by elementwise comparison.
inline std::size_t naive_hamming(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  std::size_t d = 0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) d += a(k, i) != b(k, j) ? 1 : 0;
  return d;
}

// Fully materialized ranking of database columns for one query column:
// stable sort by distance, so ties keep index order.
inline std::vector<std::size_t> naive_ranking(const Matrix& db, const Matrix& q, Eigen::Index col) {
  std::vector<std::size_t> order(static_cast<std::size_t>(db.cols()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> dist(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) dist[i] = naive_hamming(db, static_cast<Eigen::Index>(i), q, col);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  return order;
}

inline double naive_map(const Matrix& db, const Matrix& q,
                        const std::vector<std::vector<std::size_t>>& gt) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const auto& rel = gt[static_cast<std::size_t>(j)];
    if (rel.empty()) continue;
    const std::set<std::size_t> relevant(rel.begin(), rel.end());
    const auto order = naive_ranking(db, q, j);
    double hits = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (relevant.count(order[k])) {
        hits += 1.0;
        sum += hits / static_cast<double>(k + 1);
      }
    }
    total += sum / static_cast<double>(rel.size());
  }
  return q.cols() ? total / static_cast<double>(q.cols()) : 0.0;
}

inline double naive_precision_at_radius(const Matrix& db, const Matrix& q,
                                        const std::vector<std::vector<std::size_t>>& gt,
                                        std::size_t radius) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const auto& rel = gt[static_cast<std::size_t>(j)];
    std::size_t within = 0;
    std::size_t good = 0;
    for (Eigen::Index i = 0; i < db.cols(); ++i) {
      if (naive_hamming(db, i, q, j) > radius) continue;
      ++within;
      if (std::find(rel.begin(), rel.end(), static_cast<std::size_t>(i)) != rel.end()) ++good;
    }
    if (within) total += static_cast<double>(good) / static_cast<double>(within);
  }
  return q.cols() ? total / static_cast<double>(q.cols()) : 0.0;
}

// Relative floor for gradient comparisons; entries smaller than this are
// compared in absolute terms.
inline constexpr double kGradientFloor = 1e-6;

using ExtParams = ParamsT<long double>;

// Central differences of an extended-precision loss over the flattened
// parameters. In double the difference quotient carries about eps*|f|/h of
// rounding, which swamps gradient entries near 1e-6 at h = 1e-5.
inline Vector extended_difference_gradient(const std::function<long double(const ExtParams&)>& loss,
                                           const NetworkParams& at, double step) {
  const ExtParams shape = convert_params<long double>(at);
  std::vector<long double> v = flatten_params(shape);
  Vector g(static_cast<Eigen::Index>(v.size()));
  const long double h = step;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const long double orig = v[i];
    v[i] = orig + h;
    const long double fp = loss(unflatten_params(v, shape));
    v[i] = orig - h;
    const long double fm = loss(unflatten_params(v, shape));
    v[i] = orig;
    g(static_cast<Eigen::Index>(i)) = static_cast<double>((fp - fm) / (2 * h));
  }
  return g;
}

// Worst relative error between an analytic gradient and central differences
// of `loss` taken over the flattened parameters of `at`.
inline double gradient_error(const std::function<long double(const ExtParams&)>& loss,
                             const GradientSet& analytic, const NetworkParams& at,
                             double step = 1e-5) {
  return max_relative_error(flatten(analytic), extended_difference_gradient(loss, at, step),
                            kGradientFloor);
}

}  // namespace dhash::testing
