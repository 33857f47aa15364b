#include "dhash/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dhash/sup_objective.hpp"
#include "dhash/unsup_objective.hpp"

namespace dhash {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Divergence guard: relative growth between outer iterations that aborts.
constexpr double kDivergenceRatio = 1.10;

using LossFn = std::function<LossAndGradient(const NetworkParams&)>;

// Wraps a parameterized loss as an L-BFGS objective. Forward-pass blow-ups
// surface as +inf so the line search backtracks instead of aborting.
Objective make_objective(const NetworkParams& shape, LossFn loss) {
  return [shape, loss = std::move(loss)](const Vector& v) -> std::pair<double, Vector> {
    const NetworkParams p = unflatten(v, shape);
    try {
      LossAndGradient lg = loss(p);
      return {lg.loss, flatten(lg.gradient)};
    } catch (const NumericsError&) {
      return {std::numeric_limits<double>::infinity(), Vector::Zero(v.size())};
    }
  };
}

Matrix select_columns(const Matrix& x, const std::vector<std::size_t>& idx) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(idx[j]));
  }
  return out;
}

// Training saw x' = scale * x - mean. Rewrites the first layer (and the
// decoder for the unsupervised model) so the network consumes raw x.
void fold_input_transform(NetworkParams& params, double scale, const Vector& mean, Mode mode) {
  params.biases.front() -= params.weights.front() * mean;
  params.weights.front() *= scale;
  if (mode == Mode::unsupervised) {
    params.biases.back() = (params.biases.back() + mean) / scale;
    params.weights.back() /= scale;
  }
}

bool has_input_transform(const TrainConfig& cfg) {
  return cfg.center_inputs || cfg.input_scale != 1.0;
}

struct Alternation {
  const TrainConfig& cfg;
  const Matrix& x;  // training inputs (possibly centered)
  Matrix& b;
  LossFn loss;
  std::function<Matrix(const NetworkParams&, const Matrix& b_prev, IterationLog&)> b_step;

  TrainResult run(NetworkParams params) {
    TrainResult res;
    const Objective objective = make_objective(params, loss);

    LbfgsResult fit = minimize(objective, flatten(params), cfg.lbfgs_initial);
    params = unflatten(fit.x, params);
    res.init_lbfgs_history = fit.history;
    res.loss_trace.push_back(fit.history.back());

    for (int t = 1; t <= cfg.max_iter; ++t) {
      IterationLog log;
      log.iteration = t;
      const Matrix b_prev = b;
      b = b_step(params, b_prev, log);
      log.loss_after_b_step = loss(params).loss;

      LbfgsResult step = minimize(objective, flatten(params), cfg.lbfgs_subsequent);
      log.lbfgs_first_loss = step.history.front();
      log.loss_after_wc_step = step.history.back();
      log.lbfgs_iterations = step.iterations;
      log.lbfgs_status = step.status;

      const double prev = res.loss_trace.back();
      const double now = step.history.back();
      if (!std::isfinite(now) || now > kDivergenceRatio * prev) {
        b = b_prev;
        res.warnings.push_back("outer iteration " + std::to_string(t) +
                               ": loss diverged, returning the previous state");
        res.iterations.push_back(log);
        res.status = TrainStatus::budget_exhausted;
        res.params = std::move(params);
        return res;
      }
      params = unflatten(step.x, params);
      res.loss_trace.push_back(now);
      res.iterations.push_back(log);
    }
    res.status = !res.iterations.empty() && res.iterations.back().bits_flipped == 0
                     ? TrainStatus::converged
                     : TrainStatus::budget_exhausted;
    res.params = std::move(params);
    return res;
  }
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return splitmix64(seed ^ h);
}

std::string_view to_string(TrainStatus s) {
  return s == TrainStatus::converged ? "converged" : "budget_exhausted";
}

Eigen::Index TrainConfig::bits() const {
  if (layer_sizes.size() < 2) return 0;
  return mode == Mode::unsupervised ? layer_sizes[layer_sizes.size() - 2] : layer_sizes.back();
}

void TrainConfig::validate() const {
  const std::size_t n = layer_sizes.size();
  if (mode == Mode::unsupervised && n < 3) {
    throw std::invalid_argument("layer_sizes: unsupervised network needs at least 3 layers");
  }
  if (mode == Mode::supervised && n < 2) {
    throw std::invalid_argument("layer_sizes: supervised network needs at least 2 layers");
  }
  for (Eigen::Index s : layer_sizes) {
    if (s < 1) throw std::invalid_argument("layer_sizes: every layer needs at least one unit");
  }
  if (mode == Mode::unsupervised && layer_sizes.back() != layer_sizes.front()) {
    throw std::invalid_argument("layer_sizes: unsupervised output layer must equal input size");
  }
  if (activations.size() != n - 1) {
    throw std::invalid_argument("activations: expected " + std::to_string(n - 1) + " entries");
  }
  if (max_iter < 1) throw std::invalid_argument("max_iter: must be >= 1");
  if (dcc_max_sweeps < 1) throw std::invalid_argument("dcc_max_sweeps: must be >= 1");
  if (itq_iterations < 0) throw std::invalid_argument("itq_iterations: must be >= 0");
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) {
    throw std::invalid_argument("input_scale: must be finite and positive");
  }
  if (mode == Mode::supervised && n_s < 1) throw std::invalid_argument("n_s: must be >= 1");
  try {
    penalties.validate();
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("lambda1..lambda4: must be finite and non-negative");
  }
  try {
    lbfgs_initial.validate();
    lbfgs_subsequent.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("lbfgs: ") + e.what());
  }
}

std::vector<Eigen::Index> default_hidden_layers(Eigen::Index bits) {
  switch (bits) {
    case 8:
      return {90, 20, 8};
    case 16:
      return {90, 30, 16};
    case 32:
      return {120, 50, 32};
    case 64:
      return {160, 110, 64};
    default:
      return {std::max<Eigen::Index>(90, 3 * bits), std::max<Eigen::Index>(30, 2 * bits), bits};
  }
}

TrainConfig TrainConfig::defaults(Mode mode, Eigen::Index input_dim, Eigen::Index bits) {
  TrainConfig cfg;
  cfg.mode = mode;
  std::vector<Eigen::Index> hidden = default_hidden_layers(bits);
  // Eigenvector initialization cannot widen a layer.
  Eigen::Index prev = input_dim;
  for (std::size_t i = 0; i + 1 < hidden.size(); ++i) {
    hidden[i] = std::max(bits, std::min(hidden[i], prev));
    prev = hidden[i];
  }
  cfg.layer_sizes.push_back(input_dim);
  cfg.layer_sizes.insert(cfg.layer_sizes.end(), hidden.begin(), hidden.end());
  for (std::size_t i = 0; i + 1 < hidden.size(); ++i) cfg.activations.push_back(Activation::sigmoid);
  cfg.activations.push_back(Activation::linear);
  if (mode == Mode::unsupervised) {
    cfg.layer_sizes.push_back(input_dim);
    cfg.activations.push_back(Activation::linear);
    cfg.penalties = {1e-5, 5e-2, 1e-2, 1e-6};
    cfg.max_iter = 10;
  } else {
    cfg.penalties = {1e-3, 5.0, 1.0, 1e-4};
    cfg.max_iter = 5;
    cfg.n_s = 2000;
  }
  cfg.lbfgs_initial.max_iters = 50;
  cfg.lbfgs_subsequent.max_iters = 20;
  return cfg;
}

TrainResult train_unsupervised(const Matrix& x, const TrainConfig& cfg) {
  if (cfg.mode != Mode::unsupervised) throw std::invalid_argument("mode: expected unsup");
  cfg.validate();
  if (x.rows() != cfg.layer_sizes.front()) {
    throw std::invalid_argument("layer_sizes: input size " + std::to_string(cfg.layer_sizes.front()) +
                                " does not match data dimension " + std::to_string(x.rows()));
  }
  Matrix xt = cfg.input_scale * x;
  const Vector mean = cfg.center_inputs ? column_mean(xt) : Vector::Zero(x.rows());
  if (cfg.center_inputs) xt.colwise() -= mean;

  ItqResult init = itq(xt, cfg.bits(), {cfg.itq_iterations, derive_seed(cfg.seed, "itq"), false});
  Matrix b = std::move(init.b);
  NetworkParams params = init_network(xt, cfg.layer_sizes, cfg.activations, Mode::unsupervised);

  const HashPenalties pen = cfg.penalties;
  Alternation alt{
      cfg, xt, b,
      [&xt, &b, pen](const NetworkParams& p) { return unsup_loss_and_grad(p, xt, b, pen); },
      [&xt, &cfg](const NetworkParams& p, const Matrix& b_prev, IterationLog& log) {
        const Matrix h = unsup_code_activations(p, xt);
        DccResult r = dcc_b_step(p, xt, h, b_prev, cfg.penalties.lambda2,
                                 {cfg.dcc_max_sweeps, false});
        log.bits_flipped = static_cast<std::size_t>((r.b.array() != b_prev.array()).count());
        log.dcc_sweeps = r.sweeps;
        return std::move(r.b);
      }};
  TrainResult res = alt.run(std::move(params));
  res.warnings.insert(res.warnings.begin(), init.warnings.begin(), init.warnings.end());
  res.b = b;
  if (has_input_transform(cfg)) {
    fold_input_transform(res.params, cfg.input_scale, mean, Mode::unsupervised);
  }
  res.codes = encode(res.params, x, Mode::unsupervised);
  return res;
}

TrainResult train_supervised(const Matrix& x, const std::vector<int>& labels,
                             const TrainConfig& cfg) {
  if (cfg.mode != Mode::supervised) throw std::invalid_argument("mode: expected sup");
  cfg.validate();
  if (x.rows() != cfg.layer_sizes.front()) {
    throw std::invalid_argument("layer_sizes: input size " + std::to_string(cfg.layer_sizes.front()) +
                                " does not match data dimension " + std::to_string(x.rows()));
  }
  if (labels.size() != static_cast<std::size_t>(x.cols())) {
    throw std::invalid_argument("labels: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(x.cols()) + " samples");
  }
  PairwiseLabels pairs = build_pairwise(labels, cfg.n_s, derive_seed(cfg.seed, "subset"));
  Matrix xs = cfg.input_scale * select_columns(x, pairs.sample_indices);
  const Vector mean = cfg.center_inputs ? column_mean(xs) : Vector::Zero(x.rows());
  if (cfg.center_inputs) xs.colwise() -= mean;

  ItqResult init = itq(xs, cfg.bits(), {cfg.itq_iterations, derive_seed(cfg.seed, "itq"), false});
  Matrix b = std::move(init.b);
  NetworkParams params = init_network(xs, cfg.layer_sizes, cfg.activations, Mode::supervised);

  const HashPenalties pen = cfg.penalties;
  const Matrix& s = pairs.s;
  Alternation alt{
      cfg, xs, b,
      [&xs, &b, &s, pen](const NetworkParams& p) { return sup_loss_and_grad(p, xs, b, s, pen); },
      [&xs](const NetworkParams& p, const Matrix& b_prev, IterationLog& log) {
        Matrix next = sup_b_step(sup_code_activations(p, xs));
        log.bits_flipped = static_cast<std::size_t>((next.array() != b_prev.array()).count());
        log.dcc_sweeps = 0;
        return next;
      }};
  TrainResult res = alt.run(std::move(params));
  res.warnings.insert(res.warnings.begin(), init.warnings.begin(), init.warnings.end());
  res.b = b;
  res.sample_indices = pairs.sample_indices;
  if (has_input_transform(cfg)) {
    fold_input_transform(res.params, cfg.input_scale, mean, Mode::supervised);
  }
  res.codes = encode(res.params, x, Mode::supervised);
  return res;
}

BinaryCodes encode(const NetworkParams& params, const Matrix& x, Mode mode) {
  params.validate();
  const std::size_t n = params.num_layers();
  const std::size_t upto = mode == Mode::unsupervised ? n - 1 : n;
  if (mode == Mode::unsupervised && n < 3) {
    throw ShapeError("encode: unsupervised network needs at least 3 layers");
  }
  if (x.rows() != params.layer_sizes.front()) {
    throw ShapeError("encode: data has dimension " + std::to_string(x.rows()) +
                     ", model expects " + std::to_string(params.layer_sizes.front()));
  }
  const auto bits = static_cast<std::size_t>(params.layer_sizes[upto - 1]);
  if (x.cols() == 0) return BinaryCodes(bits, 0);
  const ForwardTrace trace = forward(params, x, upto);
  return BinaryCodes::from_signs(sgn(trace.h.back()));
}

}  // namespace dhash
