#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dhash/codes.hpp"
#include "dhash/init.hpp"
#include "dhash/lbfgs.hpp"
#include "dhash/objective.hpp"

namespace dhash {

struct TrainConfig {
  Mode mode = Mode::unsupervised;
  // All layer sizes including the input; for unsupervised training the last
  // two entries are L and D, for supervised training the last entry is L.
  std::vector<Eigen::Index> layer_sizes;
  std::vector<Activation> activations;  // one per non-input layer
  HashPenalties penalties;
  int max_iter = 10;
  LbfgsConfig lbfgs_initial;      // fit with B_(0) fixed
  LbfgsConfig lbfgs_subsequent;   // each warm-started alternation
  int dcc_max_sweeps = 10;
  int itq_iterations = 50;
  std::size_t n_s = 0;  // supervised: samples per class
  std::uint64_t seed = 42;
  bool center_inputs = false;
  // Inputs are multiplied by this factor before training; the factor (and
  // the centering mean) is folded into the returned network, which therefore
  // consumes unscaled inputs.
  double input_scale = 1.0;

  Eigen::Index bits() const;
  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // Defaults for the given mode, input dimension and code length: 5-layer
  // network with sigmoid hidden layers and linear code/decoder layers, hidden
  // sizes from the tuned table for 8/16/32/64 bits.
  static TrainConfig defaults(Mode mode, Eigen::Index input_dim, Eigen::Index bits);
};

// Hidden-layer sizes s_2..s_{n-1} (the last equals bits) used by defaults().
std::vector<Eigen::Index> default_hidden_layers(Eigen::Index bits);

enum class TrainStatus { converged, budget_exhausted };

std::string_view to_string(TrainStatus s);

struct IterationLog {
  int iteration = 0;
  double loss_after_b_step = 0.0;   // J((W,c)_(t-1), B_(t))
  double loss_after_wc_step = 0.0;  // J((W,c)_(t), B_(t))
  double lbfgs_first_loss = 0.0;    // first evaluation inside the warm-started L-BFGS
  std::size_t bits_flipped = 0;
  int dcc_sweeps = 0;
  int lbfgs_iterations = 0;
  LbfgsStatus lbfgs_status = LbfgsStatus::max_iters;
};

struct TrainResult {
  NetworkParams params;
  Matrix b;             // optimization variable B at the end of training
  BinaryCodes codes;    // encode(params, x) for every input column
  std::vector<double> loss_trace;  // J after init fit, then after each outer iteration
  std::vector<double> init_lbfgs_history;
  std::vector<IterationLog> iterations;
  std::vector<std::size_t> sample_indices;  // supervised: rows used for training
  std::vector<std::string> warnings;
  TrainStatus status = TrainStatus::budget_exhausted;
};

// Deterministic sub-seed derived from the run seed and a stream name.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

TrainResult train_unsupervised(const Matrix& x, const TrainConfig& cfg);

TrainResult train_supervised(const Matrix& x, const std::vector<int>& labels,
                             const TrainConfig& cfg);

// Forward to the code layer (n-1 for unsupervised, n for supervised) and take
// signs. Accepts any number of columns, including zero.
BinaryCodes encode(const NetworkParams& params, const Matrix& x, Mode mode);

}  // namespace dhash
