#pragma once

#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dhash/network.hpp"
#include "dhash/objective.hpp"

namespace dhash {

struct LbfgsConfig {
  int memory = 10;
  int max_iters = 50;
  double grad_tol = 1e-8;
  double c1 = 1e-4;          // sufficient decrease
  double c2 = 0.9;           // curvature constant
  bool curvature_check = false;  // gate history updates on the curvature condition
  int max_backtracks = 30;
  double backtrack_factor = 0.5;

  void validate() const;
};

enum class LbfgsStatus { converged, max_iters, line_search_failed };

std::string_view to_string(LbfgsStatus s);

struct LbfgsResult {
  Vector x;
  // Loss at x0, then after every accepted step.
  std::vector<double> history;
  LbfgsStatus status = LbfgsStatus::max_iters;
  int iterations = 0;
  int evaluations = 0;
  int stored_pairs = 0;
};

// Returns (loss, gradient) at x.
using Objective = std::function<std::pair<double, Vector>(const Vector&)>;

// Two-loop recursion: returns -H g for the inverse Hessian approximation built
// from (s, y) pairs (oldest first) with initial scaling gamma * I.
Vector two_loop_direction(const Vector& grad, const std::deque<std::pair<Vector, Vector>>& pairs,
                          double gamma);

// Limited-memory BFGS with backtracking Armijo line search. Throws
// NumericsError if the objective is non-finite at x0. A non-finite trial point
// counts as a failed Armijo test.
LbfgsResult minimize(const Objective& f, const Vector& x0, const LbfgsConfig& cfg);

// Flattening of network parameters: for each layer, W column-major then c.
Vector flatten(const NetworkParams& params);
Vector flatten(const GradientSet& grad);
// Writes `flat` back into a copy of `like` (shapes taken from `like`).
NetworkParams unflatten(const Vector& flat, const NetworkParams& like);
Eigen::Index flat_size(const NetworkParams& params);

}  // namespace dhash
