#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfg/config.hpp"
#include "mfg/solver.hpp"

namespace mfg {

struct StudyLevel {
  int n_side = 0;
  int n_steps = 0;
  double h = 0.0;
  double dt = 0.0;
  // Errors against the finest level; NaN on the finest level itself.
  double err_u_sup = 0.0;
  double err_u_w1beta = 0.0;
  double err_m = 0.0;
  // log2(e_this / e_next); NaN where there is no next coarse-fine pair.
  double order_u_sup = 0.0;
  double order_u_w1beta = 0.0;
  double order_m = 0.0;
  bool converged = false;
  int outer_iters = 0;
  double lambda = 0.0;  // ergodic only
  std::optional<AprioriMonitors> monitors;
};

struct StudyReport {
  std::string kind;       // evolutive | ergodic
  double beta = 2.0;
  double m_exponent = 2.0;  // 2 for nonlocal costs, 2 - eta2 for local ones
  double floor = 0.0;       // errors below this count as converged
  std::vector<StudyLevel> levels;
  std::vector<double> lambda_increments;  // |lambda_{k+1} - lambda_k|, ergodic only
  bool all_converged = false;
  bool decreasing = false;
};

/// Solves every level of cfg.study (N_T = nt_ratio * N_h), up to `threads` at a time, and
/// measures errors against the finest level by injection in space and time.
StudyReport convergence_study(const RunConfig& cfg, int threads = 1);

/// True when each sequence decreases strictly, entries below `floor` counting as converged.
bool strictly_decreasing(const std::vector<double>& errors, double floor);

}  // namespace mfg
