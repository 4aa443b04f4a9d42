#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

/// Inconsistent grids, meshes, or argument ranges.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Newton on one Bellman step did not reach its tolerance.
class NonConvergence : public SolverError {
public:
  NonConvergence(int iterations, double final_residual);
  int iterations;
  double final_residual;
};

/// Outer damped fixed point (evolutive or ergodic) did not settle.
class OuterNonConvergence : public SolverError {
public:
  OuterNonConvergence(int iterations, double last_change);
  int iterations;
  double last_change;
};

class InversePowerStall : public SolverError {
public:
  explicit InversePowerStall(int iterations);
  int iterations;
};

class LinearSolveError : public SolverError {
public:
  LinearSolveError(const std::string& what, double residual);
  double residual;
};

}  // namespace mfg
