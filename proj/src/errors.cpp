#include "mfg/errors.hpp"

namespace mfg {

NonConvergence::NonConvergence(int iters, double res)
    : SolverError("Newton did not converge after " + std::to_string(iters) +
                  " iterations (residual " + std::to_string(res) + ")"),
      iterations(iters), final_residual(res) {}

OuterNonConvergence::OuterNonConvergence(int iters, double change)
    : SolverError("outer fixed point did not converge after " + std::to_string(iters) +
                  " iterations (last change " + std::to_string(change) + ")"),
      iterations(iters), last_change(change) {}

InversePowerStall::InversePowerStall(int iters)
    : SolverError("inverse power iteration stalled after " + std::to_string(iters) +
                  " iterations"),
      iterations(iters) {}

LinearSolveError::LinearSolveError(const std::string& what, double res)
    : SolverError(what), residual(res) {}

}  // namespace mfg
