#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <string>

#include "mfg/grid.hpp"
#include "mfg/hamiltonian.hpp"

namespace mfg {

struct HjbStepConfig {
  double newton_tol = 1e-11;  // sup-norm of the step residual
  int max_newton = 50;
  double armijo_c = 1e-4;
  double min_step = 1.0 / (1 << 20);
};

struct LinearSolveContract {
  std::string method = "sparse_lu";
  double residual_tol = 1e-12;  // relative: |Ax - b|_inf <= tol |b|_inf
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// (u_next - u_cur)/dt - nu Delta_h u_next + g(x, [D_h u_next]) - phi at every node.
GridField hjb_residual(const PowerHamiltonian& H, double nu, double dt, const GridField& u_next,
                       const GridField& u_cur, const GridField& phi);

/// v -> -nu Delta_h v + g_q(x, [D_h u]) . [D_h v], the linearisation of u -> -nu Delta_h u + g.
GridField linearized_apply(const PowerHamiltonian& H, double nu, const GridField& u,
                           const GridField& v);

/// Matrix of v -> shift v + linearized_apply(H, nu, u, v). An M-matrix for shift >= 0.
SparseMatrix linearized_matrix(const PowerHamiltonian& H, double nu, const GridField& u,
                               double shift);

struct HjbStep {
  GridField u;
  int iterations = 0;
  double residual = 0.0;
};

/// Damped Newton for one semi-implicit Bellman step, started from u_cur.
/// Throws NonConvergence after cfg.max_newton iterations.
HjbStep hjb_step_solve(const PowerHamiltonian& H, double nu, double dt, const GridField& u_cur,
                       const GridField& phi, const HjbStepConfig& cfg = {});

/// Fixed-point fallback u <- u - omega R(u) with omega below 1 / max diagonal of the
/// Jacobian, which makes the map a sup-norm contraction. Slow but robust near kinks.
HjbStep hjb_step_picard(const PowerHamiltonian& H, double nu, double dt, const GridField& u_cur,
                        const GridField& phi, double tol, int max_iter);

/// Discrete transport operator: at each node, (1/h) times the two bracketed flux
/// differences built from m and g_q at the node and its four neighbours.
GridField transport_apply(const PowerHamiltonian& H, const GridField& u, const GridField& m);

/// (m_next - m_cur)/dt + nu Delta_h m_cur + T(u_next, m_cur).
GridField fp_residual(const PowerHamiltonian& H, double nu, double dt, const GridField& u_next,
                      const GridField& m_next, const GridField& m_cur);

struct FpStep {
  GridField m;
  double clamp_magnitude = 0.0;  // largest |negative entry| zeroed by the clamp
  double solve_residual = 0.0;   // relative linear residual before the clamp
};

/// Implicit-in-m Fokker-Planck step: solves ((1/dt) I + L_u^T) m_cur = m_next / dt with
/// u = u_next. Entries in [-1e-12, 0) are zeroed and the mass restored; anything more
/// negative throws.
FpStep fp_step_solve(const PowerHamiltonian& H, double nu, double dt, const GridField& u_next,
                     const GridField& m_next, const LinearSolveContract& lin = {});

/// Solves A x = b to the contract, with iterative refinement; throws LinearSolveError.
Eigen::VectorXd solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b,
                             const LinearSolveContract& lin);

struct AdjointCheck {
  double max_discrepancy = 0.0;  // max |(L_u v, m)_2 - (v, A_u m)_2|
  double max_relative = 0.0;     // same, divided by the size of the summed terms
};

/// Compares (L_u v, m)_2 with (v, A_u m)_2, A_u m = -nu Delta_h m - T(u, m), over random probes.
AdjointCheck adjoint_check(const PowerHamiltonian& H, double nu, const GridField& u, int probes,
                           std::uint64_t seed);

Eigen::VectorXd to_vector(const GridField& f);
GridField from_vector(const TorusGrid& g, const Eigen::VectorXd& v);

}  // namespace mfg
