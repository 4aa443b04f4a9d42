#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfg/cost.hpp"
#include "mfg/dynamics.hpp"
#include "mfg/grid.hpp"
#include "mfg/hamiltonian.hpp"

namespace mfg {

struct FixedPointConfig {
  double damping = 0.5;    // theta in (0, 1]
  double outer_tol = 1e-9; // on max_n h^2 sum |m_new^n - m^n|
  int max_outer = 500;
  int max_halvings = 6;    // damping halvings per iteration when the change grows
  double residual_tol = 1e-9;  // sup-norm residual of both discrete equations at return
};

struct SolverOptions {
  FixedPointConfig fixed_point;
  HjbStepConfig hjb;
  LinearSolveContract linear;
};

void validate(const FixedPointConfig& cfg);

/// Forward-backward system: Bellman forward from u0, Fokker-Planck backward from mT.
struct EvolutiveProblem {
  double nu;
  PowerHamiltonian hamiltonian;
  CostOperator cost;
  GridField u0;
  DiscreteDensity mT;
  TimeMesh mesh;

  const TorusGrid& grid() const { return u0.grid(); }
  void validate() const;
};

struct AprioriMonitors {
  double lower_bound_u = 0.0;       // min over all slices of u
  double energy_grad_term = 0.0;    // h^2 dt sum_{n>=1} sum |[D_h u^n]|^beta
  double energy_cost_term = 0.0;    // h^2 dt sum_{n<N_T} sum |F(m^n)|^gamma
  double max_l1_u = 0.0;            // max_n h^2 sum |u^n|
  std::vector<double> Un_path;      // U^n = h^2 sum u^n
  double Un_total_variation = 0.0;  // sum |U^{n+1} - U^n|
};

struct EvolutiveSolution {
  SpaceTimeField u;
  SpaceTimeField m;
  int outer_iters = 0;
  std::vector<double> residual_history{};  // outer change metric per iteration
  double last_change = 0.0;
  double hjb_residual = 0.0;  // max_n sup-norm of the Bellman residual at (u, m)
  double fp_residual = 0.0;   // max_n sup-norm of the Fokker-Planck residual at (u, m)
  double max_mass_deviation = 0.0;
  double max_clamp = 0.0;     // largest clamp applied by any Fokker-Planck step
  int picard_fallbacks = 0;
  bool converged = false;
  std::string failure{};
  std::optional<AprioriMonitors> monitors{};
};

/// Runs the damped Picard iteration and always returns the last iterate; `converged`
/// and `failure` describe how it ended. `initial_m` defaults to mT on every slice.
EvolutiveSolution run_evolutive(const EvolutiveProblem& p, const SolverOptions& opt = {},
                                const std::optional<SpaceTimeField>& initial_m = {});

/// As run_evolutive, but throws OuterNonConvergence (or the step error) on failure.
EvolutiveSolution solve_evolutive(const EvolutiveProblem& p, const SolverOptions& opt = {},
                                  const std::optional<SpaceTimeField>& initial_m = {});

/// Stationary system with unknown ergodic constant lambda. Local costs only.
struct ErgodicProblem {
  double nu;
  PowerHamiltonian hamiltonian;
  CostOperator cost;

  const TorusGrid& grid() const { return hamiltonian.grid(); }
  void validate() const;
};

struct ErgodicSolution {
  GridField u;
  GridField m;
  double lambda = 0.0;
  int outer_iters = 0;
  std::vector<double> residual_history{};
  double last_change = 0.0;
  double hjb_residual = 0.0;
  double fp_residual = 0.0;
  double mass_residual = 0.0;  // |h^2 sum m - 1|
  double mean_residual = 0.0;  // |h^2 sum u|
  bool converged = false;
  std::string failure{};
};

/// -nu Delta_h u + g(x, [D_h u]) + lambda = phi with h^2 sum u = 0, by Newton on (u, lambda).
struct ErgodicHjb {
  GridField u;
  double lambda;
  int iterations;
  double residual;
};
ErgodicHjb ergodic_hjb_solve(const PowerHamiltonian& H, double nu, const GridField& phi,
                             const HjbStepConfig& cfg, const GridField& u_start,
                             double lambda_start);

/// Kernel of m -> -nu Delta_h m - T(u, m) normalised in K_h, by shifted inverse power
/// iteration. Throws InversePowerStall.
GridField ergodic_fp_solve(const PowerHamiltonian& H, double nu, const GridField& u, double tol,
                           int max_iter = 50, double shift = 1e-8);

/// Residuals of the three lines of the stationary system.
struct ErgodicResiduals {
  double hjb, fp, mass, mean;
};
ErgodicResiduals ergodic_residuals(const ErgodicProblem& p, const GridField& u, const GridField& m,
                                   double lambda);

ErgodicSolution run_ergodic(const ErgodicProblem& p, const SolverOptions& opt = {});
ErgodicSolution solve_ergodic(const ErgodicProblem& p, const SolverOptions& opt = {});

}  // namespace mfg
