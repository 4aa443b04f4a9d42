#pragma once

#include <cstdint>

#include "mfg/cost.hpp"
#include "mfg/grid.hpp"
#include "mfg/hamiltonian.hpp"
#include "mfg/random.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// Residuals of a perturbed pair: slices 0..N_T-1 hold a^n and b^n, slice N_T is zero.
struct PerturbationPair {
  SpaceTimeField a;
  SpaceTimeField b;
};

/// a^n = Bellman residual of (ut, mt) at step n, b^n = Fokker-Planck residual at step n.
PerturbationPair perturbation_residuals(const PowerHamiltonian& H, double nu,
                                        const CostOperator& cost, const SpaceTimeField& ut,
                                        const SpaceTimeField& mt);

/// Every group of the balance between two trajectories (u, m) and (ut, mt).
struct IdentityTerms {
  double endpoint_final = 0.0;    // -(1/dt)(m^N - mt^N, u^N - ut^N)_2
  double endpoint_initial = 0.0;  // (1/dt)(m^0 - mt^0, u^0 - ut^0)_2
  double g_forward = 0.0;         // G(m, u, ut)
  double g_backward = 0.0;        // G(mt, ut, u)
  double cost_pairing = 0.0;      // sum_n (Phi[m^n] - Phi[mt^n], m^n - mt^n)_2
  double a_pairing = 0.0;         // sum_{n<N} (a^n, m^n - mt^n)_2
  double b_pairing = 0.0;         // sum_{n>=1} (b^{n-1}, u^n - ut^n)_2
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;    // |lhs - rhs|
  double scale = 0.0;  // sum of the absolute values of the groups
};

/// Evaluates both sides. `pert` are the residuals of (ut, mt); when `reference` is given it
/// holds the residuals of (u, m) itself and is subtracted, so the balance is exact for any
/// pair of trajectories.
IdentityTerms fundamental_identity(const PowerHamiltonian& H, double nu, const CostOperator& cost,
                                   const SpaceTimeField& u, const SpaceTimeField& m,
                                   const SpaceTimeField& ut, const SpaceTimeField& mt,
                                   const PerturbationPair& pert,
                                   const PerturbationPair* reference = nullptr);

double fundamental_identity_gap(const PowerHamiltonian& H, double nu, const CostOperator& cost,
                                const SpaceTimeField& u, const SpaceTimeField& m,
                                const SpaceTimeField& ut, const SpaceTimeField& mt,
                                const PerturbationPair& pert,
                                const PerturbationPair* reference = nullptr);

struct IdentityReport {
  double beta = 0.0;
  int samples = 0;
  double worst_relative_gap = 0.0;
  double worst_middle_term = 0.0;  // most negative of G, G, cost pairing over scale
  int worst_sample = -1;
  double tolerance = 1e-10;
  bool pass = false;
};

/// Random trajectory pairs on an n_side x n_side grid with n_steps steps, one cost operator.
IdentityReport identity_suite(double beta, int samples, std::uint64_t seed, const CostOperator& cost,
                              int n_side = 8, int n_steps = 5, double tolerance = 1e-10);

/// Random nonnegative field of unit mass.
GridField random_density(const TorusGrid& g, CounterRng& rng);

AprioriMonitors apriori_monitors(const EvolutiveSolution& sol, const LocalCost& cost, double beta);

/// min u0 - T max(0, max calH - min_n min Phi[m^n]), the discrete comparison bound on u.
double comparison_lower_bound(const EvolutiveProblem& p, const EvolutiveSolution& sol);

}  // namespace mfg
