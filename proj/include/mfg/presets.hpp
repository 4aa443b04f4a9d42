#pragma once

#include "mfg/config.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// Node samples of calH for the configured preset (zero, A sin(2 pi x1) sin(2 pi x2), or file).
GridField hamiltonian_preset(const RunConfig& cfg, const TorusGrid& grid);
/// Node samples of u0 (zero, 0.5 (cos 2 pi x1 + cos 2 pi x2), or file).
GridField u0_preset(const RunConfig& cfg, const TorusGrid& grid);
/// Cell averages of mT (uniform, von Mises bump centred at (1/2, 1/2), or file), in K_h.
DiscreteDensity mT_preset(const RunConfig& cfg, const TorusGrid& grid);

PowerHamiltonian make_hamiltonian(const RunConfig& cfg, const TorusGrid& grid);
EvolutiveProblem make_evolutive(const RunConfig& cfg, int n_side, int n_steps);
EvolutiveProblem make_evolutive(const RunConfig& cfg);
ErgodicProblem make_ergodic(const RunConfig& cfg, int n_side);
ErgodicProblem make_ergodic(const RunConfig& cfg);

namespace presets {
/// calH = 0, F(m) = m, u0 = 0, mT = 1, beta = 2, nu = 1, T = 1, N_h = 16, N_T = 32.
RunConfig uniform();
/// Bilaplacian cost, beta = 2, nu = 0.6, sines calH with A = 1, cosine u0, bump mT, N_T = 2 N_h.
RunConfig smooth_nonlocal();
/// smooth_nonlocal with the local cost F(m) = m^alpha.
RunConfig local_power(double alpha = 2.0);
/// Ergodic, calH = 0, F(m) = m.
RunConfig ergodic_zero();
/// Ergodic, beta = 2, nu = 1, sines calH with A = 1, F(m) = m^2.
RunConfig ergodic_sines();
}  // namespace presets

}  // namespace mfg
