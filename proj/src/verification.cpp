#include "mfg/verification.hpp"

#include <algorithm>
#include <cmath>

#include "mfg/dynamics.hpp"
#include "mfg/errors.hpp"

namespace mfg {

PerturbationPair perturbation_residuals(const PowerHamiltonian& H, double nu,
                                        const CostOperator& cost, const SpaceTimeField& ut,
                                        const SpaceTimeField& mt) {
  if (ut.n_steps() != mt.n_steps()) throw UsageError("perturbation_residuals: mismatched meshes");
  const double dt = ut.mesh().dt;
  PerturbationPair p{SpaceTimeField(ut.grid(), ut.mesh()), SpaceTimeField(ut.grid(), ut.mesh())};
  for (int n = 0; n < ut.n_steps(); ++n) {
    p.a[n] = hjb_residual(H, nu, dt, ut[n + 1], ut[n], cost.apply(mt[n]));
    p.b[n] = fp_residual(H, nu, dt, ut[n + 1], mt[n + 1], mt[n]);
  }
  return p;
}

IdentityTerms fundamental_identity(const PowerHamiltonian& H, double nu, const CostOperator& cost,
                                   const SpaceTimeField& u, const SpaceTimeField& m,
                                   const SpaceTimeField& ut, const SpaceTimeField& mt,
                                   const PerturbationPair& pert,
                                   const PerturbationPair* reference) {
  (void)nu;
  const int nt = u.n_steps();
  if (m.n_steps() != nt || ut.n_steps() != nt || mt.n_steps() != nt || pert.a.n_steps() != nt)
    throw UsageError("fundamental_identity: mismatched time meshes");
  const double dt = u.mesh().dt;
  IdentityTerms t;
  t.endpoint_final = -inner2(m[nt] - mt[nt], u[nt] - ut[nt]) / dt;
  t.endpoint_initial = inner2(m[0] - mt[0], u[0] - ut[0]) / dt;
  t.g_forward = functional_G(H, m, u, ut);
  t.g_backward = functional_G(H, mt, ut, u);
  for (int n = 0; n < nt; ++n) {
    const GridField dm = m[n] - mt[n];
    t.cost_pairing += inner2(cost.apply(m[n]) - cost.apply(mt[n]), dm);
    GridField a = pert.a[n];
    if (reference) a -= reference->a[n];
    t.a_pairing += inner2(a, dm);
    GridField b = pert.b[n];
    if (reference) b -= reference->b[n];
    t.b_pairing += inner2(b, u[n + 1] - ut[n + 1]);
  }
  t.lhs = t.endpoint_final + t.endpoint_initial + t.g_forward + t.g_backward + t.cost_pairing;
  t.rhs = t.a_pairing + t.b_pairing;
  t.gap = std::abs(t.lhs - t.rhs);
  t.scale = std::abs(t.endpoint_final) + std::abs(t.endpoint_initial) + std::abs(t.g_forward) +
            std::abs(t.g_backward) + std::abs(t.cost_pairing) + std::abs(t.a_pairing) +
            std::abs(t.b_pairing);
  return t;
}

double fundamental_identity_gap(const PowerHamiltonian& H, double nu, const CostOperator& cost,
                                const SpaceTimeField& u, const SpaceTimeField& m,
                                const SpaceTimeField& ut, const SpaceTimeField& mt,
                                const PerturbationPair& pert, const PerturbationPair* reference) {
  return fundamental_identity(H, nu, cost, u, m, ut, mt, pert, reference).gap;
}

GridField random_density(const TorusGrid& g, CounterRng& rng) {
  GridField m(g);
  for (double& v : m.values()) v = rng.uniform(0.1, 2.0);
  return normalize_density(std::move(m));
}

IdentityReport identity_suite(double beta, int samples, std::uint64_t seed, const CostOperator& cost,
                              int n_side, int n_steps, double tolerance) {
  const TorusGrid g(n_side);
  const TimeMesh mesh(1.0, n_steps);
  IdentityReport rep;
  rep.beta = beta;
  rep.samples = samples;
  rep.tolerance = tolerance;
  for (int s = 0; s < samples; ++s) {
    CounterRng rng(seed, 0x1d000000ULL + static_cast<std::uint64_t>(s));
    GridField calh(g);
    for (double& v : calh.values()) v = rng.uniform(-1.0, 1.0);
    const PowerHamiltonian H(beta, calh);
    const double nu = rng.uniform(0.1, 1.0);
    SpaceTimeField u(g, mesh), ut(g, mesh), m(g, mesh), mt(g, mesh);
    for (int n = 0; n <= n_steps; ++n) {
      for (double& v : u[n].values()) v = rng.uniform(-1.0, 1.0);
      for (double& v : ut[n].values()) v = rng.uniform(-1.0, 1.0);
      m[n] = random_density(g, rng);
      mt[n] = random_density(g, rng);
    }
    const PerturbationPair pert = perturbation_residuals(H, nu, cost, ut, mt);
    const PerturbationPair ref = perturbation_residuals(H, nu, cost, u, m);
    const IdentityTerms t = fundamental_identity(H, nu, cost, u, m, ut, mt, pert, &ref);
    const double rel = t.gap / std::max(t.scale, 1e-300);
    if (rel > rep.worst_relative_gap || rep.worst_sample < 0) {
      rep.worst_relative_gap = std::max(rep.worst_relative_gap, rel);
      rep.worst_sample = s;
    }
    const double middle = std::min({t.g_forward, t.g_backward, t.cost_pairing}) / t.scale;
    rep.worst_middle_term = s == 0 ? middle : std::min(rep.worst_middle_term, middle);
  }
  rep.pass = rep.worst_relative_gap <= tolerance && rep.worst_middle_term >= -tolerance;
  return rep;
}

AprioriMonitors apriori_monitors(const EvolutiveSolution& sol, const LocalCost& cost, double beta) {
  const auto& g = sol.u.grid();
  const double h2 = g.h() * g.h();
  const double dt = sol.u.mesh().dt;
  const int nt = sol.u.n_steps();
  AprioriMonitors mon;
  mon.lower_bound_u = sol.u[0].min();
  for (int n = 0; n <= nt; ++n) {
    const GridField& u = sol.u[n];
    mon.lower_bound_u = std::min(mon.lower_bound_u, u.min());
    mon.max_l1_u = std::max(mon.max_l1_u, norm_l1(u));
    mon.Un_path.push_back(u.mass());
    if (n >= 1) {
      for (int i = 0; i < g.n_side(); ++i)
        for (int j = 0; j < g.n_side(); ++j)
          mon.energy_grad_term += h2 * dt * std::pow(euclid(stencil_at(u, i, j)), beta);
    }
    if (n < nt)
      for (double v : sol.m[n].values())
        mon.energy_cost_term += h2 * dt * std::pow(std::abs(cost.f(std::max(v, 0.0))), cost.gamma);
  }
  for (int n = 0; n < nt; ++n)
    mon.Un_total_variation += std::abs(mon.Un_path[n + 1] - mon.Un_path[n]);
  return mon;
}

double comparison_lower_bound(const EvolutiveProblem& p, const EvolutiveSolution& sol) {
  double min_phi = p.cost.apply(sol.m[0]).min();
  for (int n = 1; n < p.mesh.n_steps; ++n) min_phi = std::min(min_phi, p.cost.apply(sol.m[n]).min());
  return p.u0.min() - p.mesh.horizon * std::max(0.0, p.hamiltonian.calh().max() - min_phi);
}

}  // namespace mfg
