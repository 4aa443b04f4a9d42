#include <doctest.h>

#include <cmath>

#include "mfg/presets.hpp"
#include "mfg/random.hpp"
#include "mfg/verification.hpp"
#include "oracles.hpp"

using namespace mfg;

namespace {

struct Pair {
  SpaceTimeField u, m;
};

Pair random_pair(const TorusGrid& g, const TimeMesh& mesh, CounterRng& rng) {
  Pair p{SpaceTimeField(g, mesh), SpaceTimeField(g, mesh)};
  for (int n = 0; n <= mesh.n_steps; ++n) {
    for (double& v : p.u[n].values()) v = rng.uniform(-1.0, 1.0);
    p.m[n] = random_density(g, rng);
  }
  return p;
}

double dot(const GridField& a, const GridField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Sum over steps and nodes of m^{n-1} times the Bregman gap of G at the upwind stencils.
double g_oracle(double beta, const SpaceTimeField& m, const SpaceTimeField& u,
                const SpaceTimeField& ut) {
  const int n_side = u.grid().n_side();
  double s = 0.0;
  for (int n = 1; n <= u.n_steps(); ++n)
    for (int i = 0; i < n_side; ++i)
      for (int j = 0; j < n_side; ++j) {
        const GridField zero(u.grid());
        const double gu = oracle::g_at(zero, beta, u[n], i, j);
        const double gt = oracle::g_at(zero, beta, ut[n], i, j);
        const auto gq = oracle::gq_at(beta, u[n], i, j);
        const double h = u.grid().h();
        const GridField d = ut[n] - u[n];
        const double dq[4] = {(d(i + 1, j) - d(i, j)) / h, (d(i, j) - d(i - 1, j)) / h,
                              (d(i, j + 1) - d(i, j)) / h, (d(i, j) - d(i, j - 1)) / h};
        double lin = 0.0;
        for (int k = 0; k < 4; ++k) lin += gq[k] * dq[k];
        s += m[n - 1](i, j) * (gt - gu - lin);
      }
  return s;
}

}  // namespace

TEST_SUITE("verification") {
  TEST_CASE("identity is trivial for equal pairs") {
    const TorusGrid g(6);
    const TimeMesh mesh(1.0, 4);
    CounterRng rng(5, 0);
    GridField calh(g);
    for (double& v : calh.values()) v = rng.uniform(-1.0, 1.0);
    const PowerHamiltonian H(2.0, calh);
    const Pair a = random_pair(g, mesh, rng);
    const CostOperator cost = CostOperator::bilaplacian();
    const PerturbationPair pert = perturbation_residuals(H, 0.4, cost, a.u, a.m);
    const IdentityTerms t = fundamental_identity(H, 0.4, cost, a.u, a.m, a.u, a.m, pert, &pert);
    CHECK(t.scale == 0.0);
    CHECK(t.gap == 0.0);
  }

  TEST_CASE("identity terms agree with a loop oracle and balance") {
    const TorusGrid g(8);
    const TimeMesh mesh(1.0, 5);
    const double dt = mesh.dt, nu = 0.45;
    for (double beta : {1.5, 2.0, 3.0})
      for (const CostOperator& cost :
           {CostOperator::bilaplacian(), CostOperator::local(LocalCost::power(2.0))}) {
        CAPTURE(beta);
        CounterRng rng(11, static_cast<std::uint64_t>(beta * 10));
        GridField calh(g);
        for (double& v : calh.values()) v = rng.uniform(-1.0, 1.0);
        const PowerHamiltonian H(beta, calh);
        const Pair x = random_pair(g, mesh, rng), y = random_pair(g, mesh, rng);

        // Oracle: residuals of both pairs with loop code, then both sides of the balance.
        double lhs = -dot(x.m[5] - y.m[5], x.u[5] - y.u[5]) / dt +
                     dot(x.m[0] - y.m[0], x.u[0] - y.u[0]) / dt;
        const double gf = g_oracle(beta, x.m, x.u, y.u), gb = g_oracle(beta, y.m, y.u, x.u);
        lhs += gf + gb;
        double rhs = 0.0;
        for (int n = 0; n < 5; ++n) {
          const GridField px = cost.apply(x.m[n]), py = cost.apply(y.m[n]);
          lhs += dot(px - py, x.m[n] - y.m[n]);
          const GridField ax = oracle::bellman_residual(calh, beta, nu, dt, x.u[n + 1], x.u[n], px);
          const GridField ay = oracle::bellman_residual(calh, beta, nu, dt, y.u[n + 1], y.u[n], py);
          const GridField bx = oracle::fp_residual(beta, nu, dt, x.u[n + 1], x.m[n + 1], x.m[n]);
          const GridField by = oracle::fp_residual(beta, nu, dt, y.u[n + 1], y.m[n + 1], y.m[n]);
          rhs += dot(ay - ax, x.m[n] - y.m[n]) + dot(by - bx, x.u[n + 1] - y.u[n + 1]);
        }
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + std::abs(rhs)));

        const PerturbationPair pert = perturbation_residuals(H, nu, cost, y.u, y.m);
        const PerturbationPair ref = perturbation_residuals(H, nu, cost, x.u, x.m);
        const IdentityTerms t = fundamental_identity(H, nu, cost, x.u, x.m, y.u, y.m, pert, &ref);
        CHECK(t.g_forward == doctest::Approx(gf).epsilon(1e-11));
        CHECK(t.g_backward == doctest::Approx(gb).epsilon(1e-11));
        CHECK(t.lhs == doctest::Approx(lhs).epsilon(1e-10));
        CHECK(t.rhs == doctest::Approx(rhs).epsilon(1e-10));
        CHECK(t.gap <= 1e-10 * t.scale);
        CHECK(t.g_forward >= 0.0);
        CHECK(t.g_backward >= 0.0);
        CHECK(t.cost_pairing >= 0.0);
      }
  }

  TEST_CASE("a sign-flipped transport term breaks the balance") {
    const TorusGrid g(8);
    const TimeMesh mesh(1.0, 5);
    CounterRng rng(13, 0);
    GridField calh(g);
    for (double& v : calh.values()) v = rng.uniform(-1.0, 1.0);
    const PowerHamiltonian H(2.0, calh);
    const CostOperator cost = CostOperator::bilaplacian();
    const Pair x = random_pair(g, mesh, rng), y = random_pair(g, mesh, rng);
    const double nu = 0.5;
    PerturbationPair pert = perturbation_residuals(H, nu, cost, y.u, y.m);
    PerturbationPair ref = perturbation_residuals(H, nu, cost, x.u, x.m);
    CHECK(fundamental_identity(H, nu, cost, x.u, x.m, y.u, y.m, pert, &ref).gap <=
          1e-10 * fundamental_identity(H, nu, cost, x.u, x.m, y.u, y.m, pert, &ref).scale);
    for (int n = 0; n < 5; ++n) {
      pert.b[n] -= 2.0 * transport_apply(H, y.u[n + 1], y.m[n]);
      ref.b[n] -= 2.0 * transport_apply(H, x.u[n + 1], x.m[n]);
    }
    const IdentityTerms t = fundamental_identity(H, nu, cost, x.u, x.m, y.u, y.m, pert, &ref);
    CHECK(t.gap >= 1e-3 * t.scale);
  }

  TEST_CASE("identity suite passes for every exponent and cost") {
    for (double beta : {1.5, 2.0, 3.0}) {
      const IdentityReport a = identity_suite(beta, 50, 7, CostOperator::bilaplacian());
      const IdentityReport b = identity_suite(beta, 50, 7, CostOperator::local(LocalCost::power(2.0)));
      CHECK(a.pass);
      CHECK(b.pass);
      CHECK(a.worst_relative_gap <= 1e-10);
      CHECK(a.worst_middle_term >= 0.0);
    }
  }

  TEST_CASE("monitors on the uniform solution") {
    RunConfig c = presets::uniform();
    c.problem.N_h = 8;
    c.problem.N_T = 4;
    const EvolutiveProblem p = make_evolutive(c);
    const EvolutiveSolution s = solve_evolutive(p);
    const AprioriMonitors m = apriori_monitors(s, LocalCost::linear(), 2.0);
    CHECK(m.energy_grad_term <= 1e-20);
    CHECK(m.energy_cost_term == doctest::Approx(1.0));  // h^2 dt sum over N_T slices of 1
    CHECK(m.lower_bound_u == doctest::Approx(0.0));
    CHECK(m.max_l1_u == doctest::Approx(1.0));
    CHECK(m.Un_total_variation == doctest::Approx(1.0));
    CHECK(comparison_lower_bound(p, s) == doctest::Approx(0.0));
  }
}
