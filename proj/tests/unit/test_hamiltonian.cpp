#include <doctest.h>

#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/hamiltonian.hpp"
#include "mfg/random.hpp"

using namespace mfg;

namespace {

// Independent g for a zero calH: (sum of squared upwind parts)^(beta/2).
double g_oracle(double beta, const Quad& q) {
  const double a = std::min(q[0], 0.0), b = std::max(q[1], 0.0), c = std::min(q[2], 0.0),
               d = std::max(q[3], 0.0);
  return std::pow(a * a + b * b + c * c + d * d, beta / 2.0);
}

}  // namespace

TEST_SUITE("hamiltonian") {
  TEST_CASE("beta must exceed one") {
    const TorusGrid g(4);
    CHECK_THROWS_AS(PowerHamiltonian(1.0, GridField(g)), UsageError);
    CHECK_THROWS_AS(PowerHamiltonian(0.5, GridField(g)), UsageError);
    CHECK_NOTHROW(PowerHamiltonian(1.01, GridField(g)));
  }

  TEST_CASE("upwind part and values") {
    const Quad p = upwind_part({-2.0, -1.0, 3.0, 4.0});
    CHECK(p == Quad{2.0, 0.0, 0.0, 4.0});
    const TorusGrid g(4);
    GridField calh(g, 0.0);
    calh[5] = 1.5;
    const PowerHamiltonian H(2.0, calh);
    CHECK(H.value(0, {0, 0, 0, 0}) == 0.0);
    CHECK(H.value(5, {0, 0, 0, 0}) == 1.5);
    CHECK(H.value(0, {-2.0, 0, 0, 0}) == doctest::Approx(4.0));
    CHECK(H.value(0, {2.0, -7.0, 0, 0}) == 0.0);  // neither slot is upwind
    CHECK(H.value(0, {-3.0, 0, 0, 4.0}) == doctest::Approx(25.0));
    const PowerHamiltonian H3(3.0, GridField(g));
    CHECK(H3.value(0, {0, 2.0, 0, 0}) == doctest::Approx(8.0));
  }

  TEST_CASE("gradient against finite differences and the sign pattern") {
    CounterRng rng(11, 1);
    for (double beta : {1.5, 2.0, 3.0}) {
      const PowerHamiltonian H(beta, GridField(TorusGrid(4)));
      for (int s = 0; s < 200; ++s) {
        Quad q;
        for (double& v : q) v = rng.uniform(-2.0, 2.0);
        const Quad gq = H.grad(q);
        CHECK(gq[0] <= 0.0);
        CHECK(gq[1] >= 0.0);
        CHECK(gq[2] <= 0.0);
        CHECK(gq[3] >= 0.0);
        for (int k = 0; k < 4; ++k) {
          if (std::abs(q[k]) < 1e-4) continue;  // stay off the kinks
          const double e = 1e-6;
          Quad a = q, b = q;
          a[k] += e;
          b[k] -= e;
          const double fd = (g_oracle(beta, a) - g_oracle(beta, b)) / (2.0 * e);
          CHECK(gq[k] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
      }
      CHECK(H.grad({0, 0, 0, 0}) == Quad{0, 0, 0, 0});
    }
  }

  TEST_CASE("hessian against finite differences of the gradient") {
    CounterRng rng(12, 1);
    for (double beta : {1.5, 2.0, 3.0}) {
      const PowerLaw G{beta};
      CHECK_THROWS_AS(G.hessian({0, 0, 0, 0}), UsageError);
      for (int s = 0; s < 100; ++s) {
        Quad p;
        for (double& v : p) v = rng.uniform(0.2, 2.0);
        const Mat4 hess = G.hessian(p);
        for (int l = 0; l < 4; ++l) {
          const double e = 1e-6;
          Quad a = p, b = p;
          a[l] += e;
          b[l] -= e;
          const Quad ga = G.grad(a), gb = G.grad(b);
          for (int k = 0; k < 4; ++k)
            CHECK(hess[k][l] == doctest::Approx((ga[k] - gb[k]) / (2.0 * e)).epsilon(1e-6).scale(1.0));
        }
      }
    }
  }

  TEST_CASE("Bregman gap is nonnegative and vanishes on the diagonal") {
    CounterRng rng(13, 1);
    for (double beta : {1.5, 2.0, 3.0}) {
      const PowerHamiltonian H(beta, GridField(TorusGrid(4)));
      for (int s = 0; s < 500; ++s) {
        Quad q, qt;
        for (double& v : q) v = rng.uniform(-2.0, 2.0);
        for (double& v : qt) v = rng.uniform(-2.0, 2.0);
        CHECK(H.bregman_gap(q, qt) >= -1e-13);
        CHECK(H.bregman_gap(q, q) == 0.0);
      }
    }
  }

  TEST_CASE("functional G: zero on equal trajectories, positive otherwise") {
    const TorusGrid g(4);
    const TimeMesh mesh(1.0, 3);
    const PowerHamiltonian H(2.0, GridField(g));
    SpaceTimeField m(g, mesh, 1.0), u(g, mesh), ut(g, mesh);
    CounterRng rng(14, 1);
    for (int n = 0; n <= 3; ++n)
      for (std::size_t k = 0; k < g.size(); ++k) {
        u[n][k] = rng.uniform(-1.0, 1.0);
        ut[n][k] = rng.uniform(-1.0, 1.0);
      }
    CHECK(functional_G(H, m, u, u) == 0.0);
    CHECK(functional_G(H, m, u, ut) > 0.0);
    // Brute-force sum over slices n = 1..N_T weighted by m^{n-1}.
    double brute = 0.0;
    for (int n = 1; n <= 3; ++n)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          brute += H.bregman_gap(stencil_at(u[n], i, j), stencil_at(ut[n], i, j));
    CHECK(functional_G(H, m, u, ut) == doctest::Approx(brute).epsilon(1e-13));
    const SpaceTimeField short_u(g, TimeMesh(1.0, 2));
    CHECK_THROWS_AS(functional_G(H, m, short_u, short_u), UsageError);
  }

  TEST_CASE("hamiltonian field at a constant is calH") {
    const TorusGrid g(4);
    GridField calh(g);
    for (std::size_t k = 0; k < calh.size(); ++k) calh[k] = 0.1 * k;
    const PowerHamiltonian H(3.0, calh);
    const GridField f = hamiltonian_field(H, GridField(g, 2.0));
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(f[k] == calh[k]);
  }
}
