#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "mfg/dynamics.hpp"
#include "mfg/errors.hpp"
#include "mfg/random.hpp"
#include "oracles.hpp"

using namespace mfg;

namespace {

GridField random_field(const TorusGrid& g, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
  GridField f(g);
  for (double& v : f.values()) v = rng.uniform(lo, hi);
  return f;
}

GridField cosine_x(const TorusGrid& g) {
  return sample_nodes([](double x, double) { return std::cos(2.0 * std::numbers::pi * x); }, g);
}

double max_diff(const GridField& a, const GridField& b) { return norm_sup(a - b); }

// Dense matrix of a linear map, column by column.
template <class F>
Eigen::MatrixXd dense_of(const TorusGrid& g, F&& apply) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    GridField e(g);
    e[static_cast<std::size_t>(c)] = 1.0;
    const GridField col = apply(e);
    for (Eigen::Index r = 0; r < n; ++r) A(r, c) = col[static_cast<std::size_t>(r)];
  }
  return A;
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("Bellman residual: trivial balances and a naive oracle") {
    const TorusGrid g(8);
    const PowerHamiltonian H0(2.0, GridField(g));
    const GridField c(g, 0.7);
    CHECK(norm_sup(hjb_residual(H0, 1.0, 0.1, c, c, GridField(g))) <= 1e-13);
    const double dt = 0.05;
    const PowerHamiltonian Hc(2.0, GridField(g, 3.0));
    CHECK(norm_sup(hjb_residual(Hc, 1.0, dt, GridField(g, -dt * 3.0), GridField(g), GridField(g))) <
          1e-14);

    CounterRng rng(1, 2);
    for (double beta : {1.5, 2.0, 3.0}) {
      const GridField calh = random_field(g, rng);
      const PowerHamiltonian H(beta, calh);
      const GridField un = random_field(g, rng), uc = random_field(g, rng), phi = random_field(g, rng);
      const GridField mine = hjb_residual(H, 0.4, 0.01, un, uc, phi);
      const GridField ref = oracle::bellman_residual(calh, beta, 0.4, 0.01, un, uc, phi);
      for (std::size_t k = 0; k < mine.size(); ++k)
        CHECK(mine[k] == doctest::Approx(ref[k]).epsilon(1e-13));
    }
  }

  TEST_CASE("Bellman step: fixed points") {
    const TorusGrid g(8);
    const PowerHamiltonian H(2.0, GridField(g));
    const HjbStep zero = hjb_step_solve(H, 1.0, 0.01, GridField(g), GridField(g));
    CHECK(norm_sup(zero.u) == 0.0);
    CHECK(zero.iterations == 0);
    const HjbStep one = hjb_step_solve(H, 1.0, 0.01, GridField(g), GridField(g, 1.0));
    for (double v : one.u.values()) CHECK(v == doctest::Approx(0.01).epsilon(1e-12));
    CHECK_THROWS_AS(hjb_step_solve(H, 0.0, 0.01, GridField(g), GridField(g)), UsageError);
  }

  TEST_CASE("Bellman step agrees with a damped fixed-point oracle at dt = 0.01") {
    const TorusGrid g(8);
    const double nu = 1.0, dt = 0.01, beta = 2.0;
    const GridField calh(g);
    const PowerHamiltonian H(beta, calh);
    const GridField u_cur = cosine_x(g);
    const GridField phi(g);
    const HjbStep st = hjb_step_solve(H, nu, dt, u_cur, phi);
    CHECK(norm_sup(hjb_residual(H, nu, dt, st.u, u_cur, phi)) <= 1e-11);

    // Richardson u <- u - w R(u) with w below the inverse of the largest Jacobian diagonal.
    const double h = g.h();
    const double grad_bound = beta * 2.0 * 2.0 * std::numbers::pi;  // |g_q| with |p| <= 4 pi
    const double w = 1.0 / (1.0 / dt + 4.0 * nu / (h * h) + 2.0 * 2.0 * grad_bound / h);
    GridField u = u_cur;
    for (int it = 0; it < 200000; ++it) {
      GridField r = oracle::bellman_residual(calh, beta, nu, dt, u, u_cur, phi);
      if (norm_sup(r) < 1e-13) break;
      r *= -w;
      u += r;
    }
    CHECK(max_diff(u, st.u) <= 1e-9);
  }

  TEST_CASE("Bellman step agrees with the explicit fixed-point oracle at dt = 1e-3") {
    const TorusGrid g(8);
    const double nu = 1.0, dt = 1e-3;
    for (double beta : {1.5, 2.0, 3.0}) {
      CAPTURE(beta);
      const GridField calh = sample_nodes([](double x, double y) { return std::sin(6.0 * x) * std::cos(4.0 * y); }, g);
      const PowerHamiltonian H(beta, calh);
      // Keep the explicit map a contraction: dt times the Jacobian norm stays below 1.
      const GridField u_cur = (beta == 3.0 ? 0.2 : 1.0) * cosine_x(g);
      const GridField phi(g, 0.5);
      const HjbStep st = hjb_step_solve(H, nu, dt, u_cur, phi);
      GridField u = u_cur;
      for (int it = 0; it < 10000; ++it) {
        GridField next(g);
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j)
            next(i, j) = u_cur(i, j) + dt * (nu * oracle::lap_at(u, i, j) -
                                             oracle::g_at(calh, beta, u, i, j) + phi(i, j));
        const double d = max_diff(next, u);
        u = next;
        if (d < 1e-15) break;
      }
      CHECK(max_diff(u, st.u) <= 1e-9);
    }
  }

  TEST_CASE("Picard fallback reaches the same step") {
    const TorusGrid g(8);
    const PowerHamiltonian H(1.5, GridField(g));
    const GridField u_cur = cosine_x(g);
    const HjbStep a = hjb_step_solve(H, 0.5, 0.01, u_cur, GridField(g));
    const HjbStep b = hjb_step_picard(H, 0.5, 0.01, u_cur, GridField(g), 1e-12, 100000);
    CHECK(max_diff(a.u, b.u) < 1e-9);
    CHECK_THROWS_AS(hjb_step_picard(H, 0.5, 0.01, u_cur, GridField(g), 1e-12, 2), NonConvergence);
  }

  TEST_CASE("Newton reports non-convergence when starved") {
    const TorusGrid g(8);
    const PowerHamiltonian H(3.0, GridField(g));
    HjbStepConfig cfg;
    cfg.max_newton = 1;
    const GridField u_cur = sample_nodes([](double x, double) { return 5.0 * std::cos(2.0 * std::numbers::pi * x); }, g);
    CHECK_THROWS_AS(hjb_step_solve(H, 1.0, 0.1, u_cur, GridField(g), cfg), NonConvergence);
  }

  TEST_CASE("comparison bound for one step") {
    const TorusGrid g(8);
    CounterRng rng(3, 3);
    const GridField calh = random_field(g, rng);
    const PowerHamiltonian H(2.0, calh);
    const GridField u_cur = random_field(g, rng);
    const GridField phi = random_field(g, rng, 0.0, 1.0);
    const double dt = 0.01;
    const HjbStep st = hjb_step_solve(H, 1.0, dt, u_cur, phi);
    CHECK(st.u.min() >= u_cur.min() - dt * std::max(0.0, calh.max()) - 1e-12);
  }

  TEST_CASE("transport: constants, duality, conservation, linearity") {
    const TorusGrid g(8);
    CounterRng rng(4, 4);
    for (double beta : {1.5, 2.0, 3.0}) {
      const PowerHamiltonian H(beta, random_field(g, rng));
      const GridField m = random_field(g, rng, 0.0, 2.0);
      CHECK(norm_sup(transport_apply(H, GridField(g, 4.2), m)) == 0.0);
      const GridField u = random_field(g, rng), w = random_field(g, rng);
      const GridField T = transport_apply(H, u, m);
      double rhs = 0.0, scale = 0.0;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          const Quad gq = H.grad(stencil_at(u, i, j));
          const Quad dw = stencil_at(w, i, j);
          for (int k = 0; k < 4; ++k) {
            rhs -= m(i, j) * gq[k] * dw[k];
            scale += std::abs(m(i, j) * gq[k] * dw[k]);
          }
        }
      CHECK(std::abs(inner2(T, w) - rhs) <= 1e-13 * scale);
      CHECK(std::abs(T.sum()) <= 1e-13 * norm_sup(T) * g.size());
      const GridField m2 = random_field(g, rng, 0.0, 2.0);
      const GridField lhs = transport_apply(H, u, 2.0 * m + m2);
      GridField lin = transport_apply(H, u, m);
      lin *= 2.0;
      lin += transport_apply(H, u, m2);
      CHECK(max_diff(lhs, lin) <= 1e-12 * norm_sup(lin));
    }
  }

  TEST_CASE("Fokker-Planck step: constant, mass, M-matrix, dense oracle") {
    {
      const TorusGrid g(8);
      const PowerHamiltonian H(2.0, GridField(g));
      const FpStep st = fp_step_solve(H, 1.0, 0.01, GridField(g, 3.0), GridField(g, 1.0));
      for (double v : st.m.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
    }
    CounterRng rng(5, 5);
    for (double beta : {1.5, 2.0, 3.0}) {
      CAPTURE(beta);
      const TorusGrid g(4);
      const PowerHamiltonian H(beta, random_field(g, rng));
      const double nu = 0.8, dt = 0.05;
      const GridField u_next = random_field(g, rng);
      const GridField m_next = random_field(g, rng, 0.1, 2.0);
      const FpStep st = fp_step_solve(H, nu, dt, u_next, m_next);
      CHECK(std::abs(st.m.mass() - m_next.mass()) <= 1e-12);
      CHECK(st.m.min() >= 0.0);
      CHECK(norm_sup(fp_residual(H, nu, dt, u_next, m_next, st.m)) <= 1e-10);

      // Dense oracle built column by column from the operator m -> m/dt - nu Lap m - T(u, m).
      const Eigen::MatrixXd A = dense_of(g, [&](const GridField& e) {
        GridField col = e;
        col *= 1.0 / dt;
        GridField lap = laplace5(e);
        lap *= nu;
        col -= lap;
        col -= transport_apply(H, u_next, e);
        return col;
      });
      Eigen::VectorXd b(static_cast<Eigen::Index>(g.size()));
      for (std::size_t k = 0; k < g.size(); ++k) b(static_cast<Eigen::Index>(k)) = m_next[k] / dt;
      const Eigen::VectorXd x = A.fullPivLu().solve(b);
      for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(st.m[k] - x(static_cast<Eigen::Index>(k))) <= 1e-10);

      // Sparse assembly equals the transposed linearisation plus 1/dt.
      const SparseMatrix J = linearized_matrix(H, nu, u_next, 1.0 / dt);
      const Eigen::MatrixXd Jd = Eigen::MatrixXd(J);
      CHECK((Jd.transpose() - A).cwiseAbs().maxCoeff() <= 1e-10);
      for (Eigen::Index r = 0; r < A.rows(); ++r)
        for (Eigen::Index c = 0; c < A.cols(); ++c) {
          if (r == c)
            CHECK(A(r, c) > 0.0);
          else
            CHECK(A(r, c) <= 0.0);
        }
      // Column sums of the transposed operator are 1/dt, which is the mass balance.
      for (Eigen::Index c = 0; c < A.cols(); ++c) CHECK(A.col(c).sum() == doctest::Approx(1.0 / dt));
    }
  }

  TEST_CASE("Fokker-Planck step keeps positivity over a chain") {
    const TorusGrid g(16);
    CounterRng rng(6, 6);
    const PowerHamiltonian H(3.0, random_field(g, rng));
    GridField m(g, 1.0);
    for (int n = 0; n < 20; ++n) {
      const FpStep st = fp_step_solve(H, 0.3, 0.05, random_field(g, rng, -2.0, 2.0), m);
      CHECK(st.clamp_magnitude <= 1e-12);
      m = st.m;
      CHECK(m.min() >= 0.0);
      CHECK(std::abs(m.mass() - 1.0) <= 1e-11);
    }
  }

  TEST_CASE("matrix-free and assembled linearisations agree") {
    const TorusGrid g(8);
    CounterRng rng(7, 7);
    const PowerHamiltonian H(1.5, random_field(g, rng));
    const GridField u = random_field(g, rng), v = random_field(g, rng);
    const GridField a = linearized_apply(H, 0.9, u, v);
    const Eigen::VectorXd b = linearized_matrix(H, 0.9, u, 0.0) * to_vector(v);
    CHECK(max_diff(a, from_vector(g, b)) <= 1e-10);
  }

  TEST_CASE("adjoint structure") {
    CounterRng rng(8, 8);
    for (int n : {4, 8, 16}) {
      const TorusGrid g(n);
      for (double beta : {1.5, 2.0, 3.0}) {
        const PowerHamiltonian H(beta, random_field(g, rng));
        const AdjointCheck a = adjoint_check(H, 0.7, random_field(g, rng), 20, 99);
        CHECK(a.max_relative <= 1e-12);
        const AdjointCheck c = adjoint_check(H, 0.7, GridField(g, 1.0), 20, 99);
        CHECK(c.max_relative <= 1e-12);
      }
    }
  }

  TEST_CASE("adjoint pairing is bilinear") {
    const TorusGrid g(8);
    CounterRng rng(9, 9);
    const PowerHamiltonian H(2.0, random_field(g, rng));
    const GridField u = random_field(g, rng), v = random_field(g, rng), m = random_field(g, rng);
    const double base = inner2(linearized_apply(H, 0.5, u, v), m);
    CHECK(inner2(linearized_apply(H, 0.5, u, 10.0 * v), m) == doctest::Approx(10.0 * base).epsilon(1e-12));
  }

  TEST_CASE("linear solve contract") {
    const TorusGrid g(4);
    const PowerHamiltonian H(2.0, GridField(g));
    const SparseMatrix A = linearized_matrix(H, 1.0, GridField(g), 0.0);  // singular
    Eigen::VectorXd b = Eigen::VectorXd::Ones(16);
    b(0) = 2.0;
    CHECK_THROWS_AS(solve_linear(A, b, LinearSolveContract{}), LinearSolveError);
  }
}
