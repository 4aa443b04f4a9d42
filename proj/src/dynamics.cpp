#include "mfg/dynamics.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/random.hpp"

namespace mfg {

Eigen::VectorXd to_vector(const GridField& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t k = 0; k < f.size(); ++k) v(static_cast<Eigen::Index>(k)) = f[k];
  return v;
}

GridField from_vector(const TorusGrid& g, const Eigen::VectorXd& v) {
  return GridField(g, std::vector<double>(v.data(), v.data() + v.size()));
}

GridField hjb_residual(const PowerHamiltonian& H, double nu, double dt, const GridField& u_next,
                       const GridField& u_cur, const GridField& phi) {
  require_same_grid(u_next, u_cur);
  require_same_grid(u_next, phi);
  const auto& g = u_next.grid();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  GridField r(g);
  for (int i = 0; i < g.n_side(); ++i)
    for (int j = 0; j < g.n_side(); ++j) {
      const double lap = -(4.0 * u_next(i, j) - u_next(i + 1, j) - u_next(i - 1, j) -
                           u_next(i, j + 1) - u_next(i, j - 1)) *
                         inv_h2;
      r(i, j) = (u_next(i, j) - u_cur(i, j)) / dt - nu * lap +
                H.value(g.index(i, j), stencil_at(u_next, i, j)) - phi(i, j);
    }
  return r;
}

GridField linearized_apply(const PowerHamiltonian& H, double nu, const GridField& u,
                           const GridField& v) {
  require_same_grid(u, v);
  const auto& g = u.grid();
  GridField out = laplace5(v);
  out *= -nu;
  for (int i = 0; i < g.n_side(); ++i)
    for (int j = 0; j < g.n_side(); ++j) {
      const Quad gq = H.grad(stencil_at(u, i, j));
      const Quad dv = stencil_at(v, i, j);
      out(i, j) += gq[0] * dv[0] + gq[1] * dv[1] + gq[2] * dv[2] + gq[3] * dv[3];
    }
  return out;
}

SparseMatrix linearized_matrix(const PowerHamiltonian& H, double nu, const GridField& u,
                               double shift) {
  const auto& g = u.grid();
  const int n = g.n_side();
  const double inv_h = 1.0 / g.h();
  const double diff = nu * inv_h * inv_h;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.size() * 5);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto row = static_cast<int>(g.index(i, j));
      const Quad gq = H.grad(stencil_at(u, i, j));
      const auto at = [&](int a, int b) { return static_cast<int>(g.index(a, b)); };
      // Slots: (v_{i+1,j} - v)/h, (v - v_{i-1,j})/h, (v_{i,j+1} - v)/h, (v - v_{i,j-1})/h.
      const double diag = shift + 4.0 * diff + (-gq[0] + gq[1] - gq[2] + gq[3]) * inv_h;
      trip.emplace_back(row, row, diag);
      trip.emplace_back(row, at(i + 1, j), -diff + gq[0] * inv_h);
      trip.emplace_back(row, at(i - 1, j), -diff - gq[1] * inv_h);
      trip.emplace_back(row, at(i, j + 1), -diff + gq[2] * inv_h);
      trip.emplace_back(row, at(i, j - 1), -diff - gq[3] * inv_h);
    }
  SparseMatrix A(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::VectorXd solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b,
                             const LinearSolveContract& lin) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw LinearSolveError("sparse LU factorisation failed", 0.0);
  Eigen::VectorXd x = lu.solve(b);
  const double bnorm = std::max(b.lpNorm<Eigen::Infinity>(), 1e-300);
  double res = (A * x - b).lpNorm<Eigen::Infinity>() / bnorm;
  for (int refine = 0; refine < 3 && res > lin.residual_tol; ++refine) {
    x += lu.solve(b - A * x);
    res = (A * x - b).lpNorm<Eigen::Infinity>() / bnorm;
  }
  if (!(res <= lin.residual_tol))
    throw LinearSolveError("linear solve missed its residual contract", res);
  return x;
}

HjbStep hjb_step_solve(const PowerHamiltonian& H, double nu, double dt, const GridField& u_cur,
                       const GridField& phi, const HjbStepConfig& cfg) {
  if (!(nu > 0.0)) throw UsageError("hjb_step_solve: nu must be positive");
  HjbStep st{u_cur, 0, 0.0};
  GridField r = hjb_residual(H, nu, dt, st.u, u_cur, phi);
  double rnorm = norm_sup(r);
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool analysed = false;
  while (rnorm > cfg.newton_tol) {
    if (st.iterations >= cfg.max_newton) throw NonConvergence(st.iterations, rnorm);
    ++st.iterations;
    const SparseMatrix J = linearized_matrix(H, nu, st.u, 1.0 / dt);
    if (!analysed) {
      lu.analyzePattern(J);
      analysed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) throw NonConvergence(st.iterations, rnorm);
    const Eigen::VectorXd delta = -lu.solve(to_vector(r));

    double step = 1.0;
    for (;;) {
      GridField trial = st.u;
      for (std::size_t k = 0; k < trial.size(); ++k)
        trial[k] += step * delta(static_cast<Eigen::Index>(k));
      GridField r_trial = hjb_residual(H, nu, dt, trial, u_cur, phi);
      const double n_trial = norm_sup(r_trial);
      if (n_trial <= (1.0 - cfg.armijo_c * step) * rnorm || step <= cfg.min_step) {
        st.u = std::move(trial);
        r = std::move(r_trial);
        rnorm = n_trial;
        break;
      }
      step *= 0.5;
    }
  }
  st.residual = rnorm;
  return st;
}

HjbStep hjb_step_picard(const PowerHamiltonian& H, double nu, double dt, const GridField& u_cur,
                        const GridField& phi, double tol, int max_iter) {
  const auto& g = u_cur.grid();
  const double inv_h = 1.0 / g.h();
  HjbStep st{u_cur, 0, 0.0};
  for (;;) {
    GridField r = hjb_residual(H, nu, dt, st.u, u_cur, phi);
    st.residual = norm_sup(r);
    if (st.residual <= tol) return st;
    if (st.iterations >= max_iter) throw NonConvergence(st.iterations, st.residual);
    ++st.iterations;
    double diag = 0.0;
    for (int i = 0; i < g.n_side(); ++i)
      for (int j = 0; j < g.n_side(); ++j) {
        const Quad gq = H.grad(stencil_at(st.u, i, j));
        diag = std::max(diag, (std::abs(gq[0]) + std::abs(gq[1]) + std::abs(gq[2]) + std::abs(gq[3])) * inv_h);
      }
    // Slack on the gradient part covers its drift between iterations.
    const double omega = 1.0 / (1.0 / dt + 4.0 * nu * inv_h * inv_h + 2.0 * diag);
    r *= -omega;
    st.u += r;
  }
}

GridField transport_apply(const PowerHamiltonian& H, const GridField& u, const GridField& m) {
  require_same_grid(u, m);
  const auto& g = u.grid();
  const int n = g.n_side();
  std::vector<Quad> gq(g.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gq[g.index(i, j)] = H.grad(stencil_at(u, i, j));
  const auto dg = [&](int i, int j, int slot) { return gq[g.index(i, j)][slot]; };
  GridField out(g);
  const double inv_h = 1.0 / g.h();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double c = m(i, j);
      const double x_part = c * dg(i, j, 0) - m(i - 1, j) * dg(i - 1, j, 0) +
                            m(i + 1, j) * dg(i + 1, j, 1) - c * dg(i, j, 1);
      const double y_part = c * dg(i, j, 2) - m(i, j - 1) * dg(i, j - 1, 2) +
                            m(i, j + 1) * dg(i, j + 1, 3) - c * dg(i, j, 3);
      out(i, j) = inv_h * (x_part + y_part);
    }
  return out;
}

GridField fp_residual(const PowerHamiltonian& H, double nu, double dt, const GridField& u_next,
                      const GridField& m_next, const GridField& m_cur) {
  GridField r = m_next - m_cur;
  r *= 1.0 / dt;
  GridField lap = laplace5(m_cur);
  lap *= nu;
  r += lap;
  r += transport_apply(H, u_next, m_cur);
  return r;
}

FpStep fp_step_solve(const PowerHamiltonian& H, double nu, double dt, const GridField& u_next,
                     const GridField& m_next, const LinearSolveContract& lin) {
  if (!(nu > 0.0)) throw UsageError("fp_step_solve: nu must be positive");
  require_same_grid(u_next, m_next);
  const auto& g = u_next.grid();
  const SparseMatrix A = SparseMatrix(linearized_matrix(H, nu, u_next, 1.0 / dt).transpose());
  const Eigen::VectorXd b = to_vector(m_next) / dt;
  const Eigen::VectorXd x = solve_linear(A, b, lin);

  FpStep st{from_vector(g, x), 0.0, 0.0};
  st.solve_residual =
      (A * x - b).lpNorm<Eigen::Infinity>() / std::max(b.lpNorm<Eigen::Infinity>(), 1e-300);
  bool clamped = false;
  for (double& v : st.m.values()) {
    if (v >= 0.0) continue;
    if (v < -1e-12)
      throw SolverError("fp_step_solve: density entry " + std::to_string(v) +
                        " below the clamp threshold");
    st.clamp_magnitude = std::max(st.clamp_magnitude, -v);
    v = 0.0;
    clamped = true;
  }
  if (clamped) st.m *= m_next.sum() / st.m.sum();
  return st;
}

AdjointCheck adjoint_check(const PowerHamiltonian& H, double nu, const GridField& u, int probes,
                           std::uint64_t seed) {
  const auto& g = u.grid();
  CounterRng rng(seed, 0xad7);
  AdjointCheck out;
  for (int p = 0; p < probes; ++p) {
    GridField v(g), m(g);
    for (double& x : v.values()) x = rng.uniform(-1.0, 1.0);
    for (double& x : m.values()) x = rng.uniform(-1.0, 1.0);
    const GridField Lv = linearized_apply(H, nu, u, v);
    GridField Am = laplace5(m);
    Am *= -nu;
    Am -= transport_apply(H, u, m);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      lhs += Lv[k] * m[k];
      rhs += v[k] * Am[k];
      scale += std::abs(Lv[k] * m[k]) + std::abs(v[k] * Am[k]);
    }
    const double d = std::abs(lhs - rhs);
    out.max_discrepancy = std::max(out.max_discrepancy, d);
    out.max_relative = std::max(out.max_relative, d / std::max(scale, 1e-300));
  }
  return out;
}

}  // namespace mfg
