#include "mfg/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/verification.hpp"

namespace mfg {

void validate(const FixedPointConfig& cfg) {
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
    throw UsageError("solver.damping must lie in (0, 1]");
  if (!(cfg.outer_tol > 0.0)) throw UsageError("solver.outer_tol must be positive");
  if (cfg.max_outer < 1) throw UsageError("solver.max_outer must be at least 1");
  if (cfg.max_halvings < 0) throw UsageError("solver.max_halvings must be nonnegative");
  if (!(cfg.residual_tol > 0.0)) throw UsageError("solver.residual_tol must be positive");
}

void EvolutiveProblem::validate() const {
  if (!(nu > 0.0)) throw UsageError("problem.nu must be positive");
  require_same_grid(u0.grid(), hamiltonian.grid());
  require_same_grid(u0.grid(), mT.field().grid());
  if (mesh.n_steps < 1 || !(mesh.horizon > 0.0)) throw UsageError("problem: empty time mesh");
}

void ErgodicProblem::validate() const {
  if (!(nu > 0.0)) throw UsageError("problem.nu must be positive");
  if (!cost.is_local()) throw UsageError("ergodic problems need a local cost");
}

namespace {

HjbStep bellman_step(const PowerHamiltonian& H, double nu, double dt, const GridField& u_cur,
                     const GridField& phi, const HjbStepConfig& cfg, int& fallbacks) {
  try {
    return hjb_step_solve(H, nu, dt, u_cur, phi, cfg);
  } catch (const NonConvergence&) {
    ++fallbacks;
    return hjb_step_picard(H, nu, dt, u_cur, phi, cfg.newton_tol, 1000000);
  }
}

double trajectory_change(const SpaceTimeField& a, const SpaceTimeField& b) {
  double c = 0.0;
  for (int n = 0; n <= a.n_steps(); ++n) c = std::max(c, norm_l1(a[n] - b[n]));
  return c;
}

SpaceTimeField blend(const SpaceTimeField& m, const SpaceTimeField& m_new, double theta) {
  SpaceTimeField out = m;
  for (int n = 0; n <= m.n_steps(); ++n) {
    out[n] *= 1.0 - theta;
    GridField add = m_new[n];
    add *= theta;
    out[n] += add;
  }
  return out;
}

// One forward Bellman sweep against m followed by one backward Fokker-Planck sweep.
struct Sweep {
  SpaceTimeField u;
  SpaceTimeField m_new;
  double change;
  double max_clamp;
};

Sweep sweep(const EvolutiveProblem& p, const SolverOptions& opt, const SpaceTimeField& m,
            int& fallbacks) {
  const double dt = p.mesh.dt;
  const int nt = p.mesh.n_steps;
  SpaceTimeField u(p.grid(), p.mesh);
  u[0] = p.u0;
  for (int n = 0; n < nt; ++n) {
    const GridField phi = eval_cost(p.cost, m[n]);
    u[n + 1] = bellman_step(p.hamiltonian, p.nu, dt, u[n], phi, opt.hjb, fallbacks).u;
  }
  SpaceTimeField m_new(p.grid(), p.mesh);
  m_new[nt] = p.mT.field();
  double clamp = 0.0;
  for (int n = nt - 1; n >= 0; --n) {
    FpStep st = fp_step_solve(p.hamiltonian, p.nu, dt, u[n + 1], m_new[n + 1], opt.linear);
    clamp = std::max(clamp, st.clamp_magnitude);
    m_new[n] = std::move(st.m);
  }
  const double change = trajectory_change(m_new, m);
  return {std::move(u), std::move(m_new), change, clamp};
}

void fill_residuals(const EvolutiveProblem& p, EvolutiveSolution& s) {
  const double dt = p.mesh.dt;
  s.hjb_residual = s.fp_residual = s.max_mass_deviation = 0.0;
  for (int n = 0; n < p.mesh.n_steps; ++n) {
    const GridField phi = p.cost.apply(s.m[n]);
    s.hjb_residual = std::max(
        s.hjb_residual, norm_sup(hjb_residual(p.hamiltonian, p.nu, dt, s.u[n + 1], s.u[n], phi)));
    s.fp_residual = std::max(
        s.fp_residual,
        norm_sup(fp_residual(p.hamiltonian, p.nu, dt, s.u[n + 1], s.m[n + 1], s.m[n])));
  }
  for (const auto& slice : s.m)
    s.max_mass_deviation = std::max(s.max_mass_deviation, std::abs(slice.mass() - 1.0));
}

}  // namespace

EvolutiveSolution run_evolutive(const EvolutiveProblem& p, const SolverOptions& opt,
                                const std::optional<SpaceTimeField>& initial_m) {
  p.validate();
  validate(opt.fixed_point);
  const auto& fp = opt.fixed_point;

  SpaceTimeField m(p.grid(), p.mesh);
  if (initial_m) {
    if (!(initial_m->grid() == p.grid()) || initial_m->n_steps() != p.mesh.n_steps)
      throw UsageError("run_evolutive: initial trajectory does not match the problem");
    m = *initial_m;
  } else {
    for (int n = 0; n <= p.mesh.n_steps; ++n) m[n] = p.mT.field();
  }

  EvolutiveSolution sol{.u = SpaceTimeField(p.grid(), p.mesh), .m = m};
  for (int n = 0; n <= p.mesh.n_steps; ++n) sol.u[n] = p.u0;

  try {
    Sweep cur = sweep(p, opt, m, sol.picard_fallbacks);
    sol.max_clamp = cur.max_clamp;
    for (;;) {
      sol.u = cur.u;
      sol.m = cur.m_new;
      sol.last_change = cur.change;
      sol.residual_history.push_back(cur.change);
      if (cur.change < fp.outer_tol) {
        fill_residuals(p, sol);
        if (sol.hjb_residual <= fp.residual_tol && sol.fp_residual <= fp.residual_tol) {
          sol.converged = true;
          break;
        }
      }
      if (sol.outer_iters >= fp.max_outer) {
        sol.failure = "outer iteration limit reached";
        break;
      }
      ++sol.outer_iters;
      double theta = fp.damping;
      SpaceTimeField cand = blend(m, cur.m_new, theta);
      Sweep next = sweep(p, opt, cand, sol.picard_fallbacks);
      for (int k = 0; k < fp.max_halvings && next.change > cur.change; ++k) {
        theta *= 0.5;
        cand = blend(m, cur.m_new, theta);
        next = sweep(p, opt, cand, sol.picard_fallbacks);
      }
      m = std::move(cand);
      sol.max_clamp = std::max(sol.max_clamp, next.max_clamp);
      cur = std::move(next);
    }
  } catch (const SolverError& e) {
    sol.failure = e.what();
  }
  if (!sol.converged) fill_residuals(p, sol);
  if (p.cost.is_local()) sol.monitors = apriori_monitors(sol, p.cost.local_cost(), p.hamiltonian.beta());
  return sol;
}

EvolutiveSolution solve_evolutive(const EvolutiveProblem& p, const SolverOptions& opt,
                                  const std::optional<SpaceTimeField>& initial_m) {
  EvolutiveSolution sol = run_evolutive(p, opt, initial_m);
  if (!sol.converged) throw OuterNonConvergence(sol.outer_iters, sol.last_change);
  return sol;
}

ErgodicHjb ergodic_hjb_solve(const PowerHamiltonian& H, double nu, const GridField& phi,
                             const HjbStepConfig& cfg, const GridField& u_start,
                             double lambda_start) {
  const auto& g = phi.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  const double h2 = g.h() * g.h();
  ErgodicHjb st{u_start, lambda_start, 0, 0.0};

  auto residual = [&](const GridField& u, double lambda) {
    GridField lap = laplace5(u);
    lap *= -nu;
    GridField r = lap + hamiltonian_field(H, u) - phi;
    Eigen::VectorXd out(n + 1);
    for (Eigen::Index k = 0; k < n; ++k) out(k) = r[static_cast<std::size_t>(k)] + lambda;
    out(n) = u.mass();
    return out;
  };

  Eigen::VectorXd r = residual(st.u, st.lambda);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool analysed = false;
  while (rnorm > cfg.newton_tol) {
    if (st.iterations >= cfg.max_newton) throw NonConvergence(st.iterations, rnorm);
    ++st.iterations;
    const SparseMatrix L = linearized_matrix(H, nu, st.u, 0.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(L.nonZeros() + 2 * n));
    for (Eigen::Index c = 0; c < L.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(L, c); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index k = 0; k < n; ++k) {
      trip.emplace_back(static_cast<int>(k), static_cast<int>(n), 1.0);
      trip.emplace_back(static_cast<int>(n), static_cast<int>(k), h2);
    }
    SparseMatrix J(n + 1, n + 1);
    J.setFromTriplets(trip.begin(), trip.end());
    if (!analysed) {
      lu.analyzePattern(J);
      analysed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) throw NonConvergence(st.iterations, rnorm);
    const Eigen::VectorXd delta = -lu.solve(r);

    double step = 1.0;
    for (;;) {
      GridField trial = st.u;
      for (Eigen::Index k = 0; k < n; ++k) trial[static_cast<std::size_t>(k)] += step * delta(k);
      const double lambda_trial = st.lambda + step * delta(n);
      Eigen::VectorXd r_trial = residual(trial, lambda_trial);
      const double n_trial = r_trial.lpNorm<Eigen::Infinity>();
      if (n_trial <= (1.0 - cfg.armijo_c * step) * rnorm || step <= cfg.min_step) {
        st.u = std::move(trial);
        st.lambda = lambda_trial;
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

GridField ergodic_fp_solve(const PowerHamiltonian& H, double nu, const GridField& u, double tol,
                           int max_iter, double shift) {
  const auto& g = u.grid();
  const SparseMatrix A = SparseMatrix(linearized_matrix(H, nu, u, 0.0).transpose());
  SparseMatrix B = A;
  for (Eigen::Index k = 0; k < B.rows(); ++k) B.coeffRef(k, k) += shift;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success) throw InversePowerStall(0);

  const double h2 = g.h() * g.h();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(B.rows());
  for (int it = 1; it <= max_iter; ++it) {
    x = lu.solve(x);
    x /= h2 * x.sum();
    if ((A * x).lpNorm<Eigen::Infinity>() <= tol) {
      GridField m = from_vector(g, x);
      bool clamped = false;
      for (double& v : m.values()) {
        if (v >= 0.0) continue;
        if (v < -1e-12) throw SolverError("ergodic_fp_solve: negative density entry");
        v = 0.0;
        clamped = true;
      }
      if (clamped) m *= 1.0 / m.mass();
      return m;
    }
  }
  throw InversePowerStall(max_iter);
}

ErgodicResiduals ergodic_residuals(const ErgodicProblem& p, const GridField& u, const GridField& m,
                                   double lambda) {
  GridField lap = laplace5(u);
  lap *= -p.nu;
  GridField r = lap + hamiltonian_field(p.hamiltonian, u) - p.cost.apply(m);
  for (double& v : r.values()) v += lambda;
  GridField lm = laplace5(m);
  lm *= -p.nu;
  lm -= transport_apply(p.hamiltonian, u, m);
  return {norm_sup(r), norm_sup(lm), std::abs(m.mass() - 1.0), std::abs(u.mass())};
}

ErgodicSolution run_ergodic(const ErgodicProblem& p, const SolverOptions& opt) {
  p.validate();
  validate(opt.fixed_point);
  const auto& fp = opt.fixed_point;
  const auto& g = p.grid();
  const double fp_tol = 0.1 * fp.residual_tol;

  struct Eval {
    GridField u;
    double lambda;
    GridField m_new;
    double change;
  };
  auto evaluate = [&](const GridField& m, const GridField& u_start, double lambda_start) {
    const ErgodicHjb hjb =
        ergodic_hjb_solve(p.hamiltonian, p.nu, eval_cost(p.cost, m), opt.hjb, u_start, lambda_start);
    GridField m_new = ergodic_fp_solve(p.hamiltonian, p.nu, hjb.u, fp_tol);
    const double change = norm_l1(m_new - m);
    return Eval{hjb.u, hjb.lambda, std::move(m_new), change};
  };

  GridField m(g, 1.0);
  ErgodicSolution sol{.u = GridField(g), .m = m};
  try {
    Eval cur = evaluate(m, GridField(g), 0.0);
    for (;;) {
      sol.u = cur.u;
      sol.m = cur.m_new;
      sol.lambda = cur.lambda;
      sol.last_change = cur.change;
      sol.residual_history.push_back(cur.change);
      if (cur.change < fp.outer_tol) {
        const auto r = ergodic_residuals(p, sol.u, sol.m, sol.lambda);
        if (std::max({r.hjb, r.fp, r.mass, r.mean}) <= 10.0 * fp.outer_tol) {
          sol.converged = true;
          break;
        }
      }
      if (sol.outer_iters >= fp.max_outer) {
        sol.failure = "outer iteration limit reached";
        break;
      }
      ++sol.outer_iters;
      double theta = fp.damping;
      GridField cand = (1.0 - theta) * m + theta * cur.m_new;
      Eval next = evaluate(cand, cur.u, cur.lambda);
      for (int k = 0; k < fp.max_halvings && next.change > cur.change; ++k) {
        theta *= 0.5;
        cand = (1.0 - theta) * m + theta * cur.m_new;
        next = evaluate(cand, cur.u, cur.lambda);
      }
      m = std::move(cand);
      cur = std::move(next);
    }
  } catch (const SolverError& e) {
    sol.failure = e.what();
  }
  const auto r = ergodic_residuals(p, sol.u, sol.m, sol.lambda);
  sol.hjb_residual = r.hjb;
  sol.fp_residual = r.fp;
  sol.mass_residual = r.mass;
  sol.mean_residual = r.mean;
  return sol;
}

ErgodicSolution solve_ergodic(const ErgodicProblem& p, const SolverOptions& opt) {
  ErgodicSolution sol = run_ergodic(p, opt);
  if (!sol.converged) throw OuterNonConvergence(sol.outer_iters, sol.last_change);
  return sol;
}

}  // namespace mfg
