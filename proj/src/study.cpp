#include "mfg/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "mfg/presets.hpp"

namespace mfg {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct LevelRun {
  std::optional<EvolutiveSolution> evo;
  std::optional<ErgodicSolution> erg;
};

template <class F>
void fan_out(std::size_t count, int threads, F&& job) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < count;) {
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, threads));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n, count); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double order(double coarse, double fine, double ratio) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return nan;
  return std::log(coarse / fine) / std::log(ratio);
}

}  // namespace

bool strictly_decreasing(const std::vector<double>& errors, double floor) {
  for (std::size_t k = 1; k < errors.size(); ++k)
    if (!(errors[k] < errors[k - 1] || errors[k] <= floor)) return false;
  return true;
}

StudyReport convergence_study(const RunConfig& cfg, int threads) {
  validate_levels(cfg.study);
  const auto& levels = cfg.study.levels;
  const bool ergodic = cfg.problem.kind == "ergodic";
  const std::size_t count = levels.size();

  StudyReport rep;
  rep.kind = cfg.problem.kind;
  rep.beta = cfg.problem.beta;
  const CostOperator cost = make_cost(cfg.cost);
  rep.m_exponent = cost.is_local() ? 2.0 - cost.local_cost().eta2 : 2.0;
  rep.floor = 10.0 * cfg.solver.fixed_point.outer_tol;

  std::vector<LevelRun> runs(count);
  fan_out(count, threads, [&](std::size_t k) {
    const int n = levels[k];
    if (ergodic)
      runs[k].erg = run_ergodic(make_ergodic(cfg, n), cfg.solver);
    else
      runs[k].evo = run_evolutive(make_evolutive(cfg, n, cfg.study.nt_ratio * n), cfg.solver);
  });

  const std::size_t fine = count - 1;
  rep.all_converged = true;
  for (std::size_t k = 0; k < count; ++k) {
    StudyLevel lvl;
    lvl.n_side = levels[k];
    lvl.h = 1.0 / levels[k];
    if (ergodic) {
      const auto& s = *runs[k].erg;
      lvl.converged = s.converged;
      lvl.outer_iters = s.outer_iters;
      lvl.lambda = s.lambda;
    } else {
      const auto& s = *runs[k].evo;
      lvl.n_steps = s.u.n_steps();
      lvl.dt = s.u.mesh().dt;
      lvl.converged = s.converged;
      lvl.outer_iters = s.outer_iters;
      lvl.monitors = s.monitors;
    }
    rep.all_converged = rep.all_converged && lvl.converged;

    if (k == fine) {
      lvl.err_u_sup = lvl.err_u_w1beta = lvl.err_m = nan;
    } else if (ergodic) {
      const auto& c = *runs[k].erg;
      const auto& f = *runs[fine].erg;
      const TorusGrid& g = c.u.grid();
      const GridField eu = c.u - restrict_to(f.u, g);
      const GridField em = c.m - restrict_to(f.m, g);
      lvl.err_u_sup = norm_sup(eu);
      lvl.err_u_w1beta = seminorm_w1(eu, rep.beta);
      lvl.err_m = norm_lp(em, rep.m_exponent);
    } else {
      const auto& c = *runs[k].evo;
      const auto& f = *runs[fine].evo;
      const TorusGrid& g = c.u.grid();
      const int stride = f.u.n_steps() / c.u.n_steps();
      SpaceTimeField eu(g, c.u.mesh()), em(g, c.u.mesh());
      for (int n = 0; n <= c.u.n_steps(); ++n) {
        eu[n] = c.u[n] - restrict_to(f.u[n * stride], g);
        em[n] = c.m[n] - restrict_to(f.m[n * stride], g);
      }
      lvl.err_u_sup = norm_sup(eu);
      lvl.err_u_w1beta = seminorm_lbeta_w1(eu, rep.beta);
      lvl.err_m = norm_lp(em, rep.m_exponent, 0, c.u.n_steps() - 1);
    }
    rep.levels.push_back(lvl);
  }

  std::vector<double> e_sup, e_w1, e_m;
  for (std::size_t k = 0; k < count; ++k) {
    auto& lvl = rep.levels[k];
    lvl.order_u_sup = lvl.order_u_w1beta = lvl.order_m = nan;
    if (k + 2 < count) {
      const auto& nx = rep.levels[k + 1];
      const double ratio = static_cast<double>(nx.n_side) / lvl.n_side;
      lvl.order_u_sup = order(lvl.err_u_sup, nx.err_u_sup, ratio);
      lvl.order_u_w1beta = order(lvl.err_u_w1beta, nx.err_u_w1beta, ratio);
      lvl.order_m = order(lvl.err_m, nx.err_m, ratio);
    }
    if (k != fine) {
      e_sup.push_back(lvl.err_u_sup);
      e_w1.push_back(lvl.err_u_w1beta);
      e_m.push_back(lvl.err_m);
    }
  }
  rep.decreasing = rep.all_converged && strictly_decreasing(e_sup, rep.floor) &&
                   strictly_decreasing(e_w1, rep.floor) && strictly_decreasing(e_m, rep.floor);
  if (ergodic) {
    for (std::size_t k = 1; k < count; ++k)
      rep.lambda_increments.push_back(std::abs(rep.levels[k].lambda - rep.levels[k - 1].lambda));
    rep.decreasing = rep.decreasing && strictly_decreasing(rep.lambda_increments, rep.floor);
  }
  return rep;
}

}  // namespace mfg
