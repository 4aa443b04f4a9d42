#include "mfg/cost.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "mfg/errors.hpp"
#include "mfg/random.hpp"

namespace mfg {

namespace {
// FFTW's planner is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

DiscreteDensity::DiscreteDensity(GridField m, double mass_tol) : m_(std::move(m)) {
  if (m_.min() < 0.0) throw UsageError("DiscreteDensity: negative entry");
  if (std::abs(m_.mass() - 1.0) > mass_tol)
    throw UsageError("DiscreteDensity: mass " + std::to_string(m_.mass()) + " is not 1");
}

GridField normalize_density(GridField m) {
  if (m.min() < 0.0) throw UsageError("normalize_density: negative entry");
  const double mass = m.mass();
  if (!(mass > 0.0)) throw UsageError("normalize_density: zero mass");
  m *= 1.0 / mass;
  return m;
}

LocalCost LocalCost::linear() {
  LocalCost c;
  c.preset = "linear";
  c.alpha = 1.0;
  c.f = [](double m) { return m; };
  c.f_prime = [](double) { return 1.0; };
  c.delta = 1.0;
  c.gamma = 2.0;
  c.c1 = 0.0;
  c.eta1 = 1.0;
  c.eta2 = 0.5;
  return c;
}

LocalCost LocalCost::power(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw UsageError("power cost: alpha must lie in (0, 2]");
  LocalCost c;
  c.preset = "power";
  c.alpha = alpha;
  c.f = [alpha](double m) { return std::pow(m, alpha); };
  c.f_prime = [alpha](double m) { return alpha * std::pow(m, alpha - 1.0); };
  // m F(m) = m^(alpha+1) = |F|^gamma with gamma = 1 + 1/alpha.
  c.gamma = 1.0 + 1.0 / alpha;
  c.delta = std::min(1.0, alpha);
  c.c1 = 0.0;
  c.eta1 = alpha > 1.0 ? alpha - 1.0 : 1.0;
  c.eta2 = alpha < 1.0 ? 1.0 - alpha : 0.5;
  return c;
}

LocalCostCheck check_local_cost(const LocalCost& c, int samples, double upper) {
  LocalCostCheck out{std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), true};
  for (int s = 0; s <= samples; ++s) {
    // Geometric spacing resolves both ends of [0, upper]; s = 0 is m = 0.
    const double m = s == 0 ? 0.0 : upper * std::pow(1e-9, 1.0 - static_cast<double>(s) / samples);
    const double F = c.f(m);
    const double lhs = m * F;
    const double rhs = c.delta * std::pow(std::abs(F), c.gamma) - c.c1;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    out.growth_worst_margin = std::min(out.growth_worst_margin, (lhs - rhs) / scale);
    if (m > 0.0) {
      const double dF = c.f_prime(m);
      const double low = c.delta * std::min(std::pow(m, c.eta1), std::pow(m, -c.eta2));
      out.derivative_worst_margin =
          std::min(out.derivative_worst_margin, (dF - low) / std::max({std::abs(dF), low, 1e-300}));
    }
  }
  out.pass = out.growth_worst_margin >= -1e-12 && out.derivative_worst_margin >= -1e-12;
  return out;
}

struct BilaplacianResolvent::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

double BilaplacianResolvent::laplace_symbol(int k1, int k2, const TorusGrid& grid) {
  const double n = grid.n_side();
  const double h = grid.h();
  const double s1 = std::sin(std::numbers::pi * k1 / n);
  const double s2 = std::sin(std::numbers::pi * k2 / n);
  return 4.0 / (h * h) * (s1 * s1 + s2 * s2);
}

BilaplacianResolvent::BilaplacianResolvent(const TorusGrid& grid)
    : grid_(grid), plans_(std::make_unique<Plans>()) {
  const int n = grid.n_side();
  const int nc = n / 2 + 1;
  inv_symbol_.resize(static_cast<std::size_t>(n) * nc);
  const double norm = 1.0 / (static_cast<double>(n) * n);
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < nc; ++k2) {
      const double mu = laplace_symbol(k1, k2, grid);
      inv_symbol_[static_cast<std::size_t>(k1) * nc + k2] = norm / (1.0 + mu * mu);
    }
  std::lock_guard lock(fftw_planner_mutex());
  double* real = fftw_alloc_real(grid.size());
  fftw_complex* freq = fftw_alloc_complex(inv_symbol_.size());
  plans_->forward = fftw_plan_dft_r2c_2d(n, n, real, freq, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft_c2r_2d(n, n, freq, real, FFTW_ESTIMATE);
  fftw_free(real);
  fftw_free(freq);
}

BilaplacianResolvent::~BilaplacianResolvent() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->backward);
}

GridField BilaplacianResolvent::apply(const GridField& m) const {
  require_same_grid(m.grid(), grid_);
  double* real = fftw_alloc_real(grid_.size());
  fftw_complex* freq = fftw_alloc_complex(inv_symbol_.size());
  std::copy(m.values().begin(), m.values().end(), real);
  fftw_execute_dft_r2c(plans_->forward, real, freq);
  for (std::size_t k = 0; k < inv_symbol_.size(); ++k) {
    freq[k][0] *= inv_symbol_[k];
    freq[k][1] *= inv_symbol_[k];
  }
  fftw_execute_dft_c2r(plans_->backward, freq, real);
  GridField w(grid_, std::vector<double>(real, real + grid_.size()));
  fftw_free(real);
  fftw_free(freq);
  return w;
}

struct CostOperator::Cache {
  std::mutex mutex;
  std::map<int, std::unique_ptr<BilaplacianResolvent>> by_size;
};

CostOperator CostOperator::local(LocalCost cost) {
  CostOperator c;
  c.kind_ = Kind::local;
  c.local_ = std::make_shared<LocalCost>(std::move(cost));
  return c;
}

CostOperator CostOperator::bilaplacian() {
  CostOperator c;
  c.kind_ = Kind::bilaplacian;
  c.cache_ = std::make_shared<Cache>();
  return c;
}

const LocalCost& CostOperator::local_cost() const {
  if (!is_local()) throw UsageError("cost operator is not local");
  return *local_;
}

std::string CostOperator::describe() const {
  if (!is_local()) return "bilaplacian";
  if (local_->preset == "power") return "local power alpha=" + std::to_string(local_->alpha);
  return "local " + local_->preset;
}

const BilaplacianResolvent& CostOperator::resolvent(const TorusGrid& grid) const {
  std::lock_guard lock(cache_->mutex);
  auto& slot = cache_->by_size[grid.n_side()];
  if (!slot) slot = std::make_unique<BilaplacianResolvent>(grid);
  return *slot;
}

GridField CostOperator::apply(const GridField& m) const {
  if (kind_ == Kind::bilaplacian) return resolvent(m.grid()).apply(m);
  GridField out(m.grid());
  for (std::size_t k = 0; k < m.size(); ++k) out[k] = local_->f(std::max(m[k], 0.0));
  return out;
}

GridField eval_cost(const CostOperator& cost, const GridField& m) {
  if (m.min() < -1e-10) throw UsageError("eval_cost: density has entries below -1e-10");
  if (std::abs(m.mass() - 1.0) > 1e-8)
    throw UsageError("eval_cost: density mass " + std::to_string(m.mass()) + " is not 1");
  return cost.apply(m);
}

double monotone_pairing(const CostOperator& cost, const GridField& m, const GridField& mt) {
  return inner2(eval_cost(cost, m) - eval_cost(cost, mt), m - mt);
}

namespace {

double torus_distance(double a1, double a2, double b1, double b2) {
  double d1 = std::abs(a1 - b1);
  double d2 = std::abs(a2 - b2);
  d1 = std::min(d1, 1.0 - d1);
  d2 = std::min(d2, 1.0 - d2);
  return std::sqrt(d1 * d1 + d2 * d2);
}

double lipschitz_quotient(const GridField& w) {
  const auto& g = w.grid();
  const int n = g.n_side();
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (i == k && j == l) continue;
          const double d = torus_distance(g.coord(i), g.coord(j), g.coord(k), g.coord(l));
          best = std::max(best, std::abs(w(i, j) - w(k, l)) / d);
        }
  return best;
}

}  // namespace

PhiH3Report phi_h3_check(const CostOperator& cost, const std::vector<int>& levels, int samples,
                         std::uint64_t seed, double bound) {
  PhiH3Report rep{{}, bound, 0.0, 0.0, true};
  for (int n : levels) {
    const TorusGrid g(n);
    CounterRng rng(seed, static_cast<std::uint64_t>(n));
    PhiH3Level lvl{n, 0.0, 0.0};
    auto probe = [&](const GridField& m) {
      const GridField w = eval_cost(cost, m);
      lvl.sup_norm = std::max(lvl.sup_norm, norm_sup(w));
      lvl.lipschitz = std::max(lvl.lipschitz, lipschitz_quotient(w));
    };
    GridField spike(g);
    spike(0, 0) = 1.0 / (g.h() * g.h());
    probe(spike);
    for (int s = 0; s < samples; ++s) {
      GridField m(g);
      for (double& v : m.values()) v = rng.uniform() < 0.7 ? 0.0 : rng.uniform();
      m(0, 0) += 1.0;
      probe(normalize_density(std::move(m)));
    }
    rep.max_sup = std::max(rep.max_sup, lvl.sup_norm);
    rep.max_lipschitz = std::max(rep.max_lipschitz, lvl.lipschitz);
    rep.pass = rep.pass && lvl.sup_norm <= bound && lvl.lipschitz <= bound;
    rep.levels.push_back(lvl);
  }
  return rep;
}

double fourier_series(const std::vector<FourierMode>& modes, double x1, double x2) {
  double s = 0.0;
  for (const auto& md : modes) {
    const double arg = 2.0 * std::numbers::pi * (md.k1 * x1 + md.k2 * x2);
    s += md.a_cos * std::cos(arg) + md.b_sin * std::sin(arg);
  }
  return s;
}

double bilaplacian_resolvent_exact(const std::vector<FourierMode>& modes, double x1, double x2) {
  double s = 0.0;
  for (const auto& md : modes) {
    const double k2 = 4.0 * std::numbers::pi * std::numbers::pi * (md.k1 * md.k1 + md.k2 * md.k2);
    const double arg = 2.0 * std::numbers::pi * (md.k1 * x1 + md.k2 * x2);
    s += (md.a_cos * std::cos(arg) + md.b_sin * std::sin(arg)) / (1.0 + k2 * k2);
  }
  return s;
}

}  // namespace mfg
