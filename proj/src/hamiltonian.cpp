#include "mfg/hamiltonian.hpp"

#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

Quad upwind_part(const Quad& q) {
  return {std::max(-q[0], 0.0), std::max(q[1], 0.0), std::max(-q[2], 0.0), std::max(q[3], 0.0)};
}

double euclid(const Quad& p) {
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
}

double max_abs(const Quad& p) {
  return std::max(std::max(std::abs(p[0]), std::abs(p[1])),
                  std::max(std::abs(p[2]), std::abs(p[3])));
}

double PowerLaw::value(const Quad& p) const {
  const double s = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
  return std::pow(s, 0.5 * beta);
}

Quad PowerLaw::grad(const Quad& p) const {
  const double r = euclid(p);
  if (r == 0.0) return {0.0, 0.0, 0.0, 0.0};
  // beta r^(beta-1) (p / r) stays finite for 1 < beta < 2 as r -> 0.
  const double c = beta * std::pow(r, beta - 1.0) / r;
  return {c * p[0], c * p[1], c * p[2], c * p[3]};
}

Mat4 PowerLaw::hessian(const Quad& p) const {
  const double r = euclid(p);
  if (r == 0.0) throw UsageError("PowerLaw::hessian is undefined at p = 0");
  const double a = beta * std::pow(r, beta - 2.0);
  const double b = beta * (beta - 2.0) * std::pow(r, beta - 4.0);
  Mat4 m{};
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) m[k][l] = (k == l ? a : 0.0) + b * p[k] * p[l];
  return m;
}

PowerHamiltonian::PowerHamiltonian(double beta, GridField calh, std::optional<double> bound)
    : law_{beta}, calh_(std::move(calh)), calh_grad_bound_(bound) {
  if (!(beta > 1.0)) throw UsageError("PowerHamiltonian: beta must satisfy beta > 1");
}

double PowerHamiltonian::value(std::size_t node, const Quad& q) const {
  return calh_[node] + law_.value(upwind_part(q));
}

Quad PowerHamiltonian::grad(const Quad& q) const {
  const Quad gp = law_.grad(upwind_part(q));
#ifdef MFG_FD_MUTATE_GRAD_SIGN
  return {gp[0], -gp[1], gp[2], -gp[3]};
#else
  return {-gp[0], gp[1], -gp[2], gp[3]};
#endif
}

double PowerHamiltonian::bregman_gap(const Quad& q, const Quad& qt) const {
  const Quad gq = grad(q);
  double lin = 0.0;
  for (int k = 0; k < 4; ++k) lin += gq[k] * (qt[k] - q[k]);
  return law_.value(upwind_part(qt)) - law_.value(upwind_part(q)) - lin;
}

GridField hamiltonian_field(const PowerHamiltonian& H, const GridField& u) {
  require_same_grid(H.grid(), u.grid());
  const auto& g = u.grid();
  GridField out(g);
  for (int i = 0; i < g.n_side(); ++i)
    for (int j = 0; j < g.n_side(); ++j) out(i, j) = H.value(g.index(i, j), stencil_at(u, i, j));
  return out;
}

double functional_G(const PowerHamiltonian& H, const SpaceTimeField& m, const SpaceTimeField& u,
                    const SpaceTimeField& ut) {
  if (m.n_steps() != u.n_steps() || u.n_steps() != ut.n_steps())
    throw UsageError("functional_G: mismatched time meshes");
  require_same_grid(m.grid(), u.grid());
  require_same_grid(u.grid(), ut.grid());
  const auto& g = u.grid();
  double total = 0.0;
  for (int n = 1; n <= u.n_steps(); ++n)
    for (int i = 0; i < g.n_side(); ++i)
      for (int j = 0; j < g.n_side(); ++j)
        total += m[n - 1](i, j) *
                 H.bregman_gap(stencil_at(u[n], i, j), stencil_at(ut[n], i, j));
  return total;
}

}  // namespace mfg
